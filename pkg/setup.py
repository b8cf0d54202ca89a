"""Build script: compiles the optional fast-kernel extension when Cython is available.

The package works without the extension (a pure-Python backend is selected at
import time); building it is only needed for large-table performance:

    python setup.py build_ext --inplace
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/plantpulse/kernels/_ckernels.pyx",
        compiler_directives={"language_level": 3},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
