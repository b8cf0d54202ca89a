"""plantpulse: a self-steering factory demo.

A seeded simulator emits linked business and sensor data streams into an
embedded in-memory columnar store; a SQL subset answers questions that join
the two by ID and by time window. Served over HTTP with a browser UI.
"""

__version__ = "0.1.0"
