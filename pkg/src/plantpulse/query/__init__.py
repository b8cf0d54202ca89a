"""SQL-subset front end and executor over store snapshots."""

from .parser import SqlSyntaxError, parse, to_sql
from .planner import PlanError, plan
from .executor import (
    QueryResourceError,
    QueryTimeoutError,
    ResultTable,
    execute,
    reading_position_pairs,
    run_sql,
)
from .predefined import predefined

__all__ = [
    "SqlSyntaxError",
    "PlanError",
    "QueryResourceError",
    "QueryTimeoutError",
    "ResultTable",
    "parse",
    "to_sql",
    "plan",
    "execute",
    "run_sql",
    "reading_position_pairs",
    "predefined",
]
