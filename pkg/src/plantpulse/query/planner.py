"""Name/type resolution, predicate pushdown, and join classification.

Turns a parsed query into an executable plan: per-alias scan conditions
(column-vs-literal conjuncts pushed down), ordered join steps with each ON
predicate classified as a hash-join equality key, a timestamp interval
condition, or a residual filter, plus resolved output and grouping columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .. import schema
from .parser import (
    AggCall,
    Between,
    BoolOp,
    ColumnRef,
    Comparison,
    Literal,
    NullTest,
    Query,
)

_NUMERIC = {schema.INT64, schema.DECIMAL64, schema.TIMESTAMP}


class PlanError(ValueError):
    def __init__(self, message: str, offset: int = 0):
        super().__init__(message)
        self.message = message
        self.offset = offset


@dataclass(frozen=True)
class ResolvedColumn:
    alias: str
    table: str
    name: str
    type: str
    nullable: bool


@dataclass(frozen=True)
class ScanCond:
    column: ResolvedColumn
    op: str  # =, <>, <, <=, >, >=, between, is_null, not_null
    operands: tuple


@dataclass(frozen=True)
class EquiPair:
    probe: ResolvedColumn  # on an already-joined alias
    build: ResolvedColumn  # on the joining table


@dataclass(frozen=True)
class IntervalCond:
    time: ResolvedColumn
    enter: ResolvedColumn
    leave: ResolvedColumn
    time_on_new: bool  # the time column lives on the joining table


@dataclass
class JoinStep:
    table: str
    alias: str
    equi: list[EquiPair]
    interval: Optional[IntervalCond]
    residual: list


@dataclass(frozen=True)
class AggSpec:
    func: str
    source: Optional[ResolvedColumn]  # None = COUNT(*)


@dataclass(frozen=True)
class PlannedItem:
    kind: str  # "col" | "agg"
    name: str
    type: str
    source: Optional[ResolvedColumn] = None
    agg_index: Optional[int] = None


@dataclass(frozen=True)
class OrderKey:
    kind: str  # "item" | "col" | "agg"
    ascending: bool
    item_index: Optional[int] = None
    source: Optional[ResolvedColumn] = None
    agg_index: Optional[int] = None


@dataclass
class Plan:
    base_table: str
    base_alias: str
    aliases: dict[str, str]  # alias -> table, in join order
    alias_columns: dict[str, dict[str, schema.ColumnSpec]]
    scan_conds: dict[str, list[ScanCond]]
    joins: list[JoinStep]
    where_residual: Optional[object]
    items: list[PlannedItem]
    aggs: list[AggSpec]
    group_by: list[ResolvedColumn]
    order_by: list[OrderKey]
    limit: Optional[int]

    @property
    def grouped(self) -> bool:
        return bool(self.aggs) or bool(self.group_by)

    def resolve_ref(self, ref: ColumnRef) -> ResolvedColumn:
        candidates = [ref.table] if ref.table is not None else list(self.aliases)
        for alias in candidates:
            spec = self.alias_columns.get(alias, {}).get(ref.name)
            if spec is not None:
                return ResolvedColumn(
                    alias, self.aliases[alias], spec.name, spec.type, spec.nullable
                )
        raise PlanError(f"unknown column {ref.name}", ref.offset)


def _family(col_type: str) -> str:
    return "numeric" if col_type in _NUMERIC else "text"


def _literal_family(value) -> str:
    return "text" if isinstance(value, str) else "numeric"


class _Resolver:
    def __init__(self, ast: Query, catalog):
        self.ast = ast
        self.catalog = catalog
        self.aliases: dict[str, str] = {}
        self.columns: dict[str, dict[str, schema.ColumnSpec]] = {}

    def add_alias(self, table: str, alias: str, offset: int):
        specs = self.catalog.get(table)
        if specs is None:
            raise PlanError(f"unknown table {table}", offset)
        if alias in self.aliases:
            raise PlanError(f"duplicate alias {alias}", offset)
        self.aliases[alias] = table
        self.columns[alias] = {spec.name: spec for spec in specs}

    def resolve(self, ref: ColumnRef, scope: list[str] | None = None) -> ResolvedColumn:
        scope = scope if scope is not None else list(self.aliases)
        if ref.table is not None:
            if ref.table not in scope:
                raise PlanError(f"unknown table alias {ref.table}", ref.offset)
            spec = self.columns[ref.table].get(ref.name)
            if spec is None:
                raise PlanError(
                    f"unknown column {ref.table}.{ref.name}", ref.offset
                )
            return ResolvedColumn(
                ref.table, self.aliases[ref.table], spec.name, spec.type, spec.nullable
            )
        hits = [a for a in scope if ref.name in self.columns[a]]
        if not hits:
            raise PlanError(f"unknown column {ref.name}", ref.offset)
        if len(hits) > 1:
            raise PlanError(
                f"ambiguous column {ref.name} (in {', '.join(hits)})", ref.offset
            )
        alias = hits[0]
        spec = self.columns[alias][ref.name]
        return ResolvedColumn(
            alias, self.aliases[alias], spec.name, spec.type, spec.nullable
        )


def plan(ast: Query, catalog) -> Plan:
    """Validate the query against the catalog and build an execution plan."""
    resolver = _Resolver(ast, catalog)
    resolver.add_alias(ast.table, ast.alias, 0)
    for join in ast.joins:
        resolver.add_alias(join.table, join.alias, join.offset)

    scan_conds: dict[str, list[ScanCond]] = {alias: [] for alias in resolver.aliases}

    # classify join predicates; ON may reference aliases declared so far only
    joins: list[JoinStep] = []
    declared = [ast.alias]
    for join in ast.joins:
        scope = declared + [join.alias]
        equi: list[EquiPair] = []
        interval: Optional[IntervalCond] = None
        residual: list = []
        for cmp in join.on:
            kind, payload = _classify(cmp, resolver, scope, join.alias, declared)
            if kind == "scan":
                alias, cond = payload
                scan_conds[alias].append(cond)
            elif kind == "equi":
                equi.append(payload)
            elif kind == "interval":
                if interval is None:
                    interval = payload
                else:
                    residual.append(cmp)
            else:
                residual.append(cmp)
        if interval is not None and len(equi) > 1:
            # the first equality drives the partitioning; the rest filter pairs
            for extra in equi[1:]:
                residual.append(
                    Comparison(
                        "=",
                        ColumnRef(extra.probe.alias, extra.probe.name),
                        ColumnRef(extra.build.alias, extra.build.name),
                    )
                )
            equi = equi[:1]
        joins.append(JoinStep(join.table, join.alias, equi, interval, residual))
        declared.append(join.alias)

    # WHERE: push column-vs-literal conjuncts into scans, keep the rest
    residual_where = []
    if ast.where is not None:
        conjuncts = (
            list(ast.where.items)
            if isinstance(ast.where, BoolOp) and ast.where.op == "and"
            else [ast.where]
        )
        for cmp in conjuncts:
            pushed = _try_push(cmp, resolver)
            if pushed is not None:
                alias, cond = pushed
                scan_conds[alias].append(cond)
            else:
                _typecheck_predicate(cmp, resolver)
                residual_where.append(cmp)
    where_residual = None
    if residual_where:
        where_residual = (
            residual_where[0]
            if len(residual_where) == 1
            else BoolOp("and", tuple(residual_where))
        )

    # aggregates and output columns
    aggs: list[AggSpec] = []

    def agg_index(call: AggCall) -> int:
        if call.func == "COUNT" and call.arg is None:
            spec = AggSpec("COUNT", None)
        else:
            source = resolver.resolve(call.arg)
            if call.func in ("AVG", "SUM") and source.type not in (
                schema.INT64,
                schema.DECIMAL64,
            ):
                raise PlanError(
                    f"{call.func} requires a numeric column, "
                    f"{source.alias}.{source.name} is {source.type}",
                    call.offset,
                )
            spec = AggSpec(call.func, source)
        if spec in aggs:
            return aggs.index(spec)
        aggs.append(spec)
        return len(aggs) - 1

    group_by = [resolver.resolve(ref) for ref in ast.group_by]
    group_set = {(c.alias, c.name) for c in group_by}

    items: list[PlannedItem] = []
    for item in ast.items:
        if isinstance(item.expr, AggCall):
            index = agg_index(item.expr)
            spec = aggs[index]
            items.append(
                PlannedItem(
                    "agg",
                    item.alias or _agg_name(item.expr),
                    _agg_type(spec),
                    agg_index=index,
                )
            )
        else:
            source = resolver.resolve(item.expr)
            items.append(
                PlannedItem("col", item.alias or source.name, source.type, source=source)
            )

    order_by: list[OrderKey] = []
    alias_to_item = {
        item.name: i for i, item in enumerate(items)
    }
    for order in ast.order_by:
        if isinstance(order.expr, AggCall):
            order_by.append(
                OrderKey("agg", order.ascending, agg_index=agg_index(order.expr))
            )
        else:
            ref = order.expr
            if ref.table is None and ref.name in alias_to_item:
                order_by.append(
                    OrderKey("item", order.ascending, item_index=alias_to_item[ref.name])
                )
            else:
                order_by.append(
                    OrderKey("col", order.ascending, source=resolver.resolve(ref))
                )

    # grouping rules
    grouped = bool(aggs) or bool(group_by)
    if grouped:
        for item, ast_item in zip(items, ast.items):
            if item.kind == "col" and (item.source.alias, item.source.name) not in group_set:
                raise PlanError(
                    f"column {item.source.alias}.{item.source.name} must appear in GROUP BY",
                    ast_item.expr.offset,
                )
        for key, order in zip(order_by, ast.order_by):
            if key.kind == "col" and (key.source.alias, key.source.name) not in group_set:
                raise PlanError(
                    f"ORDER BY column {key.source.alias}.{key.source.name} "
                    "must appear in GROUP BY",
                    order.expr.offset,
                )

    return Plan(
        base_table=ast.table,
        base_alias=ast.alias,
        aliases=dict(resolver.aliases),
        alias_columns={a: dict(cols) for a, cols in resolver.columns.items()},
        scan_conds=scan_conds,
        joins=joins,
        where_residual=where_residual,
        items=items,
        aggs=aggs,
        group_by=group_by,
        order_by=order_by,
        limit=ast.limit,
    )


def _agg_name(call: AggCall) -> str:
    if call.arg is None:
        return f"{call.func}(*)"
    inner = f"{call.arg.table}.{call.arg.name}" if call.arg.table else call.arg.name
    return f"{call.func}({inner})"


def _agg_type(spec: AggSpec) -> str:
    if spec.func == "COUNT":
        return schema.INT64
    if spec.func == "AVG":
        return schema.DECIMAL64
    if spec.func == "SUM":
        return spec.source.type
    return spec.source.type  # MIN/MAX keep the argument type


def _check_comparable(left_family: str, right_family: str, offset: int, what: str):
    if left_family != right_family:
        raise PlanError(f"type mismatch in {what}: {left_family} vs {right_family}", offset)


def _typecheck_predicate(node, resolver: _Resolver, scope=None):
    if isinstance(node, BoolOp):
        for item in node.items:
            _typecheck_predicate(item, resolver, scope)
        return
    if isinstance(node, Comparison):
        left = resolver.resolve(node.left, scope)
        if isinstance(node.right, Literal):
            right_family = _literal_family(node.right.value)
            offset = node.right.offset
        else:
            right_family = _family(resolver.resolve(node.right, scope).type)
            offset = node.right.offset
        _check_comparable(_family(left.type), right_family, offset, f"{node.op} comparison")
        return
    if isinstance(node, Between):
        subject = resolver.resolve(node.subject, scope)
        for bound in (node.low, node.high):
            family = (
                _literal_family(bound.value)
                if isinstance(bound, Literal)
                else _family(resolver.resolve(bound, scope).type)
            )
            _check_comparable(_family(subject.type), family, bound.offset, "BETWEEN")
        return
    if isinstance(node, NullTest):
        resolver.resolve(node.subject, scope)
        return
    raise PlanError(f"unsupported predicate {node!r}")


def _try_push(cmp, resolver: _Resolver, scope=None):
    """Single-column, literal-only conjuncts become scan conditions."""
    if isinstance(cmp, Comparison) and isinstance(cmp.right, Literal):
        col = resolver.resolve(cmp.left, scope)
        _check_comparable(
            _family(col.type),
            _literal_family(cmp.right.value),
            cmp.right.offset,
            f"{cmp.op} comparison",
        )
        return col.alias, ScanCond(col, cmp.op, (cmp.right.value,))
    if (
        isinstance(cmp, Between)
        and isinstance(cmp.low, Literal)
        and isinstance(cmp.high, Literal)
    ):
        col = resolver.resolve(cmp.subject, scope)
        for bound in (cmp.low, cmp.high):
            _check_comparable(
                _family(col.type),
                _literal_family(bound.value),
                bound.offset,
                "BETWEEN",
            )
        return col.alias, ScanCond(col, "between", (cmp.low.value, cmp.high.value))
    if isinstance(cmp, NullTest):
        col = resolver.resolve(cmp.subject, scope)
        return col.alias, ScanCond(col, "not_null" if cmp.negated else "is_null", ())
    return None


def _classify(cmp, resolver: _Resolver, scope, new_alias: str, declared: list[str]):
    """Classify one ON conjunct: scan pushdown, equi key, interval, or residual."""
    pushed = _try_push(cmp, resolver, scope)
    if pushed is not None:
        return "scan", pushed
    if isinstance(cmp, Comparison) and isinstance(cmp.right, ColumnRef):
        left = resolver.resolve(cmp.left, scope)
        right = resolver.resolve(cmp.right, scope)
        _check_comparable(
            _family(left.type), _family(right.type), cmp.right.offset, "join condition"
        )
        if cmp.op == "=":
            if left.alias == new_alias and right.alias in declared:
                return "equi", EquiPair(probe=right, build=left)
            if right.alias == new_alias and left.alias in declared:
                return "equi", EquiPair(probe=left, build=right)
        return "residual", None
    if isinstance(cmp, Between) and isinstance(cmp.low, ColumnRef) and isinstance(
        cmp.high, ColumnRef
    ):
        subject = resolver.resolve(cmp.subject, scope)
        low = resolver.resolve(cmp.low, scope)
        high = resolver.resolve(cmp.high, scope)
        for col in (subject, low, high):
            if _family(col.type) != "numeric":
                raise PlanError(
                    f"BETWEEN join condition needs numeric columns, "
                    f"{col.alias}.{col.name} is {col.type}",
                    cmp.subject.offset,
                )
        if (
            subject.alias in declared
            and low.alias == new_alias
            and high.alias == new_alias
        ):
            return "interval", IntervalCond(subject, low, high, time_on_new=False)
        if (
            subject.alias == new_alias
            and low.alias in declared
            and high.alias == low.alias
        ):
            return "interval", IntervalCond(subject, low, high, time_on_new=True)
        return "residual", None
    _typecheck_predicate(cmp, resolver, scope)
    return "residual", None


