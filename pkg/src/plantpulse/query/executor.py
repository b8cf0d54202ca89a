"""Plan execution over store snapshots.

Semantics: inner joins only; NULL never compares equal to anything; BETWEEN
is inclusive; AVG/SUM/MIN/MAX ignore nulls (null result over zero inputs);
COUNT(*) counts rows, COUNT(col) non-nulls; groups appear in first-encounter
order; ORDER BY is stable with ascending nulls last; LIMIT applies after
ordering. Results are deterministic for a fixed snapshot.
"""

from __future__ import annotations

import time
from array import array
from dataclasses import dataclass, field

from .. import kernels, schema
from ..kernels import OP_CODES
from .parser import Between, BoolOp, ColumnRef, Comparison, Literal, NullTest, parse
from .planner import IntervalCond, Plan, PlanError, ResolvedColumn, plan as build_plan

DEFAULT_MAX_INTERMEDIATE = 50_000_000

_INT_FAMILY = (schema.INT64, schema.TIMESTAMP)


class QueryResourceError(RuntimeError):
    pass


class QueryTimeoutError(RuntimeError):
    pass


@dataclass
class ResultTable:
    columns: list[tuple[str, str]]
    rows: list[tuple]
    elapsed_ms: float = 0.0


def run_sql(sql: str, snapshot, catalog=None, **kwargs) -> ResultTable:
    """Parse, plan against the snapshot's catalog, and execute."""
    if catalog is None:
        catalog = {t: snapshot.schema_of(t) for t in snapshot.table_names()}
    ast = parse(sql)
    return execute(build_plan(ast, catalog), snapshot, **kwargs)


def execute(
    plan: Plan,
    snapshot,
    max_intermediate: int = DEFAULT_MAX_INTERMEDIATE,
    deadline: float | None = None,
) -> ResultTable:
    started = time.perf_counter()
    state = _Execution(plan, snapshot, max_intermediate, deadline)
    rows, columns = state.run()
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    return ResultTable(columns=columns, rows=rows, elapsed_ms=elapsed_ms)


class _Execution:
    def __init__(self, plan: Plan, snapshot, max_intermediate, deadline):
        self.plan = plan
        self.snapshot = snapshot
        self.max_intermediate = max_intermediate
        self.deadline = deadline
        # alias -> array('q') of base row indices, all of equal length
        self.intermediate: dict[str, array] = {}

    def _check_budget(self, size: int):
        if size > self.max_intermediate:
            raise QueryResourceError(
                f"intermediate result of {size} rows exceeds the "
                f"{self.max_intermediate} row guard"
            )
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise QueryTimeoutError("query timed out")

    # -- column access -----------------------------------------------------

    def _raw(self, col: ResolvedColumn):
        return self.snapshot.raw_column(col.table, col.name)

    def _gather_typed(self, col: ResolvedColumn, indices):
        """(typed value array, validity or None) for the given base rows."""
        values, validity, _ = self._raw(col)
        if col.type == schema.TEXT:
            raise TypeError("text columns have no typed gather")
        gather = kernels.gather_f64 if col.type == schema.DECIMAL64 else kernels.gather_i64
        return gather(values, indices), kernels.gather_bits(validity, indices)

    def _python_values(self, col: ResolvedColumn, indices) -> list:
        return self.snapshot.column_values(col.table, col.name, indices)

    def _alias_values(self, alias: str, name: str, col_type: str) -> list:
        table = self.plan.aliases[alias]
        return self.snapshot.column_values(table, name, self.intermediate[alias])

    # -- scans ---------------------------------------------------------------

    def _scan(self, alias: str) -> array:
        table = self.plan.aliases[alias]
        n = self.snapshot.row_count(table)
        indices = None
        for cond in self.plan.scan_conds.get(alias, ()):
            op = OP_CODES[cond.op]
            values, validity, _ = self.snapshot.raw_column(table, cond.column.name)
            if cond.column.type == schema.TEXT:
                indices = _filter_text(values, validity, cond, indices, n)
            else:
                lo = cond.operands[0] if cond.operands else 0
                hi = cond.operands[1] if len(cond.operands) > 1 else 0
                f = (
                    kernels.filter_f64
                    if cond.column.type == schema.DECIMAL64
                    else kernels.filter_i64
                )
                indices = f(values, validity, op, lo, hi, indices)
        if indices is None:
            indices = array("q", range(n))
        return indices

    # -- joins ---------------------------------------------------------------

    def run(self):
        plan = self.plan
        self.intermediate[plan.base_alias] = self._scan(plan.base_alias)
        for step in plan.joins:
            self._join(step)
        if plan.where_residual is not None:
            keep = self._eval_filter(plan.where_residual)
            self._apply_positions(keep)
        if plan.grouped:
            rows = self._aggregate()
        else:
            rows = self._project()
        rows = self._order_and_limit(rows)
        columns = [(item.name, item.type) for item in plan.items]
        out = [tuple(row[: len(plan.items)]) for row in rows]
        return out, columns

    def _join(self, step):
        new_indices = self._scan(step.alias)
        m = len(next(iter(self.intermediate.values())))
        if step.interval is not None:
            probe_pos, build_pos = self._interval_join(step, new_indices)
        elif step.equi:
            probe_pos, build_pos = self._equi_join(step, new_indices)
        else:
            probe_pos, build_pos = self._nested_loop(step, new_indices, m)
        self._check_budget(len(probe_pos))
        rebuilt = {
            alias: kernels.gather_i64(indices, probe_pos)
            for alias, indices in self.intermediate.items()
        }
        rebuilt[step.alias] = kernels.gather_i64(new_indices, build_pos)
        self.intermediate = rebuilt
        if step.residual:
            node = (
                step.residual[0]
                if len(step.residual) == 1
                else BoolOp("and", tuple(step.residual))
            )
            self._apply_positions(self._eval_filter(node))

    def _equi_join(self, step, new_indices):
        pair = step.equi[0]
        if pair.probe.type == schema.TEXT or pair.build.type == schema.TEXT:
            build_vals = self._python_values(pair.build, new_indices)
            probe_vals = self.snapshot.column_values(
                pair.probe.table, pair.probe.name, self.intermediate[pair.probe.alias]
            )
            table: dict = {}
            for j, v in enumerate(build_vals):
                if v is not None:
                    table.setdefault(v, []).append(j)
            probe_out = array("q")
            build_out = array("q")
            for i, v in enumerate(probe_vals):
                if v is None:
                    continue
                for j in table.get(v, ()):
                    probe_out.append(i)
                    build_out.append(j)
            return probe_out, build_out
        build_keys, build_valid = self._gather_typed(pair.build, new_indices)
        probe_keys, probe_valid = self._gather_typed(
            pair.probe, self.intermediate[pair.probe.alias]
        )
        return kernels.hash_join(build_keys, build_valid, probe_keys, probe_valid)

    def _interval_join(self, step, new_indices):
        cond: IntervalCond = step.interval
        pair = step.equi[0] if step.equi else None
        if not cond.time_on_new:
            # probe = joined-so-far rows carrying the time column
            build_part = self._partition_intervals(cond, new_indices, pair)
            probe_times, times_valid = self._gather_typed(
                cond.time, self.intermediate[cond.time.alias]
            )
            if pair is not None:
                probe_keys, keys_valid = self._gather_typed(
                    pair.probe, self.intermediate[pair.probe.alias]
                )
            else:
                probe_keys, keys_valid = _zero_keys(len(probe_times)), None
            probe_pos, build_pos = kernels.interval_probe(
                *build_part, probe_keys, keys_valid, probe_times, times_valid
            )
            return probe_pos, build_pos
        # probe = the joining table rows; intervals come from the joined-so-far side
        inter_len = len(next(iter(self.intermediate.values())))
        enters, enters_valid = self._gather_typed(
            cond.enter, self.intermediate[cond.enter.alias]
        )
        leaves, leaves_valid = self._gather_typed(
            cond.leave, self.intermediate[cond.leave.alias]
        )
        if pair is not None:
            part_keys, part_valid = self._gather_typed(
                pair.probe, self.intermediate[pair.probe.alias]
            )
        else:
            part_keys, part_valid = _zero_keys(inter_len), None
        part = kernels.build_interval_index(
            part_keys, enters, leaves, _combine_validity(enters_valid, leaves_valid, part_valid, inter_len)
        )
        probe_times, times_valid = self._gather_typed(cond.time, new_indices)
        if pair is not None:
            probe_keys, keys_valid = self._gather_typed(pair.build, new_indices)
        else:
            probe_keys, keys_valid = _zero_keys(len(probe_times)), None
        build_pos, probe_pos = kernels.interval_probe(
            *part, probe_keys, keys_valid, probe_times, times_valid
        )
        # swap: interval_probe probes the new table, pairing (new_pos, inter_pos)
        return probe_pos, build_pos

    def _partition_intervals(self, cond: IntervalCond, new_indices, pair):
        enters, enters_valid = self._gather_typed(cond.enter, new_indices)
        leaves, leaves_valid = self._gather_typed(cond.leave, new_indices)
        if pair is not None:
            keys, keys_valid = self._gather_typed(pair.build, new_indices)
        else:
            keys, keys_valid = _zero_keys(len(enters)), None
        merged = _combine_validity(enters_valid, leaves_valid, keys_valid, len(enters))
        return kernels.build_interval_index(keys, enters, leaves, merged)

    def _nested_loop(self, step, new_indices, m):
        size = m * len(new_indices)
        self._check_budget(size)
        probe_out = array("q")
        build_out = array("q")
        for i in range(m):
            for j in range(len(new_indices)):
                probe_out.append(i)
                build_out.append(j)
        return probe_out, build_out

    def _apply_positions(self, keep: array):
        self.intermediate = {
            alias: kernels.gather_i64(indices, keep)
            for alias, indices in self.intermediate.items()
        }

    # -- residual predicate evaluation ---------------------------------------

    def _eval_filter(self, node) -> array:
        refs: list[ResolvedColumn] = []
        _collect_refs(node, self.plan, refs)
        env = {}
        for col in refs:
            key = (col.alias, col.name)
            if key not in env:
                env[key] = self._alias_values(col.alias, col.name, col.type)
        m = len(next(iter(self.intermediate.values()))) if self.intermediate else 0
        keep = array("q")
        for i in range(m):
            if _eval_node(node, env, i, self.plan):
                keep.append(i)
        return keep

    # -- projection and aggregation ------------------------------------------

    def _project(self):
        plan = self.plan
        m = len(self.intermediate[plan.base_alias])
        self._check_budget(m)
        out_cols = []
        for item in plan.items:
            col = item.source
            out_cols.append(self._alias_values(col.alias, col.name, col.type))
        order_cols = self._order_col_values()
        rows = [
            tuple(col[i] for col in out_cols) + tuple(col[i] for col in order_cols)
            for i in range(m)
        ]
        return rows

    def _order_col_values(self):
        """Extra per-row values for ORDER BY columns not in the select list."""
        cols = []
        for key in self.plan.order_by:
            if key.kind == "col":
                col = key.source
                cols.append(self._alias_values(col.alias, col.name, col.type))
        return cols

    def _aggregate(self):
        plan = self.plan
        m = len(self.intermediate[plan.base_alias]) if self.intermediate else 0
        if self._fast_group_eligible():
            group_values, stats_by_agg = self._aggregate_fast()
        else:
            group_values, stats_by_agg = self._aggregate_generic(m)
        rows = []
        for g, key in enumerate(group_values):
            key_map = dict(zip(
                ((c.alias, c.name) for c in plan.group_by), key
            ))
            agg_values = [
                _finish_agg(spec, stats_by_agg[a][g]) for a, spec in enumerate(plan.aggs)
            ]
            row = []
            for item in plan.items:
                if item.kind == "agg":
                    row.append(agg_values[item.agg_index])
                else:
                    row.append(key_map[(item.source.alias, item.source.name)])
            for order in plan.order_by:
                if order.kind == "col":
                    row.append(key_map[(order.source.alias, order.source.name)])
                elif order.kind == "agg":
                    row.append(agg_values[order.agg_index])
            rows.append(tuple(row))
        return rows

    def _fast_group_eligible(self) -> bool:
        plan = self.plan
        if len(plan.group_by) != 1:
            return False
        key = plan.group_by[0]
        if key.type not in _INT_FAMILY or key.nullable:
            return False
        return all(
            spec.source is None or spec.source.type != schema.TEXT
            for spec in plan.aggs
        )

    def _aggregate_fast(self):
        plan = self.plan
        key_col = plan.group_by[0]
        keys, _ = self._gather_typed(key_col, self.intermediate[key_col.alias])
        per_source: dict = {}
        results = []
        base_stats = None
        for spec in plan.aggs:
            if spec.source is None:
                if base_stats is None:
                    base_stats = kernels.group_stats_i64(keys, None, None)
                results.append(base_stats)
                continue
            source_key = (spec.source.alias, spec.source.name)
            stats = per_source.get(source_key)
            if stats is None:
                values, validity = self._gather_typed(
                    spec.source, self.intermediate[spec.source.alias]
                )
                group_fn = (
                    kernels.group_stats_f64
                    if spec.source.type == schema.DECIMAL64
                    else kernels.group_stats_i64
                )
                stats = group_fn(keys, values, validity)
                per_source[source_key] = stats
            results.append(stats)
        any_stats = results[0] if results else None
        if any_stats is None:
            any_stats = kernels.group_stats_i64(keys, None, None)
        group_keys = list(any_stats.keys())
        group_values = [(k,) for k in group_keys]
        stats_by_agg = [
            [stats[k] for k in group_keys] for stats in results
        ]
        if not plan.aggs:
            stats_by_agg = []
        if not plan.group_by:
            raise AssertionError("fast path requires a group column")
        return group_values, stats_by_agg

    def _aggregate_generic(self, m):
        plan = self.plan
        key_cols = [
            self._alias_values(c.alias, c.name, c.type) for c in plan.group_by
        ]
        source_cols = []
        for spec in plan.aggs:
            if spec.source is None:
                source_cols.append(None)
            else:
                source_cols.append(
                    self._alias_values(spec.source.alias, spec.source.name, spec.source.type)
                )
        groups: dict = {}
        single_group = not plan.group_by
        for i in range(m):
            key = () if single_group else tuple(col[i] for col in key_cols)
            entry = groups.get(key)
            if entry is None:
                entry = groups[key] = [
                    [0, 0, 0, None, None] for _ in plan.aggs
                ] or [[0, 0, 0, None, None]]
            for a, col in enumerate(source_cols):
                s = entry[a] if plan.aggs else entry[0]
                s[0] += 1
                if col is None:
                    continue
                v = col[i]
                if v is None:
                    continue
                s[1] += 1
                s[2] += v
                if s[3] is None or v < s[3]:
                    s[3] = v
                if s[4] is None or v > s[4]:
                    s[4] = v
            if not plan.aggs:
                entry[0][0] += 1
        if single_group and not groups:
            groups[()] = [[0, 0, 0, None, None] for _ in plan.aggs] or [
                [0, 0, 0, None, None]
            ]
        group_values = list(groups.keys())
        stats_by_agg = [
            [groups[k][a] for k in group_values] for a in range(len(plan.aggs))
        ]
        return group_values, stats_by_agg

    # -- ordering --------------------------------------------------------------

    def _order_and_limit(self, rows):
        plan = self.plan
        if plan.order_by:
            n_items = len(plan.items)
            extra = 0
            key_positions = []
            for key in plan.order_by:
                if key.kind == "item":
                    key_positions.append((key.item_index, key.ascending))
                else:
                    key_positions.append((n_items + extra, key.ascending))
                    extra += 1
            for pos, ascending in reversed(key_positions):
                rows.sort(
                    key=lambda row: (row[pos] is None, row[pos] is not None and row[pos]),
                    reverse=not ascending,
                )
        if plan.limit is not None:
            rows = rows[: plan.limit]
        return rows


def _finish_agg(spec, stats):
    n_rows, n_nonnull, total, low, high = stats
    if spec.func == "COUNT":
        return n_rows if spec.source is None else n_nonnull
    if n_nonnull == 0:
        return None
    if spec.func == "AVG":
        return total / n_nonnull
    if spec.func == "SUM":
        return total if spec.source.type == schema.INT64 else float(total)
    return low if spec.func == "MIN" else high


def _combine_validity(*args):
    """AND together validity bitmaps; last positional arg is the row count."""
    *bitmaps, n = args
    present = [b for b in bitmaps if b is not None]
    if not present:
        return None
    if len(present) == 1:
        return present[0]
    out = bytearray(present[0])
    for other in present[1:]:
        for i in range(len(out)):
            out[i] &= other[i]
    return out


def _filter_text(values, validity, cond, indices, n):
    from ..kernels import pure

    op = OP_CODES[cond.op]
    it = range(n) if indices is None else indices
    out = array("q")
    lo = cond.operands[0] if cond.operands else None
    hi = cond.operands[1] if len(cond.operands) > 1 else None
    for i in it:
        valid = validity is None or (validity[i >> 3] >> (i & 7)) & 1
        if op == kernels.OP_ISNULL:
            if not valid:
                out.append(i)
        elif op == kernels.OP_NOTNULL:
            if valid:
                out.append(i)
        elif valid and pure._CMP[op](values[i], lo, hi):
            out.append(i)
    return out


def reading_position_pairs(snapshot, workplace_id=None, measurement=None):
    """Match sensor readings into workplace occupancy windows.

    Pairs a SENSOR_DATA row with every PRODUCTION_ORDER_POSITION row of the
    same workplace whose [ENTERED_AT, LEFT_AT] interval contains the reading's
    DATE (inclusive bounds; open positions match nothing). This is the join
    strategy behind BETWEEN-classified join predicates, exposed directly.

    Returns base-row index pairs (reading_row, position_row).
    """
    sensor_conds = []
    if workplace_id is not None:
        sensor_conds.append(("WORKPLACE_ID", "=", workplace_id))
    if measurement is not None:
        sensor_conds.append((measurement, "not_null"))
    readings = snapshot.scan("SENSOR_DATA", ["ID"], conds=sensor_conds or None)
    position_conds = (
        [("WORKPLACE_ID", "=", workplace_id)] if workplace_id is not None else None
    )
    positions = snapshot.scan("PRODUCTION_ORDER_POSITION", ["ID"], conds=position_conds)

    pos_idx = array("q", positions.indices)
    keys, key_valid, _ = snapshot.raw_column("PRODUCTION_ORDER_POSITION", "WORKPLACE_ID")
    enters, enter_valid, _ = snapshot.raw_column("PRODUCTION_ORDER_POSITION", "ENTERED_AT")
    leaves, leave_valid, _ = snapshot.raw_column("PRODUCTION_ORDER_POSITION", "LEFT_AT")
    part = kernels.build_interval_index(
        kernels.gather_i64(keys, pos_idx),
        kernels.gather_i64(enters, pos_idx),
        kernels.gather_i64(leaves, pos_idx),
        kernels.gather_bits(leave_valid, pos_idx),
    )
    read_idx = array("q", readings.indices)
    r_keys, r_key_valid, _ = snapshot.raw_column("SENSOR_DATA", "WORKPLACE_ID")
    r_times, r_time_valid, _ = snapshot.raw_column("SENSOR_DATA", "DATE")
    probe_pos, build_pos = kernels.interval_probe(
        *part,
        kernels.gather_i64(r_keys, read_idx),
        kernels.gather_bits(r_key_valid, read_idx),
        kernels.gather_i64(r_times, read_idx),
        kernels.gather_bits(r_time_valid, read_idx),
    )
    return [
        (read_idx[p], pos_idx[b]) for p, b in zip(probe_pos, build_pos)
    ]


def _zero_keys(n: int) -> array:
    return array("q", bytes(8 * n))


def _collect_refs(node, plan: Plan, out: list):
    if isinstance(node, BoolOp):
        for item in node.items:
            _collect_refs(item, plan, out)
        return
    refs = []
    if isinstance(node, Comparison):
        refs = [node.left] + ([node.right] if isinstance(node.right, ColumnRef) else [])
    elif isinstance(node, Between):
        refs = [node.subject] + [
            b for b in (node.low, node.high) if isinstance(b, ColumnRef)
        ]
    elif isinstance(node, NullTest):
        refs = [node.subject]
    for ref in refs:
        out.append(_resolve_in_plan(ref, plan))


def _resolve_in_plan(ref: ColumnRef, plan: Plan) -> ResolvedColumn:
    return plan.resolve_ref(ref)


def _eval_node(node, env, i, plan) -> bool:
    if isinstance(node, BoolOp):
        if node.op == "and":
            return all(_eval_node(item, env, i, plan) for item in node.items)
        return any(_eval_node(item, env, i, plan) for item in node.items)
    if isinstance(node, Comparison):
        left = _value_of(node.left, env, i, plan)
        right = (
            node.right.value
            if isinstance(node.right, Literal)
            else _value_of(node.right, env, i, plan)
        )
        if left is None or right is None:
            return False
        return _compare(node.op, left, right)
    if isinstance(node, Between):
        subject = _value_of(node.subject, env, i, plan)
        low = (
            node.low.value
            if isinstance(node.low, Literal)
            else _value_of(node.low, env, i, plan)
        )
        high = (
            node.high.value
            if isinstance(node.high, Literal)
            else _value_of(node.high, env, i, plan)
        )
        if subject is None or low is None or high is None:
            return False
        return low <= subject <= high
    if isinstance(node, NullTest):
        value = _value_of(node.subject, env, i, plan)
        return (value is not None) if node.negated else (value is None)
    raise TypeError(f"cannot evaluate {node!r}")


def _value_of(ref: ColumnRef, env, i, plan):
    col = _resolve_in_plan(ref, plan)
    return env[(col.alias, col.name)][i]


def _compare(op, left, right) -> bool:
    if op == "=":
        return left == right
    if op == "<>":
        return left != right
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    return left >= right
