"""Embedded in-memory columnar store.

Append-only typed column vectors with validity bitmaps, snapshot-consistent
reads concurrent with ingestion, and per-stream ingestion-rate metering.

Concurrency contract: one writer at a time (enforced with a lock), any number
of readers. A snapshot is a per-table high-water mark; batches become visible
atomically when their commit publishes new counts. The only in-place writes
are the simulator's fill-ins (LEFT_AT, FINISHED_AT, SALES_ORDER_ITEM_ID),
applied under the writer lock and versioned only at batch boundaries.
"""

from __future__ import annotations

import csv
import sys
import threading
import time
from array import array
from bisect import bisect_left
from dataclasses import dataclass

from . import kernels, schema
from .kernels import OP_CODES, OP_BETWEEN, OP_ISNULL, OP_NOTNULL


class StoreError(Exception):
    pass


class DuplicateTableError(StoreError):
    pass


class UnknownColumnError(StoreError):
    pass


class PredicateTypeError(StoreError):
    pass


class CapacityError(StoreError):
    pass


class ValidationError(StoreError):
    def __init__(self, table: str, violations: list[str]):
        super().__init__(f"{table}: " + "; ".join(violations))
        self.table = table
        self.violations = violations


class ReferentialError(StoreError):
    pass


DEFAULT_MAX_ROWS = 50_000_000


def _bit(validity, i):
    return (validity[i >> 3] >> (i & 7)) & 1


class _Column:
    """One typed value vector plus its validity bitmap."""

    __slots__ = ("spec", "data", "validity", "_intern")

    def __init__(self, spec: schema.ColumnSpec):
        self.spec = spec
        if spec.type in (schema.INT64, schema.TIMESTAMP):
            self.data = array("q")
        elif spec.type == schema.DECIMAL64:
            self.data = array("d")
        else:
            self.data = []
            self._intern = {}
        self.validity = bytearray()

    @property
    def is_text(self):
        return self.spec.type == schema.TEXT

    def extend(self, values, start: int):
        """Append values (None = null); bits are set from ``start``."""
        n_new = start + len(values)
        need = (n_new + 7) >> 3
        if len(self.validity) < need:
            self.validity.extend(b"\x00" * (need - len(self.validity)))
        validity = self.validity
        if self.is_text:
            intern = self._intern
            data = self.data
            i = start
            for v in values:
                if v is None:
                    data.append(None)
                else:
                    data.append(intern.setdefault(v, v))
                    validity[i >> 3] |= 1 << (i & 7)
                i += 1
        else:
            data = self.data
            i = start
            for v in values:
                if v is None:
                    data.append(0)
                else:
                    data.append(v)
                    validity[i >> 3] |= 1 << (i & 7)
                i += 1

    def truncate(self, n: int):
        del self.data[n:]
        keep = (n + 7) >> 3
        del self.validity[keep:]
        if n & 7:
            self.validity[-1] &= (1 << (n & 7)) - 1

    def set_value(self, i: int, value):
        if value is None:
            self.data[i] = None if self.is_text else 0
            self.validity[i >> 3] &= ~(1 << (i & 7)) & 0xFF
        else:
            self.data[i] = value
            self.validity[i >> 3] |= 1 << (i & 7)

    def value_at(self, i: int):
        if not _bit(self.validity, i):
            return None
        return self.data[i]

    def memory_bytes(self) -> int:
        if self.is_text:
            pointers = 8 * len(self.data)
            strings = sum(sys.getsizeof(s) for s in self._intern)
            return pointers + strings + len(self.validity)
        return len(self.data) * self.data.itemsize + len(self.validity)


class Table:
    __slots__ = ("name", "columns", "by_name", "committed", "id_index")

    def __init__(self, name: str, specs):
        self.name = name
        self.columns = [_Column(s) for s in specs]
        self.by_name = {c.spec.name: c for c in self.columns}
        self.committed = 0
        # position of the ID column, if the schema has one (all ours do)
        self.id_index = next(
            (k for k, c in enumerate(self.columns) if c.spec.name == "ID"), None
        )

    @property
    def pending(self) -> int:
        return len(self.columns[0].data)

    def id_exists(self, value: int) -> bool:
        """Membership test against committed + pending rows; IDs are sorted."""
        ids = self.columns[self.id_index].data
        pos = bisect_left(ids, value)
        return pos < len(ids) and ids[pos] == value

    def row_index_for_id(self, value: int) -> int:
        ids = self.columns[self.id_index].data
        pos = bisect_left(ids, value)
        if pos >= len(ids) or ids[pos] != value:
            raise StoreError(f"{self.name}: no row with ID {value}")
        return pos

    def memory_bytes(self) -> int:
        return sum(c.memory_bytes() for c in self.columns)


class RateMeter:
    """Sliding-window rows/second counter for one ingestion stream class.

    Buckets are wall-clock seconds; the reported rate averages the last
    ``window_s`` full seconds, excluding the current partial one.
    """

    def __init__(self, window_s: int = 10, now_fn=time.monotonic):
        self.window_s = window_s
        self._now = now_fn
        self._ring = [[-1, 0] for _ in range(window_s + 1)]
        self._total = 0
        self._lock = threading.Lock()

    def credit(self, count: int):
        sec = int(self._now())
        with self._lock:
            slot = self._ring[sec % len(self._ring)]
            if slot[0] != sec:
                slot[0] = sec
                slot[1] = 0
            slot[1] += count
            self._total += count

    def rate(self) -> float:
        sec = int(self._now())
        lo = sec - self.window_s
        with self._lock:
            total = sum(c for s, c in self._ring if lo <= s < sec)
        return total / self.window_s

    def total(self) -> int:
        with self._lock:
            return self._total


@dataclass(frozen=True)
class ScanResult:
    indices: list[int]
    columns: dict[str, list]

    def __len__(self):
        return len(self.indices)


class Snapshot:
    """Immutable per-table visible row counts; the unit queries execute on.

    Column reads copy the visible prefix once and cache it, so repeated reads
    within one snapshot observe identical data even while ingestion continues.
    """

    def __init__(self, store: "ColumnStore", counts: dict[str, int], acquired_at: float):
        self._store = store
        self.counts = counts
        self.acquired_at = acquired_at
        self._cache: dict = {}

    def row_count(self, table: str) -> int:
        return self.counts[table]

    def table_names(self):
        return list(self.counts)

    def schema_of(self, table: str):
        return [c.spec for c in self._store._table(table).columns]

    def raw_column(self, table: str, name: str):
        """(vector copy, validity copy or None, n) for kernel consumption."""
        key = (table, name)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        tab = self._store._table(table)
        col = tab.by_name.get(name)
        if col is None:
            raise UnknownColumnError(f"{table} has no column {name}")
        n = self.counts[table]
        values = col.data[:n]
        validity = None if not col.spec.nullable else bytes(col.validity[: (n + 7) >> 3])
        entry = (values, validity, n)
        self._cache[key] = entry
        return entry

    def column_values(self, table: str, name: str, indices=None) -> list:
        """Materialize python values (None = null) for export and tests."""
        values, validity, n = self.raw_column(table, name)
        it = range(n) if indices is None else indices
        if validity is None:
            return [values[i] for i in it]
        return [values[i] if _bit(validity, i) else None for i in it]

    def scan(self, table: str, columns=None, conds=None) -> ScanResult:
        """Insertion-ordered values of ``columns`` for rows passing ``conds``.

        ``conds`` is a list of (column, op, operand[, operand2]) tuples with
        op in =, <>, <, <=, >, >=, between, is_null, not_null; conditions are
        ANDed and pushed down column by column.
        """
        tab = self._store._table(table)
        if columns is None:
            columns = [c.spec.name for c in tab.columns]
        n = self.counts[table]
        indices = None
        for cond in conds or []:
            indices = self._apply_cond(table, cond, indices, n)
        out_indices = list(range(n)) if indices is None else list(indices)
        data = {name: self.column_values(table, name, out_indices) for name in columns}
        return ScanResult(out_indices, data)

    def _apply_cond(self, table, cond, indices, n):
        name, op_str = cond[0], cond[1]
        op = OP_CODES.get(op_str)
        if op is None:
            raise PredicateTypeError(f"unknown operator {op_str!r}")
        values, validity, _ = self.raw_column(table, name)
        col_type = self._store._table(table).by_name[name].spec.type
        operands = cond[2:]
        if op in (OP_ISNULL, OP_NOTNULL):
            lo = hi = 0
        else:
            expected = 2 if op == OP_BETWEEN else 1
            if len(operands) != expected:
                raise PredicateTypeError(f"{op_str} expects {expected} operand(s)")
            for o in operands:
                if col_type == schema.TEXT:
                    if not isinstance(o, str):
                        raise PredicateTypeError(f"{name} is text, got {o!r}")
                elif not isinstance(o, (int, float)) or isinstance(o, bool):
                    raise PredicateTypeError(f"{name} is numeric, got {o!r}")
            lo = operands[0]
            hi = operands[1] if op == OP_BETWEEN else 0
        if col_type == schema.TEXT:
            return self._filter_text(values, validity, op, lo, hi, indices, n)
        if col_type == schema.DECIMAL64:
            return kernels.filter_f64(values, validity, op, lo, hi, indices)
        return kernels.filter_i64(values, validity, op, lo, hi, indices)

    @staticmethod
    def _filter_text(values, validity, op, lo, hi, indices, n):
        from .kernels import pure

        it = range(n) if indices is None else indices
        out = array("q")
        for i in it:
            valid = validity is None or _bit(validity, i)
            if op == OP_ISNULL:
                if not valid:
                    out.append(i)
            elif op == OP_NOTNULL:
                if valid:
                    out.append(i)
            elif valid and pure._CMP[op](values[i], lo, hi):
                out.append(i)
        return out


class ColumnStore:
    """Create tables, append validated batches, read via snapshots."""

    def __init__(self, max_total_rows: int = DEFAULT_MAX_ROWS, now_fn=time.monotonic):
        self._tables: dict[str, Table] = {}
        self._write_lock = threading.RLock()
        self._commit_lock = threading.Lock()
        self._total_rows = 0
        self.max_total_rows = max_total_rows
        self.meters = {
            "business": RateMeter(now_fn=now_fn),
            "sensor": RateMeter(now_fn=now_fn),
        }

    # -- schema ------------------------------------------------------------

    def create_table(self, name: str, specs) -> Table:
        specs = tuple(specs)
        if not specs:
            raise StoreError("empty schema")
        with self._write_lock:
            if name in self._tables:
                raise DuplicateTableError(f"table {name} already exists")
            tab = Table(name, specs)
            self._tables[name] = tab
            return tab

    @classmethod
    def with_catalog(cls, **kwargs) -> "ColumnStore":
        store = cls(**kwargs)
        for name, specs in schema.catalog().items():
            store.create_table(name, specs)
        return store

    def _table(self, name: str) -> Table:
        tab = self._tables.get(name)
        if tab is None:
            raise schema.UnknownTableError(f"unknown table {name!r}")
        return tab

    def table_names(self):
        return list(self._tables)

    def schema_of(self, table: str):
        return [c.spec for c in self._table(table).columns]

    # -- writes ------------------------------------------------------------

    def append(self, table: str, rows):
        """Append one validated batch atomically; returns the first row's ID."""
        return self.apply_batch([(table, rows)], [])

    def apply_batch(self, appends, updates=()):
        """Apply appends (in the given table order) plus fill-in updates as
        one atomic commit. Everything is validated before any count publishes;
        on validation failure the pending rows are rolled back and nothing
        becomes visible.
        """
        with self._write_lock:
            total_new = sum(len(rows) for _, rows in appends)
            if self._total_rows + total_new > self.max_total_rows:
                raise CapacityError(
                    f"row cap {self.max_total_rows} would be exceeded"
                )
            touched: list[Table] = []
            first_id = None
            try:
                for name, rows in appends:
                    tab = self._table(name)
                    if not rows:
                        continue
                    rows = [
                        schema.row_values(r) if not isinstance(r, (tuple, list)) else r
                        for r in rows
                    ]
                    self._validate_batch(tab, rows)
                    if tab not in touched:
                        touched.append(tab)
                    start = tab.pending
                    for k, col in enumerate(tab.columns):
                        col.extend([row[k] for row in rows], start)
                    if first_id is None and tab.id_index is not None:
                        first_id = rows[0][tab.id_index]
                self._validate_updates(updates)
            except Exception:
                for tab in touched:
                    for col in tab.columns:
                        col.truncate(tab.committed)
                raise
            for name, row_id, column, value in updates:
                tab = self._table(name)
                tab.by_name[column].set_value(tab.row_index_for_id(row_id), value)
            self._commit(touched)
            return first_id

    def _commit(self, touched):
        business = sensor = 0
        with self._commit_lock:
            for tab in touched:
                new = tab.pending - tab.committed
                tab.committed = tab.pending
                self._total_rows += new
                if schema.stream_class(tab.name) == "sensor":
                    sensor += new
                else:
                    business += new
        if business:
            self.meters["business"].credit(business)
        if sensor:
            self.meters["sensor"].credit(sensor)

    def _validate_batch(self, tab: Table, rows):
        name = tab.name
        ncols = len(tab.columns)
        violations: list[str] = []
        for idx, row in enumerate(rows):
            if len(row) != ncols:
                violations.append(f"row {idx}: arity {len(row)} != {ncols}")
        if violations:
            raise ValidationError(name, violations)
        columns = [[row[k] for row in rows] for k in range(ncols)]
        for k, col in enumerate(tab.columns):
            spec = col.spec
            for idx, v in enumerate(columns[k]):
                if v is None:
                    if not spec.nullable:
                        violations.append(f"row {idx}: null-value: {spec.name}")
                elif not schema._type_ok(v, spec.type):
                    violations.append(
                        f"row {idx}: type-mismatch: {spec.name} expects {spec.type}"
                    )
                elif spec.type == schema.TIMESTAMP and v < 0:
                    violations.append(f"row {idx}: negative-timestamp: {spec.name}")
                elif spec.name in schema._POSITIVE_COLUMNS and v < 1:
                    violations.append(f"row {idx}: non-positive: {spec.name}")
                elif (
                    spec.type == schema.TEXT
                    and len(v.encode("utf-8")) > schema.MAX_TEXT_BYTES
                ):
                    violations.append(f"row {idx}: text-too-long: {spec.name}")
        if name == "SENSOR_DATA":
            by = {c.spec.name: columns[k] for k, c in enumerate(tab.columns)}
            pairs = list(
                zip(
                    by["TEMPERATURE_VALUE"],
                    by["NOISE_VALUE"],
                    by["VIBRATION_VALUE"],
                )
            )
            for idx, (t, nz, vb) in enumerate(pairs):
                if (t is not None) + (nz is not None) + (vb is not None) != 1:
                    violations.append(f"row {idx}: exactly-one-measurement")
            for vc, uc in (
                ("TEMPERATURE_VALUE", "TEMPERATURE_UNIT"),
                ("NOISE_VALUE", "NOISE_UNIT"),
                ("VIBRATION_VALUE", "VIBRATION_UNIT"),
            ):
                for idx, (v, u) in enumerate(zip(by[vc], by[uc])):
                    if (v is None) != (u is None):
                        violations.append(f"row {idx}: unit-pairing: {vc}/{uc}")
        if name == "PRODUCTION_ORDER_POSITION":
            entered = columns[4]
            left = columns[5]
            for idx in range(len(rows)):
                if (
                    isinstance(left[idx], int)
                    and isinstance(entered[idx], int)
                    and left[idx] < entered[idx]
                ):
                    violations.append(f"row {idx}: interval-order")
        if violations:
            raise ValidationError(name, violations)

        if tab.id_index is not None:
            ids = columns[tab.id_index]
            last = (
                tab.columns[tab.id_index].data[tab.pending - 1] if tab.pending else 0
            )
            for idx, v in enumerate(ids):
                if not isinstance(v, int) or v <= last:
                    raise ValidationError(
                        name, [f"row {idx}: non-monotonic ID {v!r} after {last}"]
                    )
                last = v
        for col_name, parent in schema.FOREIGN_KEYS.get(name, ()):
            k = next(
                i for i, c in enumerate(tab.columns) if c.spec.name == col_name
            )
            parent_tab = self._table(parent)
            for v in set(columns[k]):
                if v is not None and not parent_tab.id_exists(v):
                    raise ReferentialError(
                        f"{name}.{col_name} = {v} has no row in {parent}"
                    )

    def _validate_updates(self, updates):
        for name, row_id, column, value in updates:
            tab = self._table(name)
            col = tab.by_name.get(column)
            if col is None:
                raise UnknownColumnError(f"{name} has no column {column}")
            tab.row_index_for_id(row_id)
            if value is None:
                if not col.spec.nullable:
                    raise ValidationError(name, [f"null-value: {column}"])
            elif not schema._type_ok(value, col.spec.type):
                raise ValidationError(name, [f"type-mismatch: {column}"])
            for col_name, parent in schema.FOREIGN_KEYS.get(name, ()):
                if col_name == column and value is not None:
                    if not self._table(parent).id_exists(value):
                        raise ReferentialError(
                            f"{name}.{column} = {value} has no row in {parent}"
                        )

    # -- reads -------------------------------------------------------------

    def snapshot(self) -> Snapshot:
        with self._commit_lock:
            counts = {name: tab.committed for name, tab in self._tables.items()}
        return Snapshot(self, counts, time.time())

    def ingest_rate(self, stream_class: str) -> float:
        return self.meters[stream_class].rate()

    def total_rows(self, stream_class: str | None = None) -> int:
        with self._commit_lock:
            if stream_class is None:
                return self._total_rows
            return sum(
                tab.committed
                for name, tab in self._tables.items()
                if schema.stream_class(name) == stream_class
            )

    def memory_bytes(self, table: str) -> int:
        return self._table(table).memory_bytes()

    # -- export ------------------------------------------------------------

    def export_csv(self, snapshot: Snapshot, table: str, fileobj):
        """RFC-4180 CSV: header row, empty field = null, timestamps as ms."""
        specs = self.schema_of(table)
        writer = csv.writer(fileobj)
        writer.writerow([s.name for s in specs])
        n = snapshot.row_count(table)
        cols = [snapshot.column_values(table, s.name) for s in specs]
        for i in range(n):
            writer.writerow(
                ["" if col[i] is None else col[i] for col in cols]
            )
