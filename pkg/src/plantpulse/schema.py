"""Relational schema shared by the generators, the store, and the query engine.

Eleven business tables (ERP-style head/item pairs along the supplier ->
purchase -> production -> sales chain) plus one sparse sensor table. Column
names are upper-snake-case in every external representation (catalog, CSV
headers, SQL).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields
from types import MappingProxyType
from typing import Optional

# Milliseconds on the simulation clock; epoch = simulation start.
Timestamp = int

INT64 = "int64"
DECIMAL64 = "decimal64"
TEXT = "text"
TIMESTAMP = "timestamp"

MAX_TEXT_BYTES = 128


class UnknownTableError(ValueError):
    pass


class SensorKind(enum.Enum):
    TEMPERATURE = "temperature"
    NOISE = "noise"
    VIBRATION = "vibration"

    @property
    def unit(self) -> str:
        return _KIND_UNITS[self]

    @property
    def value_column(self) -> str:
        return f"{self.name}_VALUE"

    @property
    def unit_column(self) -> str:
        return f"{self.name}_UNIT"


_KIND_UNITS = {
    SensorKind.TEMPERATURE: "°C",
    SensorKind.NOISE: "dB",
    SensorKind.VIBRATION: "mm/s",
}


@dataclass(frozen=True, slots=True)
class Supplier:
    id: int
    name: str


@dataclass(frozen=True, slots=True)
class Customer:
    id: int
    name: str


@dataclass(frozen=True, slots=True)
class Product:
    id: int
    name: str


@dataclass(frozen=True, slots=True)
class Material:
    id: int
    name: str


@dataclass(frozen=True, slots=True)
class Workplace:
    id: int
    name: str


@dataclass(frozen=True, slots=True)
class PurchaseOrderHead:
    id: int
    supplier_id: int
    created_at: Timestamp


@dataclass(frozen=True, slots=True)
class PurchaseOrderItem:
    id: int
    head_id: int
    material_id: int
    quantity: int


@dataclass(frozen=True, slots=True)
class ProductionOrderHead:
    id: int
    product_id: int
    purchase_order_item_id: int
    sales_order_item_id: Optional[int]
    released_at: Timestamp
    finished_at: Optional[Timestamp]


@dataclass(frozen=True, slots=True)
class ProductionOrderPosition:
    id: int
    head_id: int
    workplace_id: int
    seq_no: int
    entered_at: Timestamp
    left_at: Optional[Timestamp]


@dataclass(frozen=True, slots=True)
class SalesOrderHead:
    id: int
    customer_id: int
    created_at: Timestamp


@dataclass(frozen=True, slots=True)
class SalesOrderItem:
    id: int
    head_id: int
    product_id: int
    quantity: int


@dataclass(frozen=True, slots=True)
class SensorReading:
    id: int
    workplace_id: int
    sensor_id: int
    date: Timestamp
    temperature_value: Optional[float] = None
    temperature_unit: Optional[str] = None
    noise_value: Optional[float] = None
    noise_unit: Optional[str] = None
    vibration_value: Optional[float] = None
    vibration_unit: Optional[str] = None


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    type: str
    nullable: bool


def _cols(*specs: tuple[str, str] | tuple[str, str, bool]) -> tuple[ColumnSpec, ...]:
    return tuple(
        ColumnSpec(s[0], s[1], s[2] if len(s) > 2 else False) for s in specs
    )


_MASTER_COLUMNS = _cols(("ID", INT64), ("NAME", TEXT))

_CATALOG: dict[str, tuple[ColumnSpec, ...]] = {
    "SUPPLIER": _MASTER_COLUMNS,
    "CUSTOMER": _MASTER_COLUMNS,
    "PRODUCT": _MASTER_COLUMNS,
    "MATERIAL": _MASTER_COLUMNS,
    "WORKPLACE": _MASTER_COLUMNS,
    "PURCHASE_ORDER_HEAD": _cols(
        ("ID", INT64), ("SUPPLIER_ID", INT64), ("CREATED_AT", TIMESTAMP)
    ),
    "PURCHASE_ORDER_ITEM": _cols(
        ("ID", INT64), ("HEAD_ID", INT64), ("MATERIAL_ID", INT64), ("QUANTITY", INT64)
    ),
    "PRODUCTION_ORDER_HEAD": _cols(
        ("ID", INT64),
        ("PRODUCT_ID", INT64),
        ("PURCHASE_ORDER_ITEM_ID", INT64),
        ("SALES_ORDER_ITEM_ID", INT64, True),
        ("RELEASED_AT", TIMESTAMP),
        ("FINISHED_AT", TIMESTAMP, True),
    ),
    "PRODUCTION_ORDER_POSITION": _cols(
        ("ID", INT64),
        ("HEAD_ID", INT64),
        ("WORKPLACE_ID", INT64),
        ("SEQ_NO", INT64),
        ("ENTERED_AT", TIMESTAMP),
        ("LEFT_AT", TIMESTAMP, True),
    ),
    "SALES_ORDER_HEAD": _cols(
        ("ID", INT64), ("CUSTOMER_ID", INT64), ("CREATED_AT", TIMESTAMP)
    ),
    "SALES_ORDER_ITEM": _cols(
        ("ID", INT64), ("HEAD_ID", INT64), ("PRODUCT_ID", INT64), ("QUANTITY", INT64)
    ),
    "SENSOR_DATA": _cols(
        ("ID", INT64),
        ("WORKPLACE_ID", INT64),
        ("SENSOR_ID", INT64),
        ("DATE", TIMESTAMP),
        ("TEMPERATURE_VALUE", DECIMAL64, True),
        ("TEMPERATURE_UNIT", TEXT, True),
        ("NOISE_VALUE", DECIMAL64, True),
        ("NOISE_UNIT", TEXT, True),
        ("VIBRATION_VALUE", DECIMAL64, True),
        ("VIBRATION_UNIT", TEXT, True),
    ),
}

# Row class per table; dataclass field order matches the catalog column order.
ROW_TYPES = {
    "SUPPLIER": Supplier,
    "CUSTOMER": Customer,
    "PRODUCT": Product,
    "MATERIAL": Material,
    "WORKPLACE": Workplace,
    "PURCHASE_ORDER_HEAD": PurchaseOrderHead,
    "PURCHASE_ORDER_ITEM": PurchaseOrderItem,
    "PRODUCTION_ORDER_HEAD": ProductionOrderHead,
    "PRODUCTION_ORDER_POSITION": ProductionOrderPosition,
    "SALES_ORDER_HEAD": SalesOrderHead,
    "SALES_ORDER_ITEM": SalesOrderItem,
    "SENSOR_DATA": SensorReading,
}

# column -> referenced table; nullable FKs are checked only when set.
FOREIGN_KEYS: dict[str, tuple[tuple[str, str], ...]] = {
    "PURCHASE_ORDER_HEAD": (("SUPPLIER_ID", "SUPPLIER"),),
    "PURCHASE_ORDER_ITEM": (("HEAD_ID", "PURCHASE_ORDER_HEAD"), ("MATERIAL_ID", "MATERIAL")),
    "PRODUCTION_ORDER_HEAD": (
        ("PRODUCT_ID", "PRODUCT"),
        ("PURCHASE_ORDER_ITEM_ID", "PURCHASE_ORDER_ITEM"),
        ("SALES_ORDER_ITEM_ID", "SALES_ORDER_ITEM"),
    ),
    "PRODUCTION_ORDER_POSITION": (
        ("HEAD_ID", "PRODUCTION_ORDER_HEAD"),
        ("WORKPLACE_ID", "WORKPLACE"),
    ),
    "SALES_ORDER_HEAD": (("CUSTOMER_ID", "CUSTOMER"),),
    "SALES_ORDER_ITEM": (("HEAD_ID", "SALES_ORDER_HEAD"), ("PRODUCT_ID", "PRODUCT")),
    "SENSOR_DATA": (("WORKPLACE_ID", "WORKPLACE"),),
}

# Tables in an order where parents precede children; appending batches in this
# order keeps referential checks satisfiable within one commit.
TABLE_ORDER = (
    "SUPPLIER",
    "CUSTOMER",
    "PRODUCT",
    "MATERIAL",
    "WORKPLACE",
    "PURCHASE_ORDER_HEAD",
    "PURCHASE_ORDER_ITEM",
    "SALES_ORDER_HEAD",
    "SALES_ORDER_ITEM",
    "PRODUCTION_ORDER_HEAD",
    "PRODUCTION_ORDER_POSITION",
    "SENSOR_DATA",
)

_MEASUREMENT_COLUMNS = (
    ("TEMPERATURE_VALUE", "TEMPERATURE_UNIT"),
    ("NOISE_VALUE", "NOISE_UNIT"),
    ("VIBRATION_VALUE", "VIBRATION_UNIT"),
)

# Columns where a strictly positive value is required.
_POSITIVE_COLUMNS = {"ID", "QUANTITY", "SEQ_NO"}


def catalog() -> MappingProxyType:
    """Table name -> ordered column specs for all 12 tables. Pure and stable."""
    return MappingProxyType(_CATALOG)


def stream_class(table: str) -> str:
    return "sensor" if table == "SENSOR_DATA" else "business"


def row_values(row) -> tuple:
    """Flatten a row dataclass into catalog column order."""
    return tuple(getattr(row, f.name) for f in fields(row))


def _type_ok(value, col_type: str) -> bool:
    if col_type in (INT64, TIMESTAMP):
        return isinstance(value, int) and not isinstance(value, bool)
    if col_type == DECIMAL64:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    return isinstance(value, str)


def validate_row(table: str, values) -> list[str]:
    """Check one row (values in column order) against the table's invariants.

    Returns every violation found; an empty list means the row is acceptable.
    Referential checks need a store and happen at append time instead.
    """
    try:
        columns = _CATALOG[table]
    except KeyError:
        raise UnknownTableError(f"unknown table {table!r}") from None

    violations: list[str] = []
    if len(values) != len(columns):
        violations.append(
            f"arity: expected {len(columns)} values, got {len(values)}"
        )
        return violations

    named = dict(zip((c.name for c in columns), values))
    for col, value in zip(columns, values):
        if value is None:
            if not col.nullable:
                violations.append(f"null-value: {col.name} is not nullable")
            continue
        if not _type_ok(value, col.type):
            violations.append(
                f"type-mismatch: {col.name} expects {col.type}, got {type(value).__name__}"
            )
            continue
        if col.type == TIMESTAMP and value < 0:
            violations.append(f"negative-timestamp: {col.name} = {value}")
        elif col.name in _POSITIVE_COLUMNS and value < 1:
            violations.append(f"non-positive: {col.name} = {value}")
        elif col.type == TEXT and len(value.encode("utf-8")) > MAX_TEXT_BYTES:
            violations.append(f"text-too-long: {col.name} exceeds {MAX_TEXT_BYTES} bytes")

    if table == "SENSOR_DATA":
        populated = [
            (vc, uc) for vc, uc in _MEASUREMENT_COLUMNS if named.get(vc) is not None
        ]
        if len(populated) != 1:
            violations.append(
                f"exactly-one-measurement: {len(populated)} measurement values populated"
            )
        for vc, uc in _MEASUREMENT_COLUMNS:
            has_value, has_unit = named.get(vc) is not None, named.get(uc) is not None
            if has_value != has_unit:
                violations.append(f"unit-pairing: {vc}/{uc} must be set together")

    if table == "PRODUCTION_ORDER_POSITION":
        entered, left = named.get("ENTERED_AT"), named.get("LEFT_AT")
        if (
            isinstance(entered, int)
            and isinstance(left, int)
            and left < entered
        ):
            violations.append(f"interval-order: LEFT_AT {left} precedes ENTERED_AT {entered}")

    return violations
