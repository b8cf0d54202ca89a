"""Shared store fixtures for query-engine tests."""

import random

from plantpulse.store import ColumnStore


def master_rows(store, suppliers=("Steelworks AG", "Precision Alloys GmbH")):
    store.append("SUPPLIER", [(i + 1, name) for i, name in enumerate(suppliers)])
    store.append("CUSTOMER", [(1, "Atlas Motors")])
    store.append("PRODUCT", [(1, "Engine A"), (2, "Engine B")])
    store.append("MATERIAL", [(1, "Steel Billet")])
    store.append(
        "WORKPLACE",
        [(1, "Cutting Machine"), (2, "Assembly"), (3, "Milling Machine"), (4, "Quality Check")],
    )


def temp_reading(row_id, workplace, date, value, sensor=1):
    return (row_id, workplace, sensor, date, value, "°C", None, None, None, None)


def vibration_reading(row_id, workplace, date, value, sensor=3):
    return (row_id, workplace, sensor, date, None, None, None, None, value, "mm/s")


def three_reading_fixture() -> ColumnStore:
    """One finished order at the Cutting Machine, three readings inside its
    window (values 10/20/30 at t=100/150/200) and one just outside (99 at 201)."""
    store = ColumnStore.with_catalog()
    master_rows(store)
    store.append("PURCHASE_ORDER_HEAD", [(1, 1, 0)])
    store.append("PURCHASE_ORDER_ITEM", [(1, 1, 1, 10)])
    store.append("PRODUCTION_ORDER_HEAD", [(1, 1, 1, None, 100, 200)])
    store.append("PRODUCTION_ORDER_POSITION", [(1, 1, 1, 1, 100, 200)])
    store.append(
        "SENSOR_DATA",
        [
            temp_reading(1, 1, 100, 10.0),
            temp_reading(2, 1, 150, 20.0),
            temp_reading(3, 1, 200, 30.0),
            temp_reading(4, 1, 201, 99.0),
        ],
    )
    return store


def two_supplier_fixture() -> ColumnStore:
    """Two orders at Assembly fed by suppliers A and B; vibration readings
    2 and 4 fall into A's window, 6 into B's."""
    store = ColumnStore.with_catalog()
    master_rows(store, suppliers=("A", "B"))
    store.append("PURCHASE_ORDER_HEAD", [(1, 1, 0), (2, 2, 0)])
    store.append("PURCHASE_ORDER_ITEM", [(1, 1, 1, 10), (2, 2, 1, 10)])
    store.append(
        "PRODUCTION_ORDER_HEAD",
        [(1, 1, 1, None, 0, 100), (2, 1, 2, None, 200, 300)],
    )
    store.append(
        "PRODUCTION_ORDER_POSITION",
        [(1, 1, 2, 1, 0, 100), (2, 2, 2, 1, 200, 300)],
    )
    store.append(
        "SENSOR_DATA",
        [
            vibration_reading(1, 2, 10, 2.0),
            vibration_reading(2, 2, 50, 4.0),
            vibration_reading(3, 2, 250, 6.0),
        ],
    )
    return store


def random_dataset(seed: int, n_readings: int = 2000, n_heads: int = 40) -> ColumnStore:
    """Randomized but invariant-clean dataset for oracle equivalence tests."""
    rng = random.Random(seed)
    store = ColumnStore.with_catalog()
    master_rows(store, suppliers=("A", "B", "C"))

    heads = []
    items = []
    po_heads = []
    for h in range(1, n_heads + 1):
        po_heads.append((h, rng.randrange(1, 4), rng.randrange(0, 1000)))
        items.append((h, h, 1, rng.randrange(1, 20)))
        heads.append((h, rng.randrange(1, 3), h, None, rng.randrange(0, 1000), None))
    store.append("PURCHASE_ORDER_HEAD", po_heads)
    store.append("PURCHASE_ORDER_ITEM", items)
    store.append("PRODUCTION_ORDER_HEAD", heads)

    positions = []
    pos_id = 1
    horizon = 100_000
    for h in range(1, n_heads + 1):
        t = rng.randrange(0, horizon // 2)
        for seq in range(1, rng.randrange(1, 4)):
            duration = rng.randrange(1, 5000)
            left = None if rng.random() < 0.15 else t + duration
            positions.append((pos_id, h, rng.randrange(1, 5), seq, t, left))
            pos_id += 1
            t += duration + rng.randrange(0, 2000)
    store.append("PRODUCTION_ORDER_POSITION", positions)

    readings = []
    kinds = [
        ("TEMPERATURE", 4, 5, lambda: rng.uniform(10, 90)),
        ("NOISE", 6, 7, lambda: rng.uniform(40, 100)),
        ("VIBRATION", 8, 9, lambda: rng.uniform(0, 10)),
    ]
    for r in range(1, n_readings + 1):
        row = [r, rng.randrange(1, 5), rng.randrange(1, 7), rng.randrange(0, horizon),
               None, None, None, None, None, None]
        _, vi, ui, draw = kinds[rng.randrange(3)]
        row[vi] = draw()
        row[ui] = "u"
        readings.append(tuple(row))
    store.append("SENSOR_DATA", readings)
    return store
