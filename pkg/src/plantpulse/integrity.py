"""Full-scan invariant verification over a snapshot.

Used by the test harness after fuzzed API runs: checks referential integrity
of every foreign key, the one-measurement-per-row rule, ID monotonicity, and
per-order position interval ordering. Returns human-readable violations;
an empty list means the snapshot is clean.
"""

from __future__ import annotations

from . import schema


def verify_integrity(snapshot) -> list[str]:
    violations: list[str] = []

    for table, fks in schema.FOREIGN_KEYS.items():
        for column, parent in fks:
            parent_ids = set(snapshot.column_values(parent, "ID"))
            values = snapshot.column_values(table, column)
            for i, value in enumerate(values):
                if value is not None and value not in parent_ids:
                    violations.append(
                        f"{table}.{column} row {i}: {value} not in {parent}"
                    )

    for table in snapshot.table_names():
        ids = snapshot.column_values(table, "ID")
        for i in range(1, len(ids)):
            if ids[i] <= ids[i - 1]:
                violations.append(f"{table}: ID not strictly increasing at row {i}")

    result = snapshot.scan(
        "SENSOR_DATA",
        ["TEMPERATURE_VALUE", "TEMPERATURE_UNIT", "NOISE_VALUE", "NOISE_UNIT",
         "VIBRATION_VALUE", "VIBRATION_UNIT"],
    )
    cols = result.columns
    for i in range(len(result.indices)):
        measurements = [
            (cols["TEMPERATURE_VALUE"][i], cols["TEMPERATURE_UNIT"][i]),
            (cols["NOISE_VALUE"][i], cols["NOISE_UNIT"][i]),
            (cols["VIBRATION_VALUE"][i], cols["VIBRATION_UNIT"][i]),
        ]
        populated = [m for m in measurements if m[0] is not None]
        if len(populated) != 1:
            violations.append(f"SENSOR_DATA row {i}: {len(populated)} measurements")
        for value, unit in measurements:
            if (value is None) != (unit is None):
                violations.append(f"SENSOR_DATA row {i}: unit pairing broken")

    positions = snapshot.scan(
        "PRODUCTION_ORDER_POSITION",
        ["HEAD_ID", "SEQ_NO", "ENTERED_AT", "LEFT_AT"],
    )
    per_head: dict[int, list[tuple]] = {}
    for i in range(len(positions.indices)):
        per_head.setdefault(positions.columns["HEAD_ID"][i], []).append(
            (
                positions.columns["SEQ_NO"][i],
                positions.columns["ENTERED_AT"][i],
                positions.columns["LEFT_AT"][i],
            )
        )
    for head_id, rows in per_head.items():
        rows.sort()
        for seq, entered, left in rows:
            if left is not None and left < entered:
                violations.append(
                    f"PRODUCTION_ORDER_POSITION head {head_id} seq {seq}: left < entered"
                )
        for (s1, e1, l1), (s2, e2, l2) in zip(rows, rows[1:]):
            if l1 is not None and e2 < l1:
                violations.append(
                    f"PRODUCTION_ORDER_POSITION head {head_id}: "
                    f"seq {s2} enters before seq {s1} leaves"
                )

    finished = snapshot.scan("PRODUCTION_ORDER_HEAD", ["ID", "FINISHED_AT"])
    all_left = {
        head: all(left is not None for _, _, left in rows)
        for head, rows in per_head.items()
    }
    for i in range(len(finished.indices)):
        head = finished.columns["ID"][i]
        done = finished.columns["FINISHED_AT"][i] is not None
        if done and not all_left.get(head, False):
            violations.append(
                f"PRODUCTION_ORDER_HEAD {head}: finished but a position is open"
            )

    return violations
