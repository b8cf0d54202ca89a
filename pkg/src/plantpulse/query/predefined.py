"""The two shipped queries, expressed in the supported SQL subset.

Both are plain text so the UI can load them into the editor for adaptation;
"recent" is spelled as LIMIT 10 over finished orders, latest leave time first.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class PredefinedQuery:
    name: str
    description: str
    sql: str


RECENT_PRODUCTS_CUTTING = PredefinedQuery(
    name="recent-products-cutting",
    description=(
        "Average temperature and noise at the Cutting Machine for the ten "
        "most recently finished production orders."
    ),
    sql=(
        "SELECT H.ID AS PRODUCTION_ORDER, "
        "AVG(S.TEMPERATURE_VALUE) AS AVG_TEMP, "
        "AVG(S.NOISE_VALUE) AS AVG_NOISE\n"
        "FROM SENSOR_DATA S\n"
        "JOIN PRODUCTION_ORDER_POSITION P "
        "ON S.WORKPLACE_ID = P.WORKPLACE_ID "
        "AND S.DATE BETWEEN P.ENTERED_AT AND P.LEFT_AT\n"
        "JOIN WORKPLACE W ON P.WORKPLACE_ID = W.ID\n"
        "JOIN PRODUCTION_ORDER_HEAD H ON P.HEAD_ID = H.ID\n"
        "WHERE W.NAME = 'Cutting Machine' AND H.FINISHED_AT IS NOT NULL\n"
        "GROUP BY H.ID\n"
        "ORDER BY MAX(P.LEFT_AT) DESC\n"
        "LIMIT 10"
    ),
)

VIBRATION_BY_SUPPLIER = PredefinedQuery(
    name="vibration-by-supplier",
    description=(
        "Average vibration at the Assembly workplace, grouped by the "
        "supplier of the raw-material lot each order consumed."
    ),
    sql=(
        "SELECT SU.NAME AS SUPPLIER, AVG(S.VIBRATION_VALUE) AS AVG_VIBRATION\n"
        "FROM SENSOR_DATA S\n"
        "JOIN PRODUCTION_ORDER_POSITION P "
        "ON S.WORKPLACE_ID = P.WORKPLACE_ID "
        "AND S.DATE BETWEEN P.ENTERED_AT AND P.LEFT_AT\n"
        "JOIN WORKPLACE W ON P.WORKPLACE_ID = W.ID\n"
        "JOIN PRODUCTION_ORDER_HEAD H ON P.HEAD_ID = H.ID\n"
        "JOIN PURCHASE_ORDER_ITEM POI ON H.PURCHASE_ORDER_ITEM_ID = POI.ID\n"
        "JOIN PURCHASE_ORDER_HEAD POH ON POI.HEAD_ID = POH.ID\n"
        "JOIN SUPPLIER SU ON POH.SUPPLIER_ID = SU.ID\n"
        "WHERE W.NAME = 'Assembly'\n"
        "GROUP BY SU.NAME\n"
        "ORDER BY SU.NAME"
    ),
)


def predefined() -> list[PredefinedQuery]:
    return [RECENT_PRODUCTS_CUTTING, VIBRATION_BY_SUPPLIER]
