import pytest

from plantpulse import schema
from plantpulse.query.parser import parse
from plantpulse.query.planner import PlanError, plan
from plantpulse.query.predefined import RECENT_PRODUCTS_CUTTING, VIBRATION_BY_SUPPLIER

CATALOG = schema.catalog()


def make_plan(sql):
    return plan(parse(sql), CATALOG)


class TestResolution:
    def test_unknown_column_names_the_identifier(self):
        with pytest.raises(PlanError) as err:
            make_plan("SELECT NOPE FROM WORKPLACE")
        assert "NOPE" in str(err.value)

    def test_unknown_table(self):
        with pytest.raises(PlanError) as err:
            make_plan("SELECT ID FROM NOWHERE")
        assert "NOWHERE" in str(err.value)

    def test_unknown_alias(self):
        with pytest.raises(PlanError):
            make_plan("SELECT Z.ID FROM WORKPLACE W")

    def test_duplicate_alias(self):
        with pytest.raises(PlanError):
            make_plan("SELECT W.ID FROM WORKPLACE W JOIN SUPPLIER W ON W.ID = W.ID")

    def test_ambiguous_column(self):
        with pytest.raises(PlanError) as err:
            make_plan("SELECT NAME FROM SUPPLIER S JOIN CUSTOMER C ON S.ID = C.ID")
        assert "ambiguous" in str(err.value)

    def test_semantic_error_carries_offset(self):
        sql = "SELECT NOPE FROM WORKPLACE"
        with pytest.raises(PlanError) as err:
            make_plan(sql)
        assert err.value.offset == sql.index("NOPE")


class TestTypeRules:
    def test_avg_on_text_rejected(self):
        with pytest.raises(PlanError) as err:
            make_plan("SELECT AVG(NAME) FROM SUPPLIER")
        assert "AVG" in str(err.value)

    def test_text_vs_number_comparison_rejected(self):
        with pytest.raises(PlanError):
            make_plan("SELECT ID FROM SUPPLIER WHERE NAME = 7")

    def test_number_vs_text_join_rejected(self):
        with pytest.raises(PlanError):
            make_plan(
                "SELECT S.ID FROM SUPPLIER S JOIN CUSTOMER C ON S.ID = C.NAME"
            )

    def test_min_max_on_text_allowed(self):
        make_plan("SELECT MIN(NAME) FROM SUPPLIER")


class TestGroupingRules:
    def test_ungrouped_column_rejected(self):
        with pytest.raises(PlanError) as err:
            make_plan("SELECT NAME, COUNT(*) FROM SUPPLIER")
        assert "GROUP BY" in str(err.value)

    def test_grouped_column_accepted(self):
        p = make_plan("SELECT NAME, COUNT(*) FROM SUPPLIER GROUP BY NAME")
        assert len(p.group_by) == 1

    def test_order_by_ungrouped_column_rejected(self):
        with pytest.raises(PlanError):
            make_plan("SELECT COUNT(*) FROM SUPPLIER GROUP BY NAME ORDER BY ID")

    def test_order_by_select_alias(self):
        p = make_plan(
            "SELECT WORKPLACE_ID, AVG(NOISE_VALUE) AS LOUDNESS FROM SENSOR_DATA "
            "GROUP BY WORKPLACE_ID ORDER BY LOUDNESS DESC"
        )
        assert p.order_by[0].kind == "item"
        assert p.order_by[0].item_index == 1


class TestJoinClassification:
    def test_equality_becomes_hash_key(self):
        p = make_plan(
            "SELECT S.ID FROM SENSOR_DATA S JOIN WORKPLACE W ON S.WORKPLACE_ID = W.ID"
        )
        (step,) = p.joins
        assert len(step.equi) == 1
        assert step.interval is None
        assert step.equi[0].probe.alias == "S"
        assert step.equi[0].build.alias == "W"

    def test_between_becomes_interval(self):
        p = make_plan(
            "SELECT S.ID FROM SENSOR_DATA S JOIN PRODUCTION_ORDER_POSITION P "
            "ON S.WORKPLACE_ID = P.WORKPLACE_ID AND S.DATE BETWEEN P.ENTERED_AT AND P.LEFT_AT"
        )
        (step,) = p.joins
        assert len(step.equi) == 1
        assert step.interval is not None
        assert step.interval.time.name == "DATE"
        assert not step.interval.time_on_new

    def test_reversed_interval_orientation(self):
        p = make_plan(
            "SELECT S.ID FROM PRODUCTION_ORDER_POSITION P JOIN SENSOR_DATA S "
            "ON S.WORKPLACE_ID = P.WORKPLACE_ID AND S.DATE BETWEEN P.ENTERED_AT AND P.LEFT_AT"
        )
        (step,) = p.joins
        assert step.interval is not None
        assert step.interval.time_on_new

    def test_literal_conjuncts_pushed_to_scans(self):
        p = make_plan(
            "SELECT S.ID FROM SENSOR_DATA S JOIN WORKPLACE W "
            "ON S.WORKPLACE_ID = W.ID WHERE W.NAME = 'Assembly' AND S.DATE >= 100"
        )
        assert len(p.scan_conds["W"]) == 1
        assert len(p.scan_conds["S"]) == 1
        assert p.where_residual is None

    def test_or_tree_stays_residual(self):
        p = make_plan(
            "SELECT ID FROM SENSOR_DATA WHERE DATE < 5 OR SENSOR_ID = 1"
        )
        assert p.scan_conds["SENSOR_DATA"] == []
        assert p.where_residual is not None

    def test_predefined_query_two_plans_six_joins(self):
        p = plan(parse(VIBRATION_BY_SUPPLIER.sql), CATALOG)
        assert len(p.joins) == 6
        assert p.joins[0].interval is not None
        assert all(step.equi for step in p.joins[1:])
        assert [c.name for c in p.group_by] == ["NAME"]

    def test_predefined_query_one_plans(self):
        p = plan(parse(RECENT_PRODUCTS_CUTTING.sql), CATALOG)
        assert len(p.joins) == 3
        assert p.joins[0].interval is not None
        # hidden aggregate for ORDER BY MAX(P.LEFT_AT)
        assert any(a.func == "MAX" for a in p.aggs)
        assert p.limit == 10
