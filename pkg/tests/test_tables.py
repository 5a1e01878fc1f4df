import pytest

from wedesign import tables


def test_reference_values_load_and_cover_all_tables():
    ref = tables.reference_values()
    for table_id in ("table1", "table2", "table3", "table4", "table5", "figure1"):
        assert table_id in ref


def test_unknown_table_id():
    with pytest.raises(KeyError):
        tables.reproduce("table9")


def test_table2_rows_shape_small_budget():
    rows = tables.reproduce_table2(replications=300, seed=2)
    designs = {r.row.split(" ")[0] for r in rows}
    assert designs == {"MAB", "FR", "WE_I(0.50)", "WE_II(0.55)", "WE_II(0.65)"}
    external = [r for r in rows if r.external]
    assert external and all(r.simulated is None for r in external)
    internal = [r for r in rows if not r.external]
    assert all(r.simulated is not None for r in internal)
    flagged = [r for r in rows if r.tolerance is not None]
    assert flagged and all(r.within_tolerance is not None for r in flagged)


def test_table3_rows_include_benchmark_and_externals():
    rows = tables.reproduce_table3(replications=400, seed=3)
    row_names = {r.row for r in rows}
    assert "scenario2-logistic we" in row_names
    assert "scenario2-logistic optimal" in row_names
    assert "scenario2-logistic crm" in row_names
    we_rows = [r for r in rows if r.row == "scenario1-linear we"]
    # seven selection cells plus term/tox/mean_n
    assert len(we_rows) == 10


def test_figure1_sweep_rows():
    rows = tables.reproduce_figure1(replications=150, seed=6)
    assert {r["trial"] for r in rows} == {"trial1", "trial2"}
    assert len(rows) == 2 * 5
    assert all(r["power"] is not None for r in rows)
