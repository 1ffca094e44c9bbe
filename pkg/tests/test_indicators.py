import numpy as np
import pytest

from ppgap import IngestionError, SpecError, encode_dataset, parse_spec, parse_spec_document
from ppgap.indicators import IndicatorSpec, load_dataset, normalize_weights, read_csv


def test_weights_normalize():
    specs = parse_spec("indicators:\n"
                       "  - {name: a, kind: cardinal, cutoff_z: 1, weight_w: 1}\n"
                       "  - {name: b, kind: cardinal, cutoff_z: 1, weight_w: 1}\n")
    assert [s.weight_w for s in specs] == [0.5, 0.5]
    four = [IndicatorSpec(f"x{j}", "cardinal", 1.0) for j in range(4)]
    assert [s.weight_w for s in normalize_weights(four)] == [0.25] * 4


def test_normalize_is_idempotent():
    specs = normalize_weights([IndicatorSpec("a", "cardinal", 1, 3.0),
                               IndicatorSpec("b", "cardinal", 1, 7.0)])
    again = normalize_weights(specs)
    assert [s.weight_w for s in again] == [s.weight_w for s in specs]


@pytest.mark.parametrize("cutoff", [0, 3, "earth"])
def test_trivial_cutoff_rejected(cutoff):
    with pytest.raises(SpecError, match="trivial cutoff"):
        IndicatorSpec("floor", "ordinal", cutoff, categories=("earth", "wood planks", "ceramic"))


def test_category_codes_follow_declared_order():
    spec = IndicatorSpec("floor", "ordinal", "ceramic",
                         categories=("earth", "wood planks", "ceramic"))
    assert spec.encode_value("wood planks") == 1.0
    assert spec.threshold == 2.0


def test_semiorder_groups_share_a_code():
    spec = IndicatorSpec("water", "ordinal", "piped",
                         categories=("none", ["well", "rain"], "piped"))
    assert spec.encode_value("well") == spec.encode_value("rain") == 1.0


def test_duplicate_and_unknown_fields():
    with pytest.raises(SpecError, match="duplicate"):
        IndicatorSpec("w", "ordinal", 1, categories=("a", "a", "b"))
    with pytest.raises(SpecError, match="unknown indicator fields"):
        parse_spec("indicators:\n  - {name: a, kind: cardinal, cutoff_z: 1, colour: red}\n")
    with pytest.raises(SpecError):
        parse_spec("indicators: []\n")
    with pytest.raises(SpecError):
        parse_spec("indicators:\n  - {name: a, kind: cardinal, cutoff_z: 1, weight_w: 0}\n")


def test_lower_is_better_flip_preserves_order():
    spec = IndicatorSpec("gap", "cardinal", 3.0, direction="lower-is-better")
    raw = [5.0, 0.0, 2.5, 3.0, 7.0, 2.5]
    enc = [spec.encode_value(v) for v in raw]
    # Brute-force rank comparison: every pair reverses, ties stay ties.
    for a in range(len(raw)):
        for b in range(len(raw)):
            assert (raw[a] < raw[b]) == (enc[a] > enc[b])
            assert (raw[a] == raw[b]) == (enc[a] == enc[b])
    # Deprivation (worse than the cutoff) is preserved: raw > 3 means deprived.
    assert [e < spec.threshold for e in enc] == [v > 3.0 for v in raw]


def test_missing_cell_policies():
    specs = parse_spec("indicators:\n"
                       "  - {name: a, kind: ordinal, categories: [lo, mid, hi], cutoff_z: mid}\n"
                       "  - {name: b, kind: cardinal, cutoff_z: 5}\n")
    rows = [{"a": "hi", "b": "7"}, {"a": "", "b": "2"}, {"a": "mid", "b": "NA"}]
    with pytest.raises(IngestionError, match=r"row 2, column 'a'"):
        encode_dataset(rows, specs)
    dropped = encode_dataset(rows, specs, missing_policy="drop-row")
    assert dropped.n == 1
    filled = encode_dataset(rows, specs, missing_policy="treat-as-most-deprived")
    np.testing.assert_array_equal(filled.values, [[2, 7], [0, 2], [1, 2]])
    assert filled.missing.tolist() == [[False, False], [True, False], [False, True]]


def test_unknown_category_names_row_and_column():
    specs = parse_spec("indicators:\n  - {name: a, kind: ordinal, categories: [x, y], cutoff_z: y}\n")
    with pytest.raises(IngestionError, match=r"row 1, column 'a'.*'z'"):
        encode_dataset([{"a": "z"}], specs)


def test_survey_weights_and_subgroups(tmp_path):
    text = ("indicators:\n  - {name: a, kind: cardinal, cutoff_z: 1}\n"
            "survey_weight_column: wt\nsubgroup_column: g\n")
    doc = parse_spec_document(text)
    path = tmp_path / "d.csv"
    path.write_text("a,wt,g\n0,2.5,u\n3,1,r\n")
    data = load_dataset(path, doc)
    assert data.survey_weight.tolist() == [2.5, 1.0]
    assert data.subgroup.tolist() == ["u", "r"]
    assert data.label == "d"
    path.write_text("a,wt,g\n0,-1,u\n")
    with pytest.raises(IngestionError, match="positive"):
        load_dataset(path, doc)


def test_read_csv_round_trip(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("a,b\n1,x\n2,y\n")
    assert read_csv(path) == [{"a": "1", "b": "x"}, {"a": "2", "b": "y"}]
