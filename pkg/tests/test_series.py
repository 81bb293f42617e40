import numpy as np
import pytest

from gapfill.errors import DataError
from gapfill.series import Series, detect_gaps, parse_csv, write_csv


def make_series(values):
    return Series.from_values(values)


class TestParseCsv:
    def test_scalar_column_with_empty_cell(self):
        s = parse_csv("value\n1.5\n\n2.5\n")
        assert s.dim == 1
        assert len(s) == 3
        assert s.value(1)[0] == 1.5
        assert s.value(2) is None
        assert s.missing_indices == (2,)

    def test_na_markers(self):
        s = parse_csv("v\n1\nNA\nNaN\n+\n4\n")
        assert s.missing_indices == (2, 3, 4)

    def test_custom_marker_replaces_default(self):
        s = parse_csv("v\n1\nmiss\n3\n", na_markers=("miss",))
        assert s.missing_indices == (2,)
        # 'NA' is no longer a marker, so it must fail as non-numeric
        with pytest.raises(DataError, match="non-numeric"):
            parse_csv("v\n1\nNA\n3\n", na_markers=("miss",))

    def test_marker_matching_strips_whitespace(self):
        s = parse_csv("v\n1\n  NA \n3\n")
        assert s.missing_indices == (2,)

    def test_vector_partial_row_counts_missing(self):
        s = parse_csv("a,b\n1,2\n3,+\n5,6\n")
        assert s.dim == 2
        assert s.missing_indices == (2,)

    def test_partial_row_still_validates_cells(self):
        with pytest.raises(DataError, match="non-numeric"):
            parse_csv("a,b\n1,2\njunk,+\n5,6\n")

    def test_column_selection(self):
        s = parse_csv("t,a,b\n1,10,20\n2,30,40\n", value_columns=["b"])
        assert s.dim == 1
        assert s.value(2)[0] == 40.0

    def test_unknown_column(self):
        with pytest.raises(DataError, match="unknown column"):
            parse_csv("a,b\n1,2\n", value_columns=["c"])

    def test_ragged_row(self):
        with pytest.raises(DataError, match="ragged row 2"):
            parse_csv("a,b\n1,2\n3\n")

    def test_non_numeric_cell(self):
        with pytest.raises(DataError, match="non-numeric value 'x'"):
            parse_csv("a\n1\nx\n")

    def test_non_finite_rejected_with_hint(self):
        with pytest.raises(DataError, match="non-finite"):
            parse_csv("a\n1\ninf\n")

    def test_all_missing_rejected(self):
        with pytest.raises(DataError, match="no observed values"):
            parse_csv("a\nNA\nNA\n")

    def test_empty_input(self):
        with pytest.raises(DataError):
            parse_csv("")

    def test_header_only(self):
        with pytest.raises(DataError, match="no data rows"):
            parse_csv("a,b\n")

    def test_tab_delimiter(self):
        s = parse_csv("a\tb\n1\t2\n", delimiter="\t")
        assert s.dim == 2

    def test_phosphate_fixture(self, phosphate_text):
        s = parse_csv(phosphate_text)
        assert s.dim == 2
        assert len(s) == 16
        assert s.missing_indices == (11, 12, 15)
        assert np.array_equal(s.value(13), [166.0, 68.0])


class TestDetectGaps:
    def test_fully_observed(self):
        prefix, gaps = detect_gaps(make_series([1.0, 2.0, 3.0]))
        assert prefix == 3
        assert gaps == []

    def test_single_gap(self):
        prefix, gaps = detect_gaps(make_series([1.0, 2.0, None, None, 5.0]))
        assert prefix == 2
        (g,) = gaps
        assert (g.gap_start, g.gap_end) == (3, 4)
        assert g.anchor_index == 5
        assert g.anchor_value[0] == 5.0
        assert g.seed_indices == (2,)
        assert g.length == 2
        assert g.constrained

    def test_seed_window_grows_with_order(self):
        _, gaps = detect_gaps(make_series([1.0, 2.0, 3.0, None, 5.0]), order=3)
        assert gaps[0].seed_indices == (1, 2, 3)

    def test_multiple_gaps_ordered(self):
        prefix, gaps = detect_gaps(make_series([1.0, None, 3.0, None, None, 6.0]))
        assert prefix == 1
        assert [(g.gap_start, g.gap_end) for g in gaps] == [(2, 2), (4, 5)]

    def test_seeds_may_point_into_earlier_gap(self):
        # order 2 seed window for the second gap includes index 2 (itself a gap)
        _, gaps = detect_gaps(make_series([1.0, 1.0, None, 4.0, None, 6.0]), order=2)
        assert gaps[1].seed_indices == (3, 4)
        _, gaps = detect_gaps(make_series([1.0, 1.0, None, None, 5.0, None, 7.0]), order=2)
        assert gaps[1].seed_indices == (4, 5)
        assert 4 in gaps[0].indices

    def test_leading_gap_rejected(self):
        with pytest.raises(DataError, match="begins with a missing value"):
            detect_gaps(make_series([None, 2.0, 3.0]))

    def test_short_seed_window_rejected(self):
        with pytest.raises(DataError, match="needs 3 seed values"):
            detect_gaps(make_series([1.0, 2.0, None, 4.0]), order=3)

    def test_trailing_gap_rejected_by_default(self):
        with pytest.raises(DataError, match="no anchor"):
            detect_gaps(make_series([1.0, 2.0, None]))

    def test_trailing_gap_allowed_when_open(self):
        prefix, gaps = detect_gaps(make_series([1.0, 2.0, None]), allow_open_gap=True)
        (g,) = gaps
        assert g.anchor_index is None
        assert g.anchor_value is None
        assert not g.constrained

    def test_phosphate_segmentation(self, phosphate_text):
        s = parse_csv(phosphate_text)
        prefix, gaps = detect_gaps(s)
        assert prefix == 10
        assert [(g.gap_start, g.gap_end) for g in gaps] == [(11, 12), (15, 15)]
        assert gaps[0].anchor_index == 13
        assert np.array_equal(gaps[0].anchor_value, [166.0, 68.0])
        assert gaps[1].anchor_index == 16
        assert np.array_equal(gaps[1].anchor_value, [68.0, 59.0])

    def test_partition_invariant_random(self):
        # gap indices plus observed indices partition 1..n, and every anchor
        # is the first observed index after its gap
        rng = np.random.default_rng(19)
        for _ in range(50):
            n = int(rng.integers(4, 30))
            values = [float(v) for v in rng.uniform(-5, 5, n)]
            for i in sorted(rng.choice(range(1, n - 1), size=min(n - 2, 5), replace=False)):
                if rng.uniform() < 0.5:
                    values[i] = None
            series = make_series(values)
            prefix, gaps = detect_gaps(series)
            gap_indices = [i for g in gaps for i in g.indices]
            assert sorted(gap_indices) == list(series.missing_indices)
            assert set(gap_indices).isdisjoint(series.observed_indices)
            for g in gaps:
                assert g.anchor_index == g.gap_end + 1
                assert series.value(g.anchor_index) is not None
            assert prefix == (series.missing_indices[0] - 1 if gap_indices else n)


class TestWriteCsv:
    def test_round_trip_gapless(self):
        text = "a,b\n1,2\n3,4\n"
        s = parse_csv(text)
        out = write_csv(s, {})
        assert out == "a,b,origin\n1,2,observed\n3,4,observed\n"

    def test_imputed_cells_formatted(self):
        s = parse_csv("v\n1\nNA\n3\n")
        out = write_csv(s, {2: np.array([2.0 / 3.0])}, precision=6)
        assert out.splitlines()[2] == "0.666667,imputed"

    def test_precision_controls_digits(self):
        s = parse_csv("v\n1\nNA\n3\n")
        out = write_csv(s, {2: np.array([2.0 / 3.0])}, precision=12)
        assert "0.666666666667,imputed" in out

    def test_observed_cells_echoed_verbatim(self):
        s = parse_csv("v\n1.50\nNA\n0003\n")
        lines = write_csv(s, {2: np.array([2.0])}).splitlines()
        assert lines[1] == "1.50,observed"
        assert lines[3] == "0003,observed"

    def test_missing_imputed_value_rejected(self):
        s = parse_csv("v\n1\nNA\n3\n")
        with pytest.raises(DataError, match="imputed value missing"):
            write_csv(s, {})

    def test_extraneous_imputed_value_rejected(self):
        s = parse_csv("v\n1\nNA\n3\n")
        with pytest.raises(DataError, match="observed index"):
            write_csv(s, {2: np.array([2.0]), 3: np.array([9.0])})

    def test_wrong_dimension_rejected(self):
        s = parse_csv("a,b\n1,2\n+,+\n5,6\n")
        with pytest.raises(DataError, match="components"):
            write_csv(s, {2: np.array([1.0])})

    def test_deterministic_bytes(self):
        s = parse_csv("a,b\n1,2\n+,+\n5,6\n")
        imputed = {2: np.array([3.3333333, 4.4444444])}
        assert write_csv(s, imputed) == write_csv(s, imputed)

    def test_precision_out_of_range(self):
        s = parse_csv("v\n1\n")
        with pytest.raises(ValueError, match="precision"):
            write_csv(s, {}, precision=0)


class TestSeriesConstruction:
    def test_from_values_vector(self):
        s = Series.from_values([np.array([1.0, 2.0]), None, np.array([3.0, 4.0])])
        assert s.dim == 2
        assert s.missing_indices == (2,)
        assert s.header == ("v1", "v2")

    def test_from_values_requires_observation(self):
        with pytest.raises(DataError, match="no observed values"):
            Series.from_values([None, None])

    def test_inconsistent_dimension_rejected(self):
        with pytest.raises(DataError, match="components"):
            Series.from_values([np.array([1.0, 2.0]), np.array([3.0])])
