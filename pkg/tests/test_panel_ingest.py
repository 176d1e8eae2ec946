import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atrisk.errors import AlignmentError, DomainError, ParseError, SchemaError
from atrisk.fredmd import COUNTER_CYCLICAL, DEFAULT_EXCLUSIONS, SECTOR_OF
from atrisk.months import month_range, parse_month
from atrisk.panel import (
    CsvSchema, RawPanel, apply_tcode, classify_cyclicality, cyclical_correlations, exclude_and_align,
    parse_csv, read_target_csv, shift_target, write_csv,
)

from .synthetic import make_panel


def write(tmp_path, text, name="panel.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


SMALL = """sasdate,A,B,C
Transform:,1,2,5
1/1/2000,1,10,1
2/1/2000,2,11,2
3/1/2000,3,12,4
4/1/2000,4,13,8
5/1/2000,5,14,16
6/1/2000,6,15,32
7/1/2000,7,16,64
8/1/2000,8,17,128
9/1/2000,9,18,256
10/1/2000,10,19,512
11/1/2000,11,20,1024
12/1/2000,12,21,2048
"""


class TestMonths:
    @pytest.mark.parametrize("text,expected", [
        ("1/1/1960", "1960-01"), ("12/1/2024", "2024-12"), ("1990-03", "1990-03"), ("1990-03-01", "1990-03"),
    ])
    def test_formats(self, text, expected):
        assert parse_month(text) == expected

    @pytest.mark.parametrize("text", ["", "13/1/2000", "2000-13", "Jan 2000", "Transform:"])
    def test_rejects(self, text):
        with pytest.raises(ValueError):
            parse_month(text)


class TestParseCsv:
    def test_small_file(self, tmp_path):
        raw = parse_csv(write(tmp_path, SMALL), CsvSchema(target_column=None))
        assert len(raw.series) == 3 and len(raw.dates) == 12
        assert raw.tcodes == {"A": 1, "B": 2, "C": 5}
        assert raw.dates[0] == "2000-01" and raw.dates[-1] == "2000-12"

    def test_empty_cells_are_missing(self, tmp_path):
        raw = parse_csv(write(tmp_path, SMALL.replace("1/1/2000,1,10,1", "1/1/2000,,10,1")))
        assert math.isnan(raw.series["A"][0])

    def test_tcode_eight_names_series(self, tmp_path):
        with pytest.raises(SchemaError, match="'C'"):
            parse_csv(write(tmp_path, SMALL.replace("Transform:,1,2,5", "Transform:,1,2,8")))

    def test_missing_tcode_row(self, tmp_path):
        text = "\n".join(l for l in SMALL.splitlines() if not l.startswith("Transform"))
        with pytest.raises(SchemaError, match="transform-code row"):
            parse_csv(write(tmp_path, text))

    def test_malformed_date_reports_row(self, tmp_path):
        with pytest.raises(ParseError, match="row 5"):
            parse_csv(write(tmp_path, SMALL.replace("3/1/2000", "March 2000")))

    def test_non_numeric_reports_coordinates(self, tmp_path):
        with pytest.raises(ParseError, match=r"row 4, column 'B'"):
            parse_csv(write(tmp_path, SMALL.replace("2/1/2000,2,11,2", "2/1/2000,2,x,2")))

    def test_gap_in_months(self, tmp_path):
        with pytest.raises(ParseError, match="does not follow"):
            parse_csv(write(tmp_path, SMALL.replace("3/1/2000,3,12,4\n", "")))

    def test_target_column_popped(self, tmp_path):
        text = SMALL.replace("sasdate,A,B,C", "sasdate,A,B,C,USREC").replace("Transform:,1,2,5", "Transform:,1,2,5,")
        lines = text.splitlines()
        text = "\n".join(lines[:2] + [l + ",0" for l in lines[2:]])
        raw = parse_csv(write(tmp_path, text))
        assert "USREC" not in raw.series and raw.target.tolist() == [0.0] * 12

    def test_custom_tcode_row(self, tmp_path):
        text = SMALL.replace("Transform:,1,2,5", "Factors:,1,1,1\nTransform:,1,2,5")
        raw = parse_csv(write(tmp_path, text), CsvSchema(tcode_row=2))
        assert raw.tcodes["C"] == 5 and len(raw.dates) == 12

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=6, max_size=6))
    def test_round_trip_is_bitwise(self, tmp_path_factory, cells):
        tmp = tmp_path_factory.mktemp("rt")
        dates = tuple(month_range("1999-11", "2000-01"))
        raw = RawPanel(
            dates=dates,
            series={"A": np.array(cells[:3]), "B": np.array(cells[3:])},
            tcodes={"A": 1, "B": 7},
            target=np.array([0.0, 1.0, 0.0]),
        )
        write_csv(raw, tmp / "out.csv")
        back = parse_csv(tmp / "out.csv")
        assert back.dates == dates and back.tcodes == raw.tcodes
        for sid in raw.series:
            assert back.series[sid].tobytes() == raw.series[sid].tobytes()
        assert back.target.tobytes() == raw.target.tobytes()

    def test_target_file(self, tmp_path):
        path = write(tmp_path, "DATE,USREC\n2000-01-01,0\n2000-02-01,1\n", "usrec.csv")
        dates, y = read_target_csv(path)
        assert dates == ("2000-01", "2000-02") and y.tolist() == [0.0, 1.0]


class TestApplyTcode:
    def test_log_difference_of_doubling(self):
        out = apply_tcode([1, 2, 4], 5)
        assert math.isnan(out[0]) and out[1:] == pytest.approx([math.log(2)] * 2, abs=0)

    def test_constant_first_difference(self):
        out = apply_tcode([5, 5, 5], 2)
        assert math.isnan(out[0]) and out[1:].tolist() == [0.0, 0.0]

    def test_second_log_difference_matches_composition(self):
        x = np.array([1.0, 2.0, 4.0, 8.0])
        out = apply_tcode(x, 6)
        lx = [math.log(v) for v in x]
        d1 = [lx[t] - lx[t - 1] for t in range(1, 4)]
        d2 = [d1[t] - d1[t - 1] for t in range(1, 3)]
        assert np.isnan(out[:2]).all() and out[2:].tolist() == d2
        assert out[2:] == pytest.approx([0.0, 0.0], abs=1e-15)

    def test_leading_missing_counts(self):
        x = np.arange(1.0, 8.0)
        for code, lead in {1: 0, 2: 1, 3: 2, 4: 0, 5: 1, 6: 2, 7: 2}.items():
            out = apply_tcode(x, code)
            assert len(out) == len(x)
            assert np.isnan(out[:lead]).all() and not np.isnan(out[lead:]).any()

    def test_growth_rate_change(self):
        x = np.array([1.0, 2.0, 3.0, 6.0])
        out = apply_tcode(x, 7)
        assert out[2:].tolist() == [(3 / 2 - 1) - (2 / 1 - 1), (6 / 3 - 1) - (3 / 2 - 1)]

    def test_growth_rate_tolerates_negative_levels(self):
        assert np.isfinite(apply_tcode([-2.0, -1.0, 3.0], 7)[2])

    @pytest.mark.parametrize("code", [4, 5, 6])
    def test_log_domain_error_names_series_and_date(self, code):
        with pytest.raises(DomainError, match=r"HOUST.*2000-02"):
            apply_tcode([1.0, 0.0, 2.0], code, name="HOUST", dates=["2000-01", "2000-02", "2000-03"])

    @given(st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=30))
    def test_identity_and_double_difference(self, xs):
        x = np.array(xs)
        assert apply_tcode(x, 1).tobytes() == x.tobytes()
        composed = apply_tcode(apply_tcode(x, 2), 2)
        np.testing.assert_array_equal(apply_tcode(x, 3), composed)


def raw_from(columns: dict, tcodes=None, start="2000-01"):
    n = len(next(iter(columns.values())))
    dates = tuple(month_range(start, "2100-01")[:n])
    series = {k: np.asarray(v, dtype=float) for k, v in columns.items()}
    return RawPanel(dates, series, tcodes or {k: 1 for k in columns})


class TestExcludeAndAlign:
    def test_default_exclusions_drop_four_of_126(self):
        ids = [sid for sid in SECTOR_OF if sid not in DEFAULT_EXCLUSIONS][:122] + list(DEFAULT_EXCLUSIONS)
        assert len(ids) == 126
        rng = np.random.default_rng(0)
        raw = raw_from({sid: rng.normal(size=24) for sid in ids})
        panel = exclude_and_align(raw, target=np.zeros(24))
        assert panel.values.shape == (24, 122)

    def test_unknown_exclusion_warns(self, caplog):
        raw = raw_from({"INDPRO": [1.0, 2.0, 3.0]})
        with caplog.at_level(logging.WARNING):
            panel = exclude_and_align(raw, ["NOPE"], target=np.zeros(3))
        assert "NOPE" in caplog.text and panel.ids == ["INDPRO"]

    def test_disjoint_support(self):
        nan = np.nan
        raw = raw_from({"INDPRO": [1, 2, nan, nan], "HOUST": [nan, nan, 3, 4]})
        with pytest.raises(AlignmentError):
            exclude_and_align(raw, [], target=np.zeros(4))

    def test_window_is_maximal(self):
        nan = np.nan
        raw = raw_from({"INDPRO": [nan, 1, 2, 3, 4, 5], "HOUST": [1, 2, 3, 4, 5, nan]}, {"INDPRO": 2, "HOUST": 1})
        panel = exclude_and_align(raw, [], target=np.zeros(6))
        # INDPRO differenced: valid from index 2; HOUST valid to index 4
        assert panel.dates == raw.dates[2:5]
        assert not np.isnan(panel.values).any()

    def test_interior_gap_rejected(self):
        raw = raw_from({"INDPRO": [1, 2, np.nan, 4, 5]})
        with pytest.raises(AlignmentError, match="interior"):
            exclude_and_align(raw, [], target=np.zeros(5))

    def test_unknown_sector_needs_mapping(self):
        raw = raw_from({"MYSERIES": [1.0, 2.0]})
        with pytest.raises(SchemaError):
            exclude_and_align(raw, [], target=np.zeros(2))
        panel = exclude_and_align(raw, [], target=np.zeros(2), sectors={"MYSERIES": "Housing"})
        assert panel.meta[0].sector.value == "Housing"


class TestCyclicality:
    def setup_method(self):
        rng = np.random.default_rng(3)
        self.y = (rng.random(120) < 0.2).astype(int)
        self.noise = rng.normal(scale=0.3, size=120)

    def test_copy_of_target_is_procyclical(self):
        panel = make_panel(self.y[:, None].astype(float), self.y)
        meta = classify_cyclicality(panel, panel.dates[-1], overrides={})
        assert cyclical_correlations(panel, panel.dates[-1])[0] == pytest.approx(1.0)
        assert meta[0].sign == 1

    def test_negative_correlation_flips(self):
        x = -self.y + self.noise
        panel = make_panel(x[:, None], self.y)
        corr = np.corrcoef(x, self.y)[0, 1]
        assert corr < -0.5
        assert cyclical_correlations(panel, panel.dates[-1])[0] == pytest.approx(corr, abs=1e-12)
        assert classify_cyclicality(panel, panel.dates[-1], overrides={})[0].sign == -1

    def test_only_training_rows_are_used(self):
        x = np.where(np.arange(120) < 60, -self.y + self.noise, self.y + self.noise)
        panel = make_panel(x[:, None], self.y)
        assert classify_cyclicality(panel, panel.dates[59], overrides={})[0].sign == -1

    def test_zero_variance_defaults_positive(self, caplog):
        panel = make_panel(np.ones((120, 1)), self.y)
        with caplog.at_level(logging.WARNING):
            assert classify_cyclicality(panel, panel.dates[-1], overrides={})[0].sign == 1
        assert "zero variance" in caplog.text

    def test_overrides_win(self):
        panel = make_panel(self.y[:, None].astype(float), self.y)
        meta = classify_cyclicality(panel, panel.dates[-1], overrides={"S00": -1})
        assert meta[0].sign == -1

    def test_default_overrides(self):
        assert "UNRATE" in COUNTER_CYCLICAL and "CLAIMSx" in COUNTER_CYCLICAL
        assert len(COUNTER_CYCLICAL) == 10

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0.01, 100), st.floats(-100, 100))
    def test_affine_invariance(self, a, b):
        x = -self.y + self.noise
        p1 = make_panel(x[:, None], self.y)
        p2 = make_panel((a * x + b)[:, None], self.y)
        c1 = cyclical_correlations(p1, p1.dates[-1])[0]
        c2 = cyclical_correlations(p2, p2.dates[-1])[0]
        assert c2 == pytest.approx(c1, abs=1e-9)


class TestShiftTarget:
    def test_unit_shift(self):
        origins, labels = shift_target([0, 0, 1, 1], 1)
        assert origins.tolist() == [0, 1, 2] and labels.tolist() == [0, 1, 1]

    def test_horizon_equal_length(self):
        origins, labels = shift_target([0, 1, 0], 3)
        assert origins.size == 0 and labels.size == 0

    @pytest.mark.parametrize("h", [0, -1])
    def test_nonpositive_horizon(self, h):
        with pytest.raises(ValueError):
            shift_target([0, 1], h)

    def test_full_sample_window_count(self):
        # targets Jan 1990..Dec 2024 at h=3 means origins Oct 1989..Sep 2024
        dates = month_range("1960-01", "2024-12")
        y = np.zeros(len(dates))
        origins, _ = shift_target(y, 3)
        lo, hi = dates.index("1989-10"), dates.index("2024-09")
        assert sum(1 for o in origins if lo <= o <= hi) == 420
