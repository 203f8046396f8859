import io
import math

import numpy as np
import pytest

from kbnet import (
    PanelError,
    ReturnPanel,
    TimeSeriesPanel,
    WindowSpec,
    load_panel,
    load_weights,
    log_returns,
    make_windows,
    moving_average,
    write_panel,
)


def csv_text(labels, rows, timestamps=None):
    lines = ["date," + ",".join(labels)]
    for t, row in enumerate(rows):
        ts = timestamps[t] if timestamps else str(t)
        lines.append(ts + "," + ",".join(str(v) for v in row))
    return "\n".join(lines) + "\n"


class TestLoadPanel:
    def test_three_series_600_rows(self, rng):
        text = csv_text(["a", "b", "c"], rng.uniform(1, 2, size=(600, 3)).tolist())
        panel = load_panel(text)
        assert panel.n_nodes == 3
        assert panel.n_obs == 600
        assert panel.labels == ("a", "b", "c")

    def test_constant_column_accepted(self):
        rows = [[1.0, 5.0], [2.0, 5.0], [3.0, 5.0], [4.0, 5.0]]
        panel = load_panel(csv_text(["a", "b"], rows))
        assert np.all(panel.values[:, 1] == 5.0)

    def test_repeated_timestamp_rejected(self):
        text = csv_text(["a", "b"], [[1, 1]] * 4, timestamps=["0", "1", "1", "2"])
        with pytest.raises(PanelError, match="non-increasing timestamps"):
            load_panel(text)

    def test_non_numeric_cell(self):
        text = "date,a,b\n0,1.0,2.0\n1,oops,2.0\n2,1.0,2.0\n3,1.0,2.0\n"
        with pytest.raises(PanelError, match="non-numeric"):
            load_panel(text)

    def test_duplicate_label(self):
        with pytest.raises(PanelError, match="duplicate label"):
            load_panel(csv_text(["a", "a"], [[1, 2]] * 4))

    def test_missing_value_strict(self):
        text = "date,a,b\n0,1.0,2.0\n1,,2.0\n2,1.0,2.0\n3,1.0,2.0\n"
        with pytest.raises(PanelError, match="missing value"):
            load_panel(text, missing="strict")

    def test_missing_value_ffill(self):
        text = "date,a,b\n0,1.0,2.0\n1,,2.0\n2,3.0,2.0\n3,1.0,2.0\n"
        panel = load_panel(text, missing="ffill")
        assert panel.values[1, 0] == 1.0

    def test_ffill_drops_leading_incomplete_rows(self):
        text = "date,a,b\n0,,2.0\n1,1.0,2.0\n2,3.0,2.0\n3,1.0,2.0\n4,2.0,2.0\n"
        panel = load_panel(text, missing="ffill")
        assert panel.n_obs == 4
        assert panel.timestamps[0] == "1"

    def test_iso_dates(self):
        rows = [[1.0, 2.0]] * 4
        ts = ["2020-01-0%d" % d for d in range(1, 5)]
        panel = load_panel(csv_text(["a", "b"], rows, timestamps=ts))
        assert panel.timestamps == tuple(ts)

    def test_file_path(self, tmp_path, rng):
        p = tmp_path / "panel.csv"
        p.write_text(csv_text(["a", "b"], rng.uniform(1, 2, size=(10, 2)).tolist()))
        assert load_panel(str(p)).n_obs == 10

    def test_round_trip_byte_identical(self, rng):
        panel = TimeSeriesPanel(
            labels=("a", "b"),
            timestamps=tuple(str(t) for t in range(20)),
            values=rng.uniform(1, 2, size=(20, 2)),
        )
        text = write_panel(panel)
        assert write_panel(load_panel(text)) == text


class TestLogReturns:
    def test_exponential_column(self):
        e = math.e
        rows = np.array([[1.0, 2.0], [e, 2.0], [e * e, 2.0], [e**3, 2.0]])
        panel = TimeSeriesPanel(("a", "b"), ("0", "1", "2", "3"), rows)
        ret = log_returns(panel)
        assert ret.values[:, 0] == pytest.approx([1.0, 1.0, 1.0], abs=1e-12)

    def test_constant_column_zero_returns(self):
        rows = np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0], [5.0, 4.0]])
        ret = log_returns(TimeSeriesPanel(("a", "b"), ("0", "1", "2", "3"), rows))
        assert np.all(ret.values[:, 0] == 0.0)

    def test_direct_value(self):
        rows = np.array([[100.0, 1.0], [90.0, 1.0], [90.0, 1.0], [90.0, 1.0]])
        ret = log_returns(TimeSeriesPanel(("a", "b"), ("0", "1", "2", "3"), rows))
        assert ret.values[0, 0] == pytest.approx(math.log(0.9), abs=1e-12)

    def test_nonpositive_level_names_cell(self):
        rows = np.array([[1.0, 1.0], [0.0, 1.0], [1.0, 1.0], [1.0, 1.0]])
        panel = TimeSeriesPanel(("a", "b"), ("0", "1", "2", "3"), rows)
        with pytest.raises(PanelError, match="'1'.*'a'"):
            log_returns(panel)

    def test_cumulative_returns_reconstruct_levels(self, rng):
        levels = rng.uniform(0.5, 3.0, size=(50, 2))
        panel = TimeSeriesPanel(("a", "b"), tuple(str(t) for t in range(50)), levels)
        ret = log_returns(panel)
        ratio = np.exp(ret.values.cumsum(axis=0))
        expected = levels[1:] / levels[0]
        assert np.max(np.abs(ratio - expected) / expected) < 1e-12


class TestMakeWindows:
    def _panel(self, n, m=2):
        vals = np.arange(n * m, dtype=float).reshape(n, m)
        return ReturnPanel(tuple("ab"[:m]), tuple(range(n)), vals)

    def test_offsets(self):
        panel = self._panel(10)
        wins = make_windows(panel, WindowSpec(window_length=4, step=2))
        assert len(wins) == 4
        starts = [w.timestamps[0] for w in wins]
        assert starts == [0, 2, 4, 6]
        assert all(w.n_obs == 4 for w in wins)

    def test_single_full_window(self):
        panel = self._panel(10)
        wins = make_windows(panel, WindowSpec(window_length=10, step=3))
        assert len(wins) == 1

    def test_too_long_window(self):
        panel = self._panel(10)
        with pytest.raises(PanelError, match="exceeds"):
            make_windows(panel, WindowSpec(window_length=11, step=1))

    def test_windows_are_views_of_source_rows(self):
        panel = self._panel(12)
        wins = make_windows(panel, WindowSpec(window_length=5, step=3))
        for i, w in enumerate(wins):
            assert np.array_equal(w.values, panel.values[i * 3 : i * 3 + 5])
            assert w.values.base is panel.values or w.values.base is panel.values.base


class TestMovingAverage:
    def test_identity(self):
        assert moving_average([1, 2, 3], 1).tolist() == [1, 2, 3]

    def test_partial_start(self):
        assert moving_average([1, 2, 3, 4], 2).tolist() == [1.0, 1.5, 2.5, 3.5]

    def test_empty(self):
        assert moving_average([], 3).size == 0

    def test_zero_k(self):
        with pytest.raises(ValueError):
            moving_average([1.0], 0)

    def test_k_beyond_length_gives_prefix_means(self, rng):
        x = rng.normal(size=7)
        out = moving_average(x, 100)
        expected = [x[: t + 1].mean() for t in range(7)]
        assert out == pytest.approx(expected, abs=1e-12)


class TestWeights:
    def test_ordering_follows_labels(self):
        text = "label,weight\nb,2.0\na,1.0\n"
        assert load_weights(text, ["a", "b"]).tolist() == [1.0, 2.0]

    def test_missing_label(self):
        with pytest.raises(PanelError, match="weight missing"):
            load_weights("label,weight\na,1.0\n", ["a", "b"])

    def test_all_zero_rejected(self):
        with pytest.raises(PanelError):
            load_weights("label,weight\na,0\nb,0\n", ["a", "b"])
