"""
Unit tests for hedgegraph - Hedge Scores and Selection
"""

import itertools

import numpy as np
import pytest

from hedgegraph.models.hedge import HedgeReport
from hedgegraph.models.panel import WindowSpec
from hedgegraph.services.hedge_select import (
    hedge_scores,
    hedge_table,
    negative_counts,
    select_top_k,
    select_unconstrained,
    selection_table,
    write_hedge_csv,
)
from hedgegraph.utils.error_handling import EmptyWindowError, ErrorCode, ValidationError
from tests.conftest import make_panel

pytestmark = pytest.mark.unit

WORKED_RETURNS = [[0.01, -0.01, 0.02], [-0.01, 0.01, -0.02]]


def _report(scores, means, tickers=None):
    n = len(scores)
    tickers = tickers or tuple("ABCDEFGHIJKL"[:n])
    return HedgeReport(
        tickers=tuple(tickers),
        scores=np.asarray(scores, dtype=float),
        means=np.asarray(means, dtype=float),
        negative_counts=np.zeros(n, dtype=np.int64),
        window=WindowSpec.year(2020),
        sample_size=2,
    )


class TestHedgeScores:
    """Tests for the per-asset hedge score"""

    def test_worked_example(self):
        report = hedge_scores(make_panel(WORKED_RETURNS, tickers=("A", "B", "C")))
        np.testing.assert_array_equal(report.scores, [0.5, 1.0, 0.5])
        np.testing.assert_array_equal(report.negative_counts, [2, 4, 2])
        assert report.sample_size == 2
        assert report.window.label == "full"

    def test_identical_columns_score_zero(self, rng):
        column = rng.normal(0, 0.01, size=(50, 1))
        report = hedge_scores(make_panel(np.hstack([column] * 4)))
        np.testing.assert_array_equal(report.scores, np.zeros(4))

    def test_opposite_pair_scores_one(self, rng):
        column = rng.normal(0, 0.01, size=(30, 1))
        report = hedge_scores(make_panel(np.hstack([column, -column])))
        np.testing.assert_array_equal(report.scores, [1.0, 1.0])

    def test_constant_column_never_hedges(self):
        report = hedge_scores(make_panel([[0.003, 0.01], [0.003, -0.01], [0.003, 0.02]]))
        assert report.scores[0] == 0.0
        assert report.means[0] == pytest.approx(0.003)

    def test_counts_are_even_in_total(self, multi_year_panel):
        report = hedge_scores(multi_year_panel, WindowSpec.year(2021))
        t, n = report.sample_size, len(report.tickers)
        counts = report.scores * t * (n - 1)
        np.testing.assert_allclose(counts, np.round(counts), atol=1e-9)
        assert int(report.negative_counts.sum()) % 2 == 0

    def test_shift_and_scale_invariance(self, rng):
        returns = rng.normal(0, 0.01, size=(60, 5))
        base = hedge_scores(make_panel(returns)).scores
        moved = returns.copy()
        moved[:, 2] += 0.004
        moved[:, 3] *= 2.5
        np.testing.assert_array_equal(hedge_scores(make_panel(moved)).scores, base)

    def test_workers_give_identical_scores(self, multi_year_panel, thread_budget):
        serial = hedge_scores(multi_year_panel, workers=1)
        for workers in (2, 8):
            parallel = hedge_scores(multi_year_panel, workers=workers)
            np.testing.assert_array_equal(parallel.scores, serial.scores)
            np.testing.assert_array_equal(parallel.negative_counts, serial.negative_counts)

    def test_window_slices_first(self, multi_year_panel):
        report = hedge_scores(multi_year_panel, WindowSpec.year(2022))
        assert report.window.label == "2022"
        assert 240 <= report.sample_size <= 262

    def test_empty_window(self, multi_year_panel):
        with pytest.raises(EmptyWindowError):
            hedge_scores(multi_year_panel, WindowSpec.year(1999))

    def test_too_few_rows(self):
        with pytest.raises(ValidationError) as exc:
            hedge_scores(make_panel([[0.01, 0.02]]))
        assert exc.value.error_code == ErrorCode.TOO_FEW_ROWS

    def test_too_few_assets(self):
        with pytest.raises(ValidationError) as exc:
            hedge_scores(make_panel([[0.01], [0.02]]))
        assert exc.value.error_code == ErrorCode.TOO_FEW_ASSETS


class TestNegativeCounts:
    def test_zero_deviation_opposes_nothing(self):
        counts = negative_counts(np.array([[1.0, 0.0, -1.0]]))
        np.testing.assert_array_equal(counts, [1, 0, 1])

    def test_matches_pairwise_loop(self, rng, thread_budget):
        deviations = rng.normal(size=(40, 6))
        expected = np.zeros(6, dtype=np.int64)
        for row in deviations:
            for i, j in itertools.permutations(range(6), 2):
                if row[i] * row[j] < 0:
                    expected[i] += 1
        np.testing.assert_array_equal(negative_counts(deviations), expected)
        np.testing.assert_array_equal(negative_counts(deviations, workers=3), expected)


class TestSelectTopK:
    """Tests for top-K reduction"""

    def test_worked_example(self):
        selection = select_top_k(_report([0.5, 1.0, 0.5], [0.01, 0.02, 0.03]), 2)
        assert selection.chosen == ("B", "C")
        assert selection.objective == pytest.approx(0.035)

    def test_full_universe(self):
        report = _report([0.5, 1.0, 0.5], [0.01, 0.02, 0.03])
        selection = select_top_k(report, 3)
        assert selection.chosen == ("A", "B", "C")
        assert selection.objective == pytest.approx(float(report.scores @ report.means))

    def test_ties_prefer_smaller_tickers(self):
        report = _report([0.5] * 4, [0.01] * 4, tickers=("D", "B", "C", "A"))
        assert select_top_k(report, 2).chosen == ("A", "B")

    def test_negative_products_forced_in(self):
        report = _report([0.5, 0.5], [0.01, -0.02])
        selection = select_top_k(report, 2)
        assert selection.objective == pytest.approx(-0.005)

    @pytest.mark.parametrize("k", [0, 4, -1])
    def test_k_out_of_range(self, k):
        with pytest.raises(ValidationError) as exc:
            select_top_k(_report([0.5, 1.0, 0.5], [0.01, 0.02, 0.03]), k)
        assert exc.value.error_code == ErrorCode.K_OUT_OF_RANGE

    @pytest.mark.timeout(10)
    def test_matches_exhaustive_search(self, rng):
        """200 random reports, every K, against all C(N, K) subsets"""
        for _ in range(200):
            n = int(rng.integers(1, 13))
            report = _report(rng.uniform(0, 1, n), rng.normal(0, 0.01, n))
            products = report.products
            for k in range(1, n + 1):
                best = max(
                    products[list(subset)].sum()
                    for subset in itertools.combinations(range(n), k)
                )
                assert select_top_k(report, k).objective == pytest.approx(best, abs=1e-15)


class TestSelectUnconstrained:
    def test_positive_terms_only(self):
        report = _report([0.5, 1.0, 0.1], [0.01, 0.02, -0.01])
        selection = select_unconstrained(report)
        assert selection.chosen == ("A", "B")
        assert selection.k == 2
        assert selection.objective == pytest.approx(0.025)

    def test_all_negative_is_empty(self):
        selection = select_unconstrained(_report([0.5, 0.5], [-0.01, -0.02]))
        assert selection.chosen == ()
        assert selection.objective == 0.0

    def test_all_positive_is_everything(self):
        selection = select_unconstrained(_report([0.2, 0.4, 0.6], [0.01, 0.02, 0.03]))
        assert selection.chosen == ("A", "B", "C")

    def test_zero_product_excluded(self):
        selection = select_unconstrained(_report([0.0, 0.5], [0.01, 0.01]))
        assert selection.chosen == ("B",)


class TestTables:
    def test_hedge_table_appends_full_panel(self, multi_year_panel):
        windows = [WindowSpec.year(2020), WindowSpec.year(2021)]
        reports = hedge_table(multi_year_panel, windows)
        assert [r.window.label for r in reports] == ["2020", "2021", "full"]

    def test_hedge_table_without_full(self, multi_year_panel):
        reports = hedge_table(multi_year_panel, [WindowSpec.year(2023)], include_full=False)
        assert len(reports) == 1

    def test_selection_table(self, multi_year_panel):
        windows = [WindowSpec.year(2020), WindowSpec.year(2021)]
        table = selection_table(multi_year_panel, windows, [5, 3, 5])
        assert set(table) == {"2020", "2021"}
        assert list(table["2020"]) == [3, 5]
        assert len(table["2021"][5].chosen) == 5


class TestExport:
    def test_csv_sorted_by_product(self, tmp_path):
        report = _report([0.5, 1.0, 0.5], [0.01, 0.02, 0.03])
        path = write_hedge_csv(report, tmp_path / "hedge.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "ticker,hedge_score,mean_return,product"
        assert [line.split(",")[0] for line in lines[1:]] == ["B", "C", "A"]

    def test_json_form(self):
        payload = _report([0.5, 1.0], [0.01, 0.02]).to_json_dict()
        assert payload["assets"][1]["ticker"] == "B"
        assert payload["assets"][1]["product"] == pytest.approx(0.02)
        assert payload["window"]["label"] == "2020"

    def test_zero_score_negative_mean_product_is_plain_zero(self, tmp_path):
        report = _report([0.0, 0.5], [-0.01, 0.02])
        path = write_hedge_csv(report, tmp_path / "hedge.csv")
        last = path.read_text().splitlines()[-1]
        assert last == "A,0,-0.01,0"
