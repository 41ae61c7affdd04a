import math

import numpy as np
import pytest

from zeroris import SystemConfig
from zeroris import figures as fg


@pytest.fixture
def base():
    return SystemConfig()


class TestTable:
    def test_column_and_where(self):
        t = fg.Table(("a", "b"), [(1, "x"), (2, "y"), (3, "x")])
        assert t.column("a") == [1, 2, 3]
        assert t.where(b="x").column("a") == [1, 3]


class TestRecipes:
    def test_registry(self):
        assert set(fg.FIGURES) == {
            "fig_ecsr_vs_n1", "fig_ber_vs_n1", "fig_mi_vs_n1", "fig_ber_vs_snr_reps", "fig_ber_vs_threshold",
            "fig_ee_models", "fig_lnl_comparison", "fig_search_complexity", "fig_range", "fig_interference_sweep",
        }
        with pytest.raises(KeyError):
            fg.run_figure("fig_nothing")

    def test_ecsr_vs_n1(self, base):
        t = fg.run_figure("fig_ecsr_vs_n1", base, n1_values=(50, 100, 150))
        for k in (2, 4):
            e = t.where(K=k).column("ecsr")
            assert np.all(np.diff(e) > 0)
        assert t.where(K=4, N1=100).rows[0][2] > t.where(K=2, N1=100).rows[0][2]

    def test_ber_vs_n1(self, base):
        t = fg.run_figure("fig_ber_vs_n1", base, k_values=(4,), n1_values=(100, 150))
        for n1 in (100, 150):
            q = t.where(phase="quantized", N1=n1).rows[0]
            i = t.where(phase="ideal", N1=n1).rows[0]
            assert i[5] <= q[5]
            assert 0 <= q[5] <= q[4] <= 0.5

    def test_mi_vs_n1(self, base):
        t = fg.run_figure("fig_mi_vs_n1", base, k_values=(2,), n1_values=(100,))
        assert t.columns[-2:] == ("mi_nats", "mi_unclamped")
        assert all(v >= 0 for v in t.column("mi_nats"))

    def test_repetition_curve(self, base):
        t = fg.run_figure("fig_ber_vs_snr_reps", base, snr_db=(-10, 0))
        for snr in (-10, 0):
            rows = sorted(t.where(snr_db=snr).rows)
            assert rows[0][3] > rows[1][3] > rows[2][3]
            assert all(r[4] >= r[3] - 1e-15 for r in rows)
        assert t.where(R=1, snr_db=0).rows[0][3] < t.where(R=1, snr_db=-10).rows[0][3]

    def test_threshold_curves(self, base):
        t = fg.run_figure("fig_ber_vs_threshold", base, cases=((4, 20),), span_db=10.0, points=21)
        grid = t.where(kind="grid")
        assert len(grid.rows) == 21
        approx = t.where(kind="approx").rows[0]
        best = min(grid.rows, key=lambda r: r[4])
        assert abs(best[3] - approx[3]) <= 1.5
        # Q(M, g/v) is convex in v only near the operating point, so the Jensen bound holds there
        near = [r for r in grid.rows if abs(r[3] - approx[3]) <= 3.0]
        assert near and all(r[5] <= r[4] + 1e-6 for r in near)
        assert approx[5] <= approx[4]

    def test_ee_models(self, base):
        t = fg.run_figure("fig_ee_models", base, sigma0_dbm=(-10, 20))
        assert set(t.column("model")) == {"leh", "nleh", "conventional"}
        assert all(e == 1.0 for e in t.where(model="conventional").column("ecsr"))
        assert all(v >= 0 for v in t.column("ee_bit_per_j"))

    def test_lnl(self, base):
        t = fg.run_figure("fig_lnl_comparison", base, n1_values=(200, 240), efficiencies=(0.75,))
        assert set(t.column("model")) == {"leh", "nleh"}
        assert all(math.isnan(e) for e in t.where(model="nleh").column("eta"))

    def test_search_complexity(self, base):
        t = fg.run_figure("fig_search_complexity", base, n_values=(300, 500), seeds=5)
        assert t.where(N=300, method="binary").rows[0][2] == 11
        assert t.where(N=500, method="binary").rows[0][2] == 11
        assert t.where(N=500, method="exhaustive").rows[0][2] <= 499

    def test_range(self, base):
        t = fg.run_figure("fig_range", base, distances=(3.0, 8.0), sizes=(100,))
        conv = t.where(setup="conventional").column("combined_ber")
        assert conv[0] < conv[1]
        assert set(t.column("setup")) == set(fg.RANGE_SETUPS)
        with pytest.raises(ValueError):
            fg.range_config(base, "satellite", 100, 5.0)

    def test_achievable_range_bracket(self, base):
        d = fg.achievable_range(base, "ris_direct", 150, target=1e-2, distances=np.arange(1.0, 12.01, 1.0))
        assert 1.0 <= d <= 12.0
        ber = fg.evaluate(fg.range_config(base, "ris_direct", 150, d)).combined_ber
        assert ber == pytest.approx(1e-2, rel=2e-2)

    def test_interference_sweep(self, base):
        t = fg.run_figure("fig_interference_sweep", base, k_values=(5,), pk_dbm=(-10, 40))
        leh = t.where(model="leh")
        low, high = leh.rows
        assert high[3] >= low[3]
        assert high[4] > 0.45 and high[5] < low[5]

    def test_all_recipes_from_defaults(self):
        for name in fg.FIGURES:
            table = fg.run_figure(name)
            assert table.rows
            assert all(len(r) == len(table.columns) for r in table.rows)
