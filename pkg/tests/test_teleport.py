import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvnetwork.network import NetworkConfig
from cvnetwork.teleport import (
    ALWAYS_QUANTUM,
    DIPS_CLASSICAL,
    GainSchedule,
    analytic_optimal_fidelity,
    closed_form_fidelity,
    db_to_r,
    fidelity_curve,
    optimal_gain,
    optimize_gains_numeric,
    r_to_db,
    run_protocol,
    threshold_scan,
)


def three_party_fidelity(r):
    return ((1 + math.exp(-2 * r)) * (1 + 3 / (2 * math.exp(2 * r) + math.exp(-2 * r)))) ** -0.5


def one_squeezed_opt(n, r1):
    return (2 + 2 * n / (n - 2 + 2 * math.exp(2 * r1))) ** -0.5


class TestUnits:
    def test_round_trip(self):
        assert r_to_db(db_to_r(7.5)) == pytest.approx(7.5, rel=1e-15)

    def test_ten_db(self):
        # 10 dB is a factor 10 in variance
        assert math.exp(2 * db_to_r(10.0)) == pytest.approx(10.0, rel=1e-14)


class TestGainSchedule:
    def test_per_station_length(self):
        with pytest.raises(ValueError):
            GainSchedule(1.0, 0.0, (0.1, 0.2)).station_gains(3)

    def test_non_finite(self):
        with pytest.raises(ValueError):
            GainSchedule(math.nan, 0.0)

    def test_optimal_two_party(self):
        assert GainSchedule.optimal(NetworkConfig.all_equal(2, 1.0)) == GainSchedule(1.0, 0.0)


class TestOptimalGain:
    @pytest.mark.parametrize("scenario", ["all-equal", "one-squeezed"])
    @pytest.mark.parametrize("n", [3, 7, 40])
    def test_zero_squeezing(self, scenario, n):
        assert optimal_gain(n, scenario, 0.0) == 0.0

    @pytest.mark.parametrize("scenario", ["all-equal", "one-squeezed"])
    def test_large_squeezing(self, scenario):
        assert optimal_gain(5, scenario, 12.0) == pytest.approx(1.0, abs=1e-9)

    def test_three_party_value(self):
        # e^{4r} = 4 -> 3/4.5
        assert optimal_gain(3, "all-equal", math.log(4) / 4) == pytest.approx(2 / 3, abs=1e-15)

    def test_two_party_not_applicable(self):
        assert optimal_gain(2, "all-equal", 1.0) is None

    @pytest.mark.parametrize("args", [(1, "all-equal", 0.3), (3, "custom", 0.3), (3, "all-equal", -0.1)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            optimal_gain(*args)

    @given(st.integers(3, 60), st.floats(0, 8), st.sampled_from(["all-equal", "one-squeezed"]))
    def test_in_unit_interval(self, n, r, scenario):
        assert 0 <= optimal_gain(n, scenario, r) < 1


class TestRunProtocol:
    @pytest.mark.parametrize("alpha", [(0, 0), (2.0, -1.0), (-30, 7)])
    def test_classical_two_party(self, alpha):
        cfg = NetworkConfig.all_equal(2, 0.0)
        rng = np.random.default_rng(11)
        for _ in range(5):
            assert run_protocol(cfg, 0, 1, alpha, rng=rng).fidelity == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 2.0])
    def test_three_party_closed_form(self, r):
        out = run_protocol(NetworkConfig.all_equal(3, r), 0, 2, (0.4, 0.1), rng=np.random.default_rng(0))
        assert out.fidelity == pytest.approx(three_party_fidelity(r), abs=1e-10)

    def test_five_party_one_squeezed(self):
        out = run_protocol(NetworkConfig.one_squeezed(5, 2.0), 1, 3, (1.0, 1.0), rng=np.random.default_rng(3))
        assert out.fidelity == pytest.approx(one_squeezed_opt(5, 2.0), abs=1e-10)

    def test_record_layout(self):
        out = run_protocol(NetworkConfig.all_equal(5, 0.5), 0, 4, (0, 0), outcomes=[0.1, 0.2, 0.3, 0.4, 0.5])
        assert out.x_u == 0.1 and out.p_v == 0.2
        assert out.assisting == (0.3, 0.4, 0.5)
        assert out.output.n_modes == 1 and out.conditional.n_modes == 1

    def test_shot_fidelity_averages_to_ensemble(self):
        cfg = NetworkConfig.all_equal(4, 0.6)
        rng = np.random.default_rng(5)
        runs = [run_protocol(cfg, 0, 1, (0.5, -0.5), rng=rng) for _ in range(4000)]
        shots = np.array([o.shot_fidelity for o in runs])
        assert abs(shots.mean() - runs[0].fidelity) < 4 * shots.std() / math.sqrt(len(shots))

    def test_conditional_covariance_outcome_independent(self):
        cfg = NetworkConfig.one_squeezed(6, 1.0)
        rng = np.random.default_rng(9)
        base = run_protocol(cfg, 2, 5, (0, 0), rng=rng).conditional.cov
        for _ in range(50):
            np.testing.assert_array_equal(run_protocol(cfg, 2, 5, (0, 0), rng=rng).conditional.cov, base)

    def test_unit_gain_conditional_mean_tracks_input(self):
        # at r=0 the ensemble output mean is the input regardless of gains
        out = run_protocol(NetworkConfig.all_equal(3, 0.0), 0, 1, (1.5, -2.0), rng=np.random.default_rng(0))
        np.testing.assert_allclose(out.output.mean, [1.5, -2.0], atol=1e-12)

    def test_same_station_rejected(self):
        with pytest.raises(ValueError):
            run_protocol(NetworkConfig.all_equal(3, 0.1), 1, 1, (0, 0), rng=np.random.default_rng(0))

    def test_station_out_of_range(self):
        with pytest.raises(IndexError):
            run_protocol(NetworkConfig.all_equal(3, 0.1), 0, 3, (0, 0), rng=np.random.default_rng(0))

    def test_wrong_per_station_length(self):
        with pytest.raises(ValueError):
            run_protocol(NetworkConfig.all_equal(4, 0.1), 0, 1, (0, 0), GainSchedule(1, 0, (0.5,)),
                         rng=np.random.default_rng(0))

    def test_non_finite_alpha(self):
        with pytest.raises(ValueError):
            run_protocol(NetworkConfig.all_equal(3, 0.1), 0, 1, (math.inf, 0), rng=np.random.default_rng(0))

    def test_needs_rng_or_outcomes(self):
        with pytest.raises(ValueError):
            run_protocol(NetworkConfig.all_equal(3, 0.1), 0, 1, (0, 0))


def _grid():
    rng = np.random.default_rng(2024)
    cases = []
    for _ in range(24):
        n = int(rng.integers(2, 9))
        scenario = str(rng.choice(["all-equal", "one-squeezed"]))
        r = float(rng.uniform(0, 3))
        k, l = (int(v) for v in rng.choice(n, 2, replace=False))
        cases.append((n, scenario, r, k, l, bool(rng.integers(2))))
    return cases


class TestPipelineEquivalence:
    @pytest.mark.parametrize("n, scenario, r, k, l, use_opt", _grid())
    def test_protocol_matches_forms(self, n, scenario, r, k, l, use_opt):
        if use_opt or n == 2:
            gains = None
        else:
            gains = GainSchedule(1.0, 1.0)
        cfg = NetworkConfig.from_scenario(n, scenario, r)
        out = run_protocol(cfg, k, l, (0.7, -0.2), gains, rng=np.random.default_rng(1))
        ref = closed_form_fidelity(n, scenario, r, gains or out.gains, k=k, l=l)
        assert out.fidelity == pytest.approx(ref, abs=1e-10)

    @pytest.mark.parametrize("g", [0.6, 0.9, 1.2])
    @pytest.mark.parametrize("alpha", [(0.0, 0.0), (1.0, -2.0)])
    def test_nonunit_gain(self, g, alpha):
        gains = GainSchedule(g, 0.4)
        out = run_protocol(NetworkConfig.all_equal(4, 0.8), 0, 3, alpha, gains, rng=np.random.default_rng(2))
        ref = closed_form_fidelity(4, "all-equal", 0.8, gains, alpha=alpha, k=0, l=3)
        assert out.fidelity == pytest.approx(ref, abs=1e-10)

    def test_custom_squeezing(self):
        rs = (0.9, 0.2, 0.5, 0.0)
        cfg = NetworkConfig(4, rs)
        out = run_protocol(cfg, 1, 2, (0, 0), rng=np.random.default_rng(0))
        assert out.fidelity == pytest.approx(closed_form_fidelity(4, "custom", rs, k=1, l=2), abs=1e-10)


class TestClosedForm:
    @pytest.mark.parametrize("n", [2, 3, 10, 60])
    def test_unsqueezed_half(self, n):
        assert closed_form_fidelity(n, "all-equal", 0.0) == pytest.approx(0.5, abs=1e-15)

    def test_two_party_infinite_one_squeezed(self):
        assert closed_form_fidelity(2, "one-squeezed", 12.0) == pytest.approx(1 / math.sqrt(2), abs=1e-6)

    def test_non_optimal_gain_is_worse(self):
        opt = closed_form_fidelity(4, "all-equal", 1.0)
        assert closed_form_fidelity(4, "all-equal", 1.0, GainSchedule(1.0, 1.0)) < opt

    @pytest.mark.parametrize("scenario", ["all-equal", "one-squeezed"])
    @pytest.mark.parametrize("n", [2, 3, 4, 9, 31])
    @pytest.mark.parametrize("r", [0.05, 0.4, 1.7])
    def test_matches_analytic(self, scenario, n, r):
        assert closed_form_fidelity(n, scenario, r) == pytest.approx(
            analytic_optimal_fidelity(n, scenario, r), abs=1e-13
        )

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_sender_receiver_symmetry(self, n):
        values = [closed_form_fidelity(n, "all-equal", 0.7, k=k, l=l) for k, l in itertools.permutations(range(n), 2)]
        assert len(values) == n * (n - 1)
        assert max(values) - min(values) < 1e-14

    @pytest.mark.parametrize("n", [3, 6])
    def test_sender_receiver_symmetry_protocol(self, n):
        cfg = NetworkConfig.all_equal(n, 0.7)
        ref = analytic_optimal_fidelity(n, "all-equal", 0.7)
        for k, l in itertools.permutations(range(n), 2):
            out = run_protocol(cfg, k, l, (0, 0), rng=np.random.default_rng(k * n + l))
            assert out.fidelity == pytest.approx(ref, abs=1e-10)


class TestBoundsAndMonotonicity:
    @given(st.integers(2, 29), st.floats(0, 10))
    def test_all_equal_bounds_up_to_29(self, n, r):
        f = analytic_optimal_fidelity(n, "all-equal", r)
        assert 0.5 - 1e-15 <= f <= 1

    @given(st.integers(2, 500), st.floats(0, 20))
    def test_one_squeezed_cap(self, n, r):
        assert analytic_optimal_fidelity(n, "one-squeezed", r) <= 1 / math.sqrt(2)

    @pytest.mark.parametrize("r", [0.1, 0.3, 0.6])
    def test_one_squeezed_decreases_in_n(self, r):
        vals = [analytic_optimal_fidelity(n, "one-squeezed", r) for n in range(2, 40)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("n", [2, 5, 30])
    def test_one_squeezed_increases_in_r(self, n):
        vals = analytic_optimal_fidelity(n, "one-squeezed", np.linspace(0, 5, 200))
        assert np.all(np.diff(vals) > 0)

    def test_vectorised(self):
        r = np.array([0.0, 0.5, 1.0])
        np.testing.assert_allclose(
            analytic_optimal_fidelity(3, "all-equal", r), [three_party_fidelity(v) for v in r], atol=1e-15
        )


class TestOptimizeGains:
    def test_three_party(self):
        res = optimize_gains_numeric(3, "all-equal", 0.5)
        assert res.converged
        assert res.gains.gn == pytest.approx(optimal_gain(3, "all-equal", 0.5), abs=1e-6)

    def test_six_party_per_station(self):
        res = optimize_gains_numeric(6, "one-squeezed", 1.0, "per-station")
        gains = res.gains.per_station
        assert len(gains) == 4
        assert max(gains) - min(gains) < 1e-4
        assert res.fidelity - closed_form_fidelity(6, "one-squeezed", 1.0) <= 1e-8

    @pytest.mark.parametrize("start", [(0.0, 1.0, 0.3, 1.4), (1.2, 1.2, 0.0, 0.0)])
    def test_per_station_from_asymmetric_start(self, start):
        res = optimize_gains_numeric(6, "all-equal", 0.8, "per-station", start=start)
        assert max(res.gains.per_station) - min(res.gains.per_station) < 1e-4
        assert res.gains.per_station[0] == pytest.approx(optimal_gain(6, "all-equal", 0.8), abs=1e-4)

    def test_unsqueezed(self):
        res = optimize_gains_numeric(4, "all-equal", 0.0)
        assert res.gains.gn == pytest.approx(0.0, abs=1e-6)
        assert res.fidelity == pytest.approx(0.5, abs=1e-12)

    def test_needs_assistants(self):
        with pytest.raises(ValueError):
            optimize_gains_numeric(2, "all-equal", 0.5)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            optimize_gains_numeric(3, "all-equal", 0.5, "simplex")

    def test_bad_start(self):
        with pytest.raises(ValueError):
            optimize_gains_numeric(5, "all-equal", 0.5, "per-station", start=(0.1,))


DB_GRID = [0.5 * i for i in range(41)]
NS = [2, 3, 4, 8, 20, 50]


class TestFidelityCurve:
    def test_all_equal_start_at_half(self):
        rows = fidelity_curve(NS, "all-equal", DB_GRID)
        assert len(rows) == len(NS) * len(DB_GRID)
        for row in rows:
            if row.squeezing_db == 0:
                assert row.fidelity == pytest.approx(0.5, abs=1e-15)

    def test_one_squeezed_cap(self):
        assert all(row.fidelity <= 1 / math.sqrt(2) for row in fidelity_curve(NS, "one-squeezed", DB_GRID))

    def test_fifty_party_dips_then_recovers(self):
        rows = fidelity_curve([50], "all-equal", DB_GRID + [60.0])
        assert min(row.fidelity for row in rows) < 0.5
        assert rows[-1].fidelity > 0.99

    def test_sorted_and_auditable(self):
        rows = fidelity_curve([8, 2], "one-squeezed", [3.0, 1.0])
        assert [(row.n, row.squeezing_db) for row in rows] == [(2, 1.0), (2, 3.0), (8, 1.0), (8, 3.0)]
        for row in rows:
            assert r_to_db(row.r) == pytest.approx(row.squeezing_db, rel=1e-14)
        assert rows[0].gain is None

    @pytest.mark.parametrize("grid", [[], [-1.0, 2.0]])
    def test_bad_grid(self, grid):
        with pytest.raises(ValueError):
            fidelity_curve([3], "all-equal", grid)

    def test_custom_rejected(self):
        with pytest.raises(ValueError):
            fidelity_curve([3], "custom", [1.0])


@pytest.fixture(scope="module")
def scan():
    return {res.n: res for res in threshold_scan([2, 10, 26, 27, 28, 29, 30, 31, 40])}


class TestThresholdScan:
    def test_two_party(self, scan):
        assert scan[2].classification == ALWAYS_QUANTUM
        assert scan[2].maxima == () and scan[2].minima == ()

    @pytest.mark.parametrize("n", [10, 26])
    def test_no_stationary_points_below_27(self, scan, n):
        assert scan[n].classification == ALWAYS_QUANTUM
        assert scan[n].maxima == () and scan[n].minima == ()

    @pytest.mark.parametrize("n", [27, 28, 29])
    def test_max_then_min_above_half(self, scan, n):
        res = scan[n]
        assert res.classification == ALWAYS_QUANTUM
        assert len(res.maxima) == 1 and len(res.minima) == 1
        (r_max, f_max), (r_min, f_min) = res.maxima[0], res.minima[0]
        assert r_max < r_min
        assert f_max > f_min > 0.5

    @pytest.mark.parametrize("n", [30, 31, 40])
    def test_dips_classical(self, scan, n):
        assert scan[n].classification == DIPS_CLASSICAL
        assert scan[n].min_fidelity < 0.5

    def test_stationary_points_are_stationary(self, scan):
        (r0, f0), = scan[29].minima
        for dr in (-1e-3, 1e-3):
            assert analytic_optimal_fidelity(29, "all-equal", r0 + dr) > f0

    def test_bad_grid(self):
        with pytest.raises(ValueError):
            threshold_scan([3], r_step=0.0)
