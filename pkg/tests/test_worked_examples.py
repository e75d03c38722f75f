"""Hand-computed and closed-form reference values, one class per module."""

from __future__ import annotations

import math

import numpy as np
import pytest
from conftest import random_circuit
from hypothesis import given
from hypothesis import strategies as st

from zne import gates
from zne.adaptive import (ALPHA, AdaptiveConfig, ExponentialPolicy, adaptive_exp_extrapolate,
                          extrapolate_nonadaptive, generic_adaptive, mse_b, optimal_allocation,
                          solve_alpha, solve_alpha_newton, two_point_exp_fit)
from zne.bench.config import ExperimentConfig
from zne.bench.experiments import run_scenario, run_zne
from zne.bench.generators import RANDOM6_SINGLE, RANDOM6_TWO, generate_random6, generate_rb_circuit
from zne.circuit import Circuit, Gate, Layer, adjoint, concat, parse_circuit, unitary_of
from zne.densim import (NOISELESS, DensityMatrix, NoiseModel, Observable, angle_noise_q,
                        apply_amplitude_damping, apply_angle_noise_channel, apply_depolarizing,
                        apply_gate, gaussian_noise_executor, sample_expectation, simulate,
                        simulate_expectation)
from zne.extrapolate import (NoiseCurve, by_name, extrapolate_exp, extrapolate_linear,
                             extrapolate_polyexp, extrapolate_richardson, fit_polynomial,
                             richardson_variance, richardson_weights)
from zne.folding import FROM_LEFT, fold, fold_gates, fold_global, resolve_fold
from zne.param_scale import ANGLE_PER_CONTROL, ParamNoiseSpec, effective_q, scale_parameters

RB_OBS = Observable.basis(0, 2)


class TestCircuitExamples:
    def test_fold_global_depth_two(self):
        c = parse_circuit("qubits 2\nH 0\nCNOT 0 1")
        f = fold_global(c, 3)
        assert f.depth() == 6 and np.allclose(unitary_of(f), unitary_of(c), atol=1e-10)

    def test_concat_identity_element(self):
        c = random_circuit(np.random.default_rng(0), 2, 4)
        assert concat(c, Circuit(2)) == c
        assert simulate_expectation(concat(c, adjoint(c)), NOISELESS, RB_OBS) == pytest.approx(1.0)


class TestFoldingExamples:
    def test_no_folding(self):
        spec = resolve_fold(10, 1.0)
        assert (spec.n, spec.s, spec.realized_lambda) == (0, 0, 1.0)

    def test_triple(self):
        spec = resolve_fold(10, 3.0)
        assert (spec.k, spec.n, spec.s, spec.realized_lambda) == (10, 1, 0, 3.0)

    def test_nearest_grid_point(self):
        spec = resolve_fold(4, 1.4)
        assert (spec.k, spec.n, spec.s, spec.realized_lambda) == (1, 0, 1, 1.5)

    def test_global_partial(self):
        c = random_circuit(np.random.default_rng(1), 2, 4)
        f = fold_global(c, 1.5)
        assert f.depth() == 6
        assert f.layers[4] == c.layers[3].inverse() and f.layers[5] == c.layers[3]
        assert simulate_expectation(f, NOISELESS, RB_OBS) == pytest.approx(
            simulate_expectation(c, NOISELESS, RB_OBS), abs=1e-12)

    def test_triple_layer_fold_same_for_all_methods(self):
        c = random_circuit(np.random.default_rng(2), 2, 4)
        results = {fold(c, 3.0, m, seed=1) for m in ("left", "right", "random")}
        assert len(results) == 1
        (f,) = results
        assert f.depth() == 12
        assert f.layers[:3] == (c.layers[0], c.layers[0].inverse(), c.layers[0])

    def test_left_subset(self):
        c = random_circuit(np.random.default_rng(3), 2, 4)
        f = fold_gates(c, 2.0, FROM_LEFT)
        l0, l1, l2, l3 = c.layers
        assert f.layers == (l0, l0.inverse(), l0, l1, l1.inverse(), l1, l2, l3)
        assert np.allclose(simulate(f).data, simulate(c).data, atol=1e-12)


class TestDensimExamples:
    def test_x_and_h(self):
        rho = apply_gate(DensityMatrix.zero_state(1), Gate("X", (0,)))
        assert np.allclose(rho.data, np.diag([0, 1]))
        rho = apply_gate(DensityMatrix.zero_state(1), Gate("H", (0,)))
        assert np.allclose(rho.data, 0.5 * np.ones((2, 2)))

    @pytest.mark.parametrize("name", ["H", "S", "T", "RX", "CNOT", "ISWAP"])
    def test_gate_then_adjoint(self, name):
        arity, n_params = gates.SIGNATURES[name]
        g = Gate(name, tuple(range(arity)), (0.9,) * n_params)
        rho = DensityMatrix(random_density(2))
        out = apply_gate(apply_gate(rho, g), g.inverse())
        assert np.allclose(out.data, rho.data, atol=1e-12)

    def test_depolarizing_limits(self):
        rho = DensityMatrix.zero_state(2)
        assert np.allclose(apply_depolarizing(rho, 1.0).data, rho.data)
        assert np.allclose(apply_depolarizing(rho, 0.0).data, np.eye(4) / 4)
        assert np.allclose(np.diag(apply_depolarizing(rho, 0.99).data).real,
                           [0.9925, 0.0025, 0.0025, 0.0025])

    def test_amplitude_damping_values(self):
        one = DensityMatrix.basis_state(1, 1)
        assert np.allclose(apply_amplitude_damping(one, 0.0, 0).data, one.data)
        assert np.allclose(apply_amplitude_damping(one, 1.0, 0).data, np.diag([1, 0]))
        assert np.allclose(apply_amplitude_damping(one, 0.01, 0).data, np.diag([0.01, 0.99]))

    def test_angle_channel_values(self):
        rho = DensityMatrix(random_density(1))
        assert np.allclose(apply_angle_noise_channel(rho, gates.X, 0.0, [0]).data, rho.data)
        big = apply_angle_noise_channel(rho, gates.X, 1e6, [0]).data
        assert np.allclose(big, (rho.data + gates.X @ rho.data @ gates.X) / 2)
        assert angle_noise_q(0.001) == pytest.approx(0.5 * (1 - math.exp(-0.002)))
        assert angle_noise_q(0.001) == pytest.approx(9.99e-4, rel=1e-3)

    @pytest.mark.parametrize("d", [1, 4, 9])
    def test_idle_layers_under_global_depolarizing(self, d):
        p = 0.97
        c = Circuit(2, tuple(Layer(()) for _ in range(d)))
        nm = NoiseModel(depolarizing=1 - p, depolarizing_placement="layer")
        assert simulate_expectation(c, nm, RB_OBS) == pytest.approx(p**d + (1 - p**d) / 4)

    def test_sampling_large_n(self):
        c = parse_circuit("qubits 1\nRY 0 1.1")
        obs = Observable.basis(0, 1)
        e = simulate_expectation(c, NOISELESS, obs)
        n = 10**6
        assert abs(sample_expectation(c, NOISELESS, obs, n, seed=9) - e) < 4 * math.sqrt(e * (1 - e) / n)

    def test_sampling_deterministic_outcome(self):
        c = parse_circuit("qubits 1\nX 0")
        obs = Observable.basis(1, 1)
        assert {sample_expectation(c, NOISELESS, obs, 50, seed=s) for s in range(20)} == {1.0}

    def test_gaussian_executor_statistics(self):
        c = parse_circuit("qubits 1\nRY 0 0.8")
        obs = Observable.basis(0, 1)
        exact = simulate_expectation(c, NOISELESS, obs)
        rng = np.random.default_rng(5)
        sigma0, shots = 0.5, 100
        draws = np.array([gaussian_noise_executor(c, NOISELESS, obs, sigma0, shots, seed=rng)
                          for _ in range(10_000)])
        assert draws.var(ddof=1) == pytest.approx(sigma0**2 / shots, rel=0.05)
        assert abs(draws.mean() - exact) < 4 * draws.std(ddof=1) / math.sqrt(len(draws))


class TestParamScaleExamples:
    def test_control_parameter_variance(self):
        # stored angles move by ANGLE_PER_CONTROL times the control-parameter shift
        c = parse_circuit("qubits 1\nRZ 0 0.3")
        spec = ParamNoiseSpec(0.001, 3.0)
        rng = np.random.default_rng(3)
        shifts = np.array([scale_parameters(c, spec, rng).gates()[0].params[0] - 0.3
                           for _ in range(10_000)]) / ANGLE_PER_CONTROL
        assert shifts.var(ddof=1) == pytest.approx(2 * 0.001, rel=0.05)

    def test_effective_q_values(self):
        assert effective_q(0.0, 4.0) == 0.0
        assert effective_q(0.001, 1.0) == pytest.approx(9.99e-4, rel=1e-3)

    @given(st.floats(0.0, 5.0), st.floats(1.0, 10.0), st.floats(0.0, 5.0))
    def test_effective_q_monotone_and_bounded(self, sigma2, lam, dlam):
        q1, q2 = effective_q(sigma2, lam), effective_q(sigma2, lam + dlam)
        assert q1 <= q2 <= 0.5


class TestExtrapolateExamples:
    def test_exact_parabola(self):
        lam = np.array([1.0, 1.5, 2.0, 2.5])
        curve = NoiseCurve.from_arrays(lam, 1 - 0.1 * lam + 0.01 * lam**2)
        assert fit_polynomial(curve, 2).value == pytest.approx(1.0, abs=1e-9)

    def test_constant_fit_is_mean(self):
        curve = NoiseCurve.from_arrays([1, 2, 3], [0.3, 0.5, 0.7])
        assert fit_polynomial(curve, 0).value == pytest.approx(0.5)

    def test_collinear(self):
        assert fit_polynomial(NoiseCurve.from_arrays([1, 2, 3], [0.9, 0.8, 0.7]), 1).value == pytest.approx(1.0)

    def test_linear_values(self):
        assert extrapolate_linear(NoiseCurve.from_arrays([1, 2], [1, 0.5])).value == pytest.approx(1.5)
        est = extrapolate_linear(NoiseCurve.from_arrays([1, 2, 3], [0.4] * 3))
        assert est.value == pytest.approx(0.4) and est.params["slope"] == 0
        lam = [1, 1.5, 2, 2.5]
        var = extrapolate_linear(NoiseCurve.from_arrays(lam, [0.9, 0.8, 0.7, 0.6]), sigma2=0.01).variance
        assert var == pytest.approx(0.0270)

    def test_richardson_values(self):
        assert extrapolate_richardson(NoiseCurve.from_arrays([1, 2], [0.8, 0.7])).value == pytest.approx(0.9)
        assert extrapolate_richardson(NoiseCurve.from_arrays([1.0], [0.8])).value == 0.8
        assert richardson_weights([1, 2, 3]) == pytest.approx([3, -3, 1])

    def test_richardson_variance_values(self):
        assert richardson_variance(1, 2.5) == pytest.approx(2.5)
        assert richardson_variance(3, 1.0) == 19
        stirling = 4**10 / math.sqrt(math.pi * 10)
        assert richardson_variance(10, 1.0) / stirling == pytest.approx(1.0, rel=0.05)

    def test_polyexp_exact(self):
        lam = np.array([1.0, 1.5, 2.0, 2.5])
        curve = NoiseCurve.from_arrays(lam, 0.25 + 0.75 * np.exp(-lam))
        assert extrapolate_polyexp(curve, 1, 0.25).value == pytest.approx(1.0, abs=1e-6)
        curve = NoiseCurve.from_arrays(lam, np.exp(-0.1 * lam - 0.05 * lam**2))
        assert extrapolate_polyexp(curve, 2, 0.0).value == pytest.approx(1.0, abs=1e-6)

    def test_polyexp_noisy_bias(self):
        # a single noisy curve can miss by more than 5 sigma because extrapolation amplifies
        # the point noise; the estimator itself must be unbiased at that scale
        rng = np.random.default_rng(0)
        sigma, lam = 0.01, 1 + 0.5 * np.arange(6)
        truth = 0.25 + 0.75 * np.exp(-0.5 * lam)
        errs = np.array([extrapolate_polyexp(NoiseCurve.from_arrays(lam, truth + rng.normal(0, sigma, 6)),
                                             1, 0.25).value - 1.0 for _ in range(500)])
        assert abs(errs.mean()) < 5 * sigma
        assert np.median(np.abs(errs)) < 5 * sigma

    def test_exp_recovers_b_and_c(self):
        lam = np.array([1.0, 2.0, 3.0, 4.0])
        est = extrapolate_exp(NoiseCurve.from_arrays(lam, 0.25 + 0.5 * np.exp(-0.3 * lam)), 0.25)
        assert est.params["b"] == pytest.approx(0.5, abs=1e-6)
        assert est.params["c"] == pytest.approx(0.3, abs=1e-6)

    def test_exp_on_folded_rb_curve(self):
        c = generate_rb_circuit(2, 27, seed=4)
        est, _ = run_zne(c, NoiseModel(depolarizing=0.01), RB_OBS, "global", [1, 3, 5], "exp",
                         asymptote=0.25)
        assert est.value == pytest.approx(1.0, abs=1e-6)


class TestAdaptiveExamples:
    def test_two_point_values(self):
        b, c = two_point_exp_fit(1, math.exp(-1), 2, math.exp(-2), 0.0)
        assert (b, c) == (pytest.approx(1.0), pytest.approx(1.0))
        b, c = two_point_exp_fit(1, 0.6, 2, 0.6, 0.2)
        assert c == 0 and b == pytest.approx(0.4)
        y = lambda lam: 0.25 + 0.5 * math.exp(-0.4 * lam)  # noqa: E731
        b, c = two_point_exp_fit(1, y(1), 3, y(3), 0.25)
        assert abs(b - 0.5) < 1e-12 and abs(c - 0.4) < 1e-12

    def test_mse_values(self):
        assert mse_b(1, 2, 50, 50, 0.0, 1.0) == pytest.approx(5 / 50)
        assert mse_b(1, 2, 50, 70, 0.3, 3.0) == pytest.approx(3 * mse_b(1, 2, 50, 70, 0.3, 1.0))

    @pytest.mark.parametrize("lam1, lam2, c, n1, n2", [(1, 2, 0.5, 40, 60), (1, 3.5, 0.2, 70, 30),
                                                       (1.5, 2.5, 1.2, 20, 80)])
    def test_mse_matches_error_propagation(self, lam1, lam2, c, n1, n2):
        a, b, sigma0 = 0.25, 0.6, 1e-3
        y1, y2 = a + b * math.exp(-c * lam1), a + b * math.exp(-c * lam2)
        h = 1e-7
        d1 = (two_point_exp_fit(lam1, y1 + h, lam2, y2, a)[0]
              - two_point_exp_fit(lam1, y1 - h, lam2, y2, a)[0]) / (2 * h)
        d2 = (two_point_exp_fit(lam1, y1, lam2, y2 + h, a)[0]
              - two_point_exp_fit(lam1, y1, lam2, y2 - h, a)[0]) / (2 * h)
        propagated = sigma0**2 * (d1**2 / n1 + d2**2 / n2)
        assert mse_b(lam1, lam2, n1, n2, c, sigma0**2) == pytest.approx(propagated, rel=0.01)

    def test_allocation_without_decay(self):
        # the minimizer puts two thirds of the budget on lambda1 (brute force agrees below)
        assert optimal_allocation(1, 2, 0.0, 300) == (200, 100)

    def test_allocation_with_fast_decay(self):
        # large c makes lambda2 expensive to resolve, so it receives almost everything
        n1, n2 = optimal_allocation(1, 2, 20.0, 1000)
        assert n1 <= 1 and n2 >= 999

    @pytest.mark.parametrize("lam1, lam2, c", [(1, 2, 0.0), (1, 2, 0.5), (1, 3, 0.5), (2, 2.5, 0.5)])
    def test_allocation_grid_search(self, lam1, lam2, c):
        n1, _ = optimal_allocation(lam1, lam2, c, 100)
        brute = min(range(1, 100), key=lambda k: mse_b(lam1, lam2, k, 100 - k, c, 1.0))
        assert abs(n1 - brute) <= 1

    def test_alpha_methods_agree(self):
        assert abs(solve_alpha() - solve_alpha_newton()) < 1e-10

    def test_first_iteration_exact(self):
        ex = lambda lam, n: 0.25 + 0.5 * math.exp(-0.7 * lam)  # noqa: E731
        est = adaptive_exp_extrapolate(ex, AdaptiveConfig(a=0.25, n_max=100, n_batch=100))
        assert abs(est.params["b"] - 0.5) < 1e-6

    def test_lambda2_converges(self):
        rng = np.random.default_rng(1)
        ex = lambda lam, n: 0.25 + 0.5 * math.exp(-0.2 * lam) + rng.normal(0, 1e-4 / math.sqrt(n))  # noqa: E731
        est = adaptive_exp_extrapolate(ex, AdaptiveConfig(a=0.25, n_max=600, n_batch=100, c_init=1.0))
        history = est.info["lambda2_history"]
        assert history[0] == pytest.approx(1 + ALPHA)
        assert history[3] == pytest.approx(1 + ALPHA / 0.2, rel=0.01)

    @given(st.integers(2, 500), st.integers(2, 5000))
    def test_budget_accounting(self, n_batch, n_max):
        n_batch = min(n_batch, n_max)
        est = adaptive_exp_extrapolate(lambda lam, n: 0.25 + 0.5 * math.exp(-0.5 * lam),
                                       AdaptiveConfig(a=0.25, n_max=n_max, n_batch=n_batch))
        assert n_max <= est.info["samples_used"] <= n_max + n_batch

    def test_constant_policy_is_weighted_mean(self):
        rng = np.random.default_rng(2)
        draws = []

        def ex(lam, n):
            draws.append((n, rng.normal()))
            return draws[-1][1]

        est = generic_adaptive(ex, lambda c: fit_polynomial(c, 0), [1.0], [10], 60,
                               lambda e, c: 1.0, lambda e, c: 20)
        w = np.array([n for n, _ in draws], dtype=float)
        assert est.value == pytest.approx(np.dot(w, [y for _, y in draws]) / w.sum())

    def test_exponential_policy_bit_for_bit(self):
        def make():
            rng = np.random.default_rng(3)
            return lambda lam, n: 0.25 + 0.5 * math.exp(-0.4 * lam) + rng.normal(0, 0.5 / math.sqrt(n))

        cfg = dict(a=0.25, n_max=2000, n_batch=400)
        direct = adaptive_exp_extrapolate(make(), AdaptiveConfig(**cfg))
        policy = ExponentialPolicy(AdaptiveConfig(**cfg))
        generic = generic_adaptive(make(), policy.model, [], [], 2000, policy.new_scale, policy.new_samples)
        assert generic.value == direct.value
        assert generic.params == direct.params

    def test_nonadaptive_policy(self):
        ex = lambda lam, n: 0.3 + 0.5 * math.exp(-0.4 * lam)  # noqa: E731
        model = by_name("poly:2")
        lams = [1.0, 1.5, 2.0, 2.5]
        generic = generic_adaptive(ex, model, lams, [100] * 4, 0, None, None)
        direct, _ = extrapolate_nonadaptive(ex, lams, 100, model)
        assert generic.value == direct.value


class TestGeneratorExamples:
    def test_rb_identity_and_depth(self):
        depths = []
        for seed in range(20):
            c = generate_rb_circuit(2, 27, seed)
            assert simulate_expectation(c, NOISELESS, RB_OBS) == pytest.approx(1.0)
            depths.append(c.depth())
        assert 0.6 * 27 <= np.mean(depths) <= 1.4 * 27
        assert generate_rb_circuit(2, 27, 5) == generate_rb_circuit(2, 27, 5)

    def test_random6_shape(self):
        c = generate_random6(seed=8)
        assert (c.depth(), c.n_qubits) == (40, 6)
        assert {g.kind for g in c.gates()} <= set(RANDOM6_SINGLE + RANDOM6_TWO)
        assert c == generate_random6(seed=8)

    @pytest.mark.parametrize("method", ["linear", "poly:2", "richardson", "exp"])
    def test_zero_noise_curve_is_flat(self, method):
        c = random_circuit(np.random.default_rng(6), 2, 5)
        e0 = simulate_expectation(c, NOISELESS, RB_OBS)
        est, curve = run_zne(c, NOISELESS, RB_OBS, "global", [1, 1.5, 2, 2.5], method, asymptote=0.25)
        assert np.allclose(curve.values, e0, atol=1e-12)
        assert est.value == pytest.approx(e0, abs=1e-9)


# -- scenario reference values --------------------------------------------------------------


@pytest.fixture(scope="module")
def table2():
    cfg = ExperimentConfig.for_scenario("table2", scaling=["global"])
    return run_scenario(cfg).summary["cells"]


@pytest.fixture(scope="module")
def adaptive_report():
    return run_scenario(ExperimentConfig.for_scenario("adaptive_compare"))


class TestScenarioExamples:
    def test_exponential_cell(self, table2):
        assert abs(table2["global/exp/depolarizing"]["mean"] - 2.73) <= 2.5

    def test_unmitigated_cell(self, table2):
        assert abs(table2["none/unmitigated/depolarizing"]["mean"] - 29.9) <= 7

    def test_quadratic_cell(self, table2):
        assert 2.75 <= table2["global/poly:2/depolarizing"]["mean"] <= 10.0

    def test_amplitude_damping_linear_cell(self, table2):
        assert 3.1 <= table2["global/linear/amplitude_damping"]["mean"] <= 7.7

    def test_rb_decay_ordering(self):
        s = run_scenario(ExperimentConfig.for_scenario("rb_decay", n_circuits=3)).summary
        assert s["f_mitigated"] > s["f_unmitigated"]

    def test_random6_improvement_bulk(self):
        s = run_scenario(ExperimentConfig.for_scenario("random6", n_circuits=20)).summary
        assert s["fraction_improvement_1_to_7"] >= 0.8

    def test_param_noise_arms(self):
        boxes = run_scenario(ExperimentConfig.for_scenario("param_noise")).summary["boxes"]
        u, p, f = (boxes[k]["median"] for k in ("unmitigated", "param", "left"))
        assert p < u and f < u
        assert 0.5 <= p / f <= 2.0

    def test_param_noise_without_noise(self):
        cfg = ExperimentConfig.for_scenario("param_noise", n_circuits=3,
                                            noise=[{"name": "none", "angle_noise": 0.0}])
        boxes = run_scenario(cfg).summary["boxes"]
        assert boxes["unmitigated"] == pytest.approx(boxes["param"], abs=1e-12)
        assert boxes["param"] == pytest.approx(boxes["left"], abs=1e-12)

    def test_adaptive_at_largest_budget(self, adaptive_report):
        last = adaptive_report.tables["budgets"][-1]
        assert last["median_adaptive"] <= last["median_nonadaptive"]

    def test_errors_fall_with_budget(self, adaptive_report):
        rows = adaptive_report.tables["budgets"]
        for key in ("median_adaptive", "median_nonadaptive"):
            values = [r[key] for r in rows]
            # each doubling of the budget must not raise the median by more than 10%
            assert all(b <= 1.1 * a for a, b in zip(values, values[1:]))
            assert values[-1] < values[0]

    def test_rerun_identical(self, adaptive_report):
        again = run_scenario(ExperimentConfig.for_scenario("adaptive_compare"))
        assert again.records == adaptive_report.records


def random_density(n_qubits: int) -> np.ndarray:
    rng = np.random.default_rng(n_qubits)
    a = rng.normal(size=(2**n_qubits,) * 2) + 1j * rng.normal(size=(2**n_qubits,) * 2)
    rho = a @ a.conj().T
    return rho / np.trace(rho)
