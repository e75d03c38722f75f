"""Benchmark scenarios built from the toolkit's public pieces.

Each ``run_*`` function maps an :class:`ExperimentConfig` to a
:class:`BenchmarkReport` deterministically: circuits and sampling streams
take their seeds from :func:`stream_seed`, so results do not depend on the
order in which circuits are processed.
"""

from __future__ import annotations

import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import curve_fit

from ..adaptive import AdaptiveConfig, adaptive_exp_extrapolate
from ..circuit import Circuit
from ..densim import (NOISELESS, NoiseModel, Observable, simulate_expectation,
                      simulate_probabilities)
from ..extrapolate import CurvePoint, Estimate, EstimationError, NoiseCurve, by_name
from ..folding import fold, realized_lambda
from ..param_scale import ParamNoiseSpec, ensemble_expectation, ensemble_probabilities
from .clifford import rb_sequence
from .config import ADAPTIVE_METHOD, ConfigError, ExperimentConfig
from .generators import (generate_mirror_rb, generate_random6, generate_rb_circuit,
                         generate_rotation_circuit, stream_seed)
from .report import BenchmarkReport, mean_std

Extrapolator = Callable[[NoiseCurve], Estimate]


# -- noise scaling --------------------------------------------------------------------


@dataclass
class ScaledExecutor:
    """Exact or sampled ``E(lambda)`` of one circuit under one scaling method.

    ``scaling`` is a fold method name, ``"backend"`` (every simulator rate
    scaled by ``lambda``) or ``"param"`` (angle-noise variance scaled by
    ``lambda``; in ``"ensemble"`` mode by averaging over explicitly perturbed
    circuits).  Exact values are cached per realized scale factor.
    """

    circuit: Circuit
    noise: NoiseModel
    observable: Observable | None = None
    scaling: str = "global"
    fold_seed: int = 0
    param_mode: str = "channel"
    members: int = 200
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def folds(self) -> bool:
        return self.scaling not in ("backend", "param")

    def realized(self, lam: float) -> float:
        return realized_lambda(self.circuit.depth(), lam) if self.folds else float(lam)

    def _prepare(self, lam: float) -> tuple[Circuit, NoiseModel]:
        if self.scaling == "backend":
            return self.circuit, self.noise.scaled(lam)
        if self.scaling == "param":
            if self.param_mode == "channel":
                return self.circuit, replace(self.noise, angle_noise=self.noise.angle_noise * lam)
            return self.circuit, self.noise
        return fold(self.circuit, lam, self.scaling, self.fold_seed), self.noise

    def _spec(self, lam: float) -> ParamNoiseSpec:
        return ParamNoiseSpec(self.noise.angle_noise, lam, seed=self.fold_seed)

    def _ensemble(self) -> bool:
        return self.scaling == "param" and self.param_mode == "ensemble"

    def exact(self, lam: float) -> tuple[float, float]:
        """``(realized lambda, exact expectation)``."""
        lam = self.realized(lam)
        key = ("e", round(lam, 12))
        if key not in self._cache:
            if self.observable is None:
                raise ValueError("executor has no observable")
            c, nm = self._prepare(lam)
            if self._ensemble():
                value = ensemble_expectation(c, nm, self.observable, self._spec(lam), self.members)
            else:
                value = simulate_expectation(c, nm, self.observable)
            self._cache[key] = value
        return lam, self._cache[key]

    def probabilities(self, lam: float) -> tuple[float, np.ndarray]:
        lam = self.realized(lam)
        key = ("p", round(lam, 12))
        if key not in self._cache:
            c, nm = self._prepare(lam)
            if self._ensemble():
                self._cache[key] = ensemble_probabilities(c, nm, self._spec(lam), self.members)
            else:
                self._cache[key] = simulate_probabilities(c, nm)
        return lam, self._cache[key]

    def sample(self, lam: float, shots: int | None, rng: np.random.Generator) -> float:
        """Exact value if ``shots`` is None, else a binomial frequency of the
        projector outcome."""
        _, e = self.exact(lam)
        if shots is None:
            return e
        if not self.observable.is_projector:
            raise ValueError("shot sampling needs a projector observable")
        return rng.binomial(int(shots), min(max(e, 0.0), 1.0)) / int(shots)

    def curve(self, lambdas: Sequence[float], shots: int | None = None,
              rng: np.random.Generator | None = None) -> NoiseCurve:
        rng = np.random.default_rng(rng)
        points = []
        for lam in lambdas:
            real = self.realized(lam)
            points.append(CurvePoint(real, self.sample(real, shots, rng), shots))
        return NoiseCurve(tuple(points))


def run_zne(c: Circuit, nm: NoiseModel, obs: Observable, scaling: str, lambdas: Sequence[float],
            extrapolator: Extrapolator | str, shots: int | None = None, seed=None,
            asymptote: float | None = None, fold_seed: int = 0) -> tuple[Estimate, NoiseCurve]:
    """Measure ``E(lambda)`` at every scale factor (exactly or with ``shots``
    samples each) and extrapolate to zero noise.

    The curve records realized scale factors, which for folding are the
    grid points nearest to the requested ones.
    """
    if isinstance(extrapolator, str):
        extrapolator = by_name(extrapolator, asymptote)
    ex = ScaledExecutor(c, nm, obs, scaling, fold_seed)
    curve = ex.curve(lambdas, shots, np.random.default_rng(seed))
    return extrapolator(curve), curve


def adaptive_zne(ex: ScaledExecutor, a: float, iterations: int, shots: int | None = None,
                 rng: np.random.Generator | None = None, lambda_max: float = 5.0) -> Estimate:
    """Adaptive exponential extrapolation on ``ex`` for ``iterations`` rounds.

    In exact mode each round uses one nominal sample per scale factor, so
    only the choice of scale factors matters.  With folding, requested
    factors are snapped to the folding grid.
    """
    rng = np.random.default_rng(rng)
    per_round = 2 if shots is None else 2 * int(shots)
    cfg = AdaptiveConfig(a=a, n_max=per_round * iterations, n_batch=per_round,
                         snap=ex.realized if ex.folds else None, lambda_max=lambda_max)
    return adaptive_exp_extrapolate(
        lambda lam, n: ex.sample(lam, None if shots is None else n, rng), cfg)


def _require_asymptote(cfg: ExperimentConfig) -> float:
    if cfg.asymptote is None:
        raise ConfigError("exponential and adaptive methods need 'asymptote'")
    return cfg.asymptote


def _ground_projector(n: int) -> Observable:
    return Observable.projector("0" * n)


# -- Table II grid --------------------------------------------------------------------


def run_table2(cfg: ExperimentConfig) -> BenchmarkReport:
    """Error (percent of the ideal value 1) of every scaling and extrapolation
    combination on random two-qubit RB circuits, for each noise model."""
    report = BenchmarkReport("table2", cfg.to_dict())
    n = cfg.n_qubits
    obs = _ground_projector(n)
    started = time.perf_counter()
    for i in range(cfg.n_circuits):
        seed = stream_seed(cfg.seed, "table2", i)
        c = generate_rb_circuit(n, cfg.depth, seed)
        rng = np.random.default_rng(seed)
        for noise in cfg.noise:
            nm = noise.to_model(n)
            e1 = simulate_expectation(c, nm, obs)
            r_u = abs(e1 - 1.0) * 100
            common = dict(circuit=i, depth=c.depth(), gates=c.gate_count(), noise=noise.name)
            report.add(**common, scaling="none", method="unmitigated", estimate=e1, error_pct=r_u)
            for scaling in cfg.scaling:
                ex = ScaledExecutor(c, nm, obs, scaling, fold_seed=seed)
                curve = ex.curve(cfg.lambdas, cfg.shots, rng)
                for method in cfg.extrapolation:
                    if method == ADAPTIVE_METHOD:
                        est = adaptive_zne(ex, _require_asymptote(cfg), cfg.adaptive_iterations,
                                           cfg.shots, rng, cfg.lambda_max)
                    else:
                        est = by_name(method, cfg.asymptote)(curve)
                    err = abs(est.value - 1.0) * 100
                    report.add(**common, scaling=scaling, method=method, estimate=est.value,
                               error_pct=err, R_u=r_u, R_m=err)
    cells = report.aggregate("error_pct", ("scaling", "method", "noise"))
    rows: dict[tuple, dict] = {}
    for (scaling, method, noise), stats in cells.items():
        row = rows.setdefault((scaling, method), {"scaling": scaling, "method": method})
        row[f"{noise}_mean"] = stats["mean"]
        row[f"{noise}_std"] = stats["std"]
    report.tables["table"] = list(rows.values())
    report.summary = {
        "cells": {"/".join(k): v for k, v in cells.items()},
        "mean_depth": float(np.mean(report.column("depth", method="unmitigated"))),
        "mean_gates": float(np.mean(report.column("gates", method="unmitigated"))),
        "seconds": time.perf_counter() - started,
    }
    return report


# -- RB decay -------------------------------------------------------------------------


def fit_decay(depths: Sequence[float], values: Sequence[float],
              floor: float | None = None) -> dict:
    """Least-squares fit of ``A f**L + B``; ``floor`` fixes ``B`` when given."""
    x = np.asarray(depths, dtype=float)
    y = np.asarray(values, dtype=float)
    try:
        if floor is None:
            (amp, f, b), _ = curve_fit(lambda L, A, f, B: A * f**L + B, x, y,
                                       p0=(y.max() - y.min() + 1e-3, 0.98, y.min()), maxfev=20000)
        else:
            (amp, f), _ = curve_fit(lambda L, A, f: A * f**L + floor, x, y,
                                    p0=(1.0 - floor, 0.98), maxfev=20000)
            b = floor
    except (RuntimeError, ValueError, TypeError) as exc:
        # TypeError is how scipy reports fewer data points than parameters
        raise EstimationError(f"decay fit failed: {exc}") from exc
    if not np.all(np.isfinite([amp, f, b])):
        raise EstimationError("decay fit returned non-finite parameters")
    return {"A": float(amp), "f": float(f), "B": float(b)}


def run_rb_decay(cfg: ExperimentConfig) -> BenchmarkReport:
    """Survival probability against circuit depth, unmitigated and mitigated,
    each fitted with an exponential decay."""
    report = BenchmarkReport("rb_decay", cfg.to_dict())
    if not cfg.lengths:
        raise ConfigError("rb_decay needs a non-empty 'lengths' list")
    n = cfg.n_qubits
    obs = _ground_projector(n)
    nm = cfg.noise[0].to_model(n)
    scaling, method = cfg.scaling[0], cfg.extrapolation[0]
    extrapolator = by_name(method, cfg.asymptote)
    started = time.perf_counter()
    for m in cfg.lengths:
        for j in range(cfg.n_circuits):
            seed = stream_seed(cfg.seed, f"rb_decay/{m}", j)
            c = rb_sequence(int(m), np.random.default_rng(seed))
            est, curve = run_zne(c, nm, obs, scaling, cfg.lambdas, extrapolator, cfg.shots,
                                 seed, fold_seed=seed)
            report.add(length=int(m), circuit=j, depth=c.depth(), gates=c.gate_count(),
                       unmitigated=float(curve.values[0]), mitigated=float(est.value))
    depths = report.column("depth")
    floor = 1.0 / 2**n if cfg.fix_decay_floor else None
    fits = {kind: fit_decay(depths, report.column(kind), floor)
            for kind in ("unmitigated", "mitigated")}
    report.tables["decay"] = [
        {"length": m, "mean_depth": float(np.mean(report.column("depth", length=m))),
         "unmitigated": float(np.mean(report.column("unmitigated", length=m))),
         "mitigated": float(np.mean(report.column("mitigated", length=m)))}
        for m in cfg.lengths]
    report.summary = {"fit": fits, "f_unmitigated": fits["unmitigated"]["f"],
                      "f_mitigated": fits["mitigated"]["f"],
                      "floor_fixed": cfg.fix_decay_floor,
                      "gates_per_layer": float(np.sum(report.column("gates")) / np.sum(depths)),
                      "seconds": time.perf_counter() - started}
    return report


# -- random six-qubit circuits ----------------------------------------------------------


def extrapolate_vector(lambdas: Sequence[float], values: np.ndarray, extrapolator: Extrapolator) -> np.ndarray:
    """Extrapolate every column of ``values`` (one row per scale factor)."""
    values = np.asarray(values, dtype=float)
    return np.array([extrapolator(NoiseCurve.from_arrays(lambdas, values[:, k])).value
                     for k in range(values.shape[1])])


def run_random6_study(cfg: ExperimentConfig) -> BenchmarkReport:
    """L2 distance of the output distribution from the noiseless one, with and
    without mitigation, over random dense circuits."""
    report = BenchmarkReport("random6", cfg.to_dict())
    n = cfg.n_qubits
    nm = cfg.noise[0].to_model(n)
    scaling = cfg.scaling[0]
    extrapolator = by_name(cfg.extrapolation[0], cfg.asymptote)
    started = time.perf_counter()
    for i in range(cfg.n_circuits):
        seed = stream_seed(cfg.seed, "random6", i)
        c = generate_random6(seed, n, int(cfg.depth))
        ideal = simulate_probabilities(c)
        ex = ScaledExecutor(c, nm, None, scaling, fold_seed=seed)
        lams, rows = zip(*(ex.probabilities(lam) for lam in cfg.lambdas))
        mitigated = extrapolate_vector(lams, np.array(rows), extrapolator)
        r_u = float(np.linalg.norm(rows[0] - ideal))
        r_m = float(np.linalg.norm(mitigated - ideal))
        report.add(circuit=i, gates=c.gate_count(), R_u=r_u, R_m=r_m)
    ratios = np.array(report.column("improvement"))
    counts, edges = np.histogram(ratios, bins=np.arange(0.0, 8.5, 0.5))
    report.tables["histogram"] = [{"ratio_low": float(lo), "ratio_high": float(hi), "count": int(k)}
                                  for lo, hi, k in zip(edges[:-1], edges[1:], counts)]
    report.summary = {"unmitigated": mean_std(report.column("R_u")),
                      "mitigated": mean_std(report.column("R_m")),
                      "improvement": mean_std(ratios),
                      "fraction_improvement_1_to_7": float(np.mean((ratios >= 1) & (ratios <= 7))),
                      "seconds": time.perf_counter() - started}
    return report


# -- parameter-noise scaling ------------------------------------------------------------


def box_stats(values: Sequence[float]) -> dict:
    q = np.percentile(np.asarray(values, dtype=float), [0, 25, 50, 75, 100])
    return dict(zip(("min", "q1", "median", "q3", "max"), map(float, q)))


def run_param_noise_study(cfg: ExperimentConfig) -> BenchmarkReport:
    """Unmitigated error against ZNE by each configured scaling arm, for a
    random computational-basis projector on random rotation circuits."""
    report = BenchmarkReport("param_noise", cfg.to_dict())
    n = cfg.n_qubits
    nm = cfg.noise[0].to_model(n)
    extrapolator = by_name(cfg.extrapolation[0], cfg.asymptote)
    started = time.perf_counter()
    for i in range(cfg.n_circuits):
        seed = stream_seed(cfg.seed, "param_noise", i)
        c = generate_rotation_circuit(seed, n, int(cfg.depth))
        index = int(np.random.default_rng(seed).integers(2**n))
        obs = Observable.basis(index, n)
        ideal = simulate_expectation(c, NOISELESS, obs)
        r_u = abs(simulate_expectation(c, nm, obs) - ideal)
        for scaling in cfg.scaling:
            ex = ScaledExecutor(c, nm, obs, scaling, fold_seed=seed, param_mode=cfg.param_mode,
                                members=cfg.members)
            est = extrapolator(ex.curve(cfg.lambdas))
            report.add(circuit=i, observable=index, arm=scaling, R_u=r_u,
                       R_m=abs(est.value - ideal))
    arms = {"unmitigated": box_stats(report.column("R_u", arm=cfg.scaling[0]))}
    for scaling in cfg.scaling:
        arms[scaling] = box_stats(report.column("R_m", arm=scaling))
    report.tables["boxes"] = [{"arm": k, **v} for k, v in arms.items()]
    report.summary = {"boxes": arms, "seconds": time.perf_counter() - started}
    return report


# -- adaptive versus non-adaptive ---------------------------------------------------------


def run_adaptive_compare(cfg: ExperimentConfig) -> BenchmarkReport:
    """Monte-Carlo error of adaptive and non-adaptive exponential ZNE at equal
    sample budgets, with noise scaled on the simulator and binomial shot noise."""
    report = BenchmarkReport("adaptive_compare", cfg.to_dict())
    if not cfg.budgets:
        raise ConfigError("adaptive_compare needs a non-empty 'budgets' list")
    a = _require_asymptote(cfg)
    n = cfg.n_qubits
    nm = cfg.noise[0].to_model(n)
    obs = _ground_projector(n)
    scaling = cfg.scaling[0]
    executors = [ScaledExecutor(generate_mirror_rb(stream_seed(cfg.seed, "adaptive_compare", i),
                                                   n, int(cfg.depth)), nm, obs, scaling)
                 for i in range(cfg.n_circuits)]
    started = time.perf_counter()
    for budget in cfg.budgets:
        per_point = budget // len(cfg.lambdas)
        per_round = budget // cfg.adaptive_iterations
        if per_point < 1 or per_round < 2:
            raise ConfigError(f"budget {budget} too small for the scale factors and iterations")
        for t in range(cfg.trials):
            ex = executors[t % len(executors)]
            rng = np.random.default_rng(stream_seed(cfg.seed, f"adaptive_compare/{budget}", t))
            curve = ex.curve(cfg.lambdas, per_point, rng)
            try:
                e_na = by_name("exp", a)(curve).value
                failed = False
            except EstimationError:
                e_na, failed = float(curve.values[0]), True
            acfg = AdaptiveConfig(a=a, n_max=budget, n_batch=per_round, lambda_max=cfg.lambda_max)
            est = adaptive_exp_extrapolate(lambda lam, k: ex.sample(lam, k, rng), acfg)
            report.add(budget=budget, trial=t, circuit=t % len(executors),
                       err_nonadaptive=abs(e_na - 1.0), err_adaptive=abs(est.value - 1.0),
                       nonadaptive_failed=failed, adaptive_fit_failures=est.info["fit_failures"])
    rows = []
    for budget in cfg.budgets:
        med_na = float(np.median(report.column("err_nonadaptive", budget=budget)))
        med_ad = float(np.median(report.column("err_adaptive", budget=budget)))
        rows.append({"budget": budget, "median_nonadaptive": med_na, "median_adaptive": med_ad,
                     "adaptive_wins": med_ad <= med_na})
    report.tables["budgets"] = rows
    report.summary = {"budgets": rows,
                      "fraction_adaptive_wins": float(np.mean([r["adaptive_wins"] for r in rows])),
                      "seconds": time.perf_counter() - started}
    return report


RUNNERS: dict[str, Callable[[ExperimentConfig], BenchmarkReport]] = {
    "table2": run_table2,
    "rb_decay": run_rb_decay,
    "random6": run_random6_study,
    "param_noise": run_param_noise_study,
    "adaptive_compare": run_adaptive_compare,
}


def run_scenario(cfg: ExperimentConfig) -> BenchmarkReport:
    return RUNNERS[cfg.scenario](cfg)
