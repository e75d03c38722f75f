"""Adaptive zero-noise extrapolation.

The exponential specialization assumes ``E(lambda) = a + b exp(-c lambda)``
with ``a`` known and spends its sample budget on two scale factors: the
minimum ``lambda_1`` and ``lambda_2 = lambda_1 + alpha / c``, where ``alpha``
solves ``exp(x) (x - 1) = 1``.

An executor is any callable ``executor(lam, shots) -> float`` returning an
unbiased estimate of ``E(lam)`` whose variance is ``sigma0**2 / shots``.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .extrapolate import CurvePoint, Estimate, EstimationError, NoiseCurve

Executor = Callable[[float, int], float]

C_BOUNDS = (1e-6, 1e3)


def _alpha_residual(x: float) -> float:
    return math.exp(x) * (x - 1.0) - 1.0


def solve_alpha(tol: float = 1e-13) -> float:
    """Positive root of ``exp(x) (x - 1) - 1`` by bisection."""
    lo, hi = 1.0, 2.0  # residual is -1 at 1 and e^2 - 1 at 2
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _alpha_residual(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def solve_alpha_newton(x0: float = 1.5, tol: float = 1e-14, max_iter: int = 50) -> float:
    x = x0
    for _ in range(max_iter):
        step = _alpha_residual(x) / (math.exp(x) * x)
        x -= step
        if abs(step) < tol:
            break
    return x


ALPHA = solve_alpha()


def two_point_exp_fit(lambda1: float, y1: float, lambda2: float, y2: float,
                      a: float) -> tuple[float, float]:
    """``(b, c)`` of the unique ``a + b exp(-c lambda)`` through both points."""
    if lambda1 == lambda2:
        raise EstimationError("two-point fit needs distinct scale factors")
    r1, r2 = y1 - a, y2 - a
    if r1 == 0 or r2 == 0 or (r1 > 0) != (r2 > 0):
        raise EstimationError("points straddle or touch the asymptote")
    span = lambda2 - lambda1
    c = math.log(r1 / r2) / span
    sign = 1.0 if r1 > 0 else -1.0
    b = sign * abs(r1) ** (lambda2 / span) * abs(r2) ** (-lambda1 / span)
    return b, c


def mse_b(lambda1: float, lambda2: float, n1: float, n2: float, c: float,
          sigma0_sq: float) -> float:
    """Leading-order mean squared error of the two-point ``b`` estimate."""
    span = lambda2 - lambda1
    return sigma0_sq / span**2 * (
        lambda2**2 * math.exp(2 * c * lambda1) / n1 + lambda1**2 * math.exp(2 * c * lambda2) / n2
    )


def optimal_fraction(lambda1: float, lambda2: float, c: float) -> float:
    """Share of the budget at ``lambda1`` that minimizes :func:`mse_b`.

    Minimizing ``A/N1 + B/N2`` at fixed ``N1 + N2`` gives ``N_i ~ sqrt(A_i)``.
    """
    w1 = lambda2
    w2 = lambda1 * math.exp(c * (lambda2 - lambda1))
    return w1 / (w1 + w2)


def round_split(total: int, fraction: float) -> tuple[int, int]:
    """Integer split of ``total``: floor both, remainder to the larger fractional part."""
    x1 = total * fraction
    x2 = total - x1
    n1, n2 = math.floor(x1), math.floor(x2)
    if n1 + n2 < total:
        if x1 - n1 >= x2 - n2:
            n1 += total - n1 - n2
        else:
            n2 += total - n1 - n2
    return n1, n2


def optimal_allocation(lambda1: float, lambda2: float, c: float, n_max: int) -> tuple[int, int]:
    if not lambda2 > lambda1:
        raise ValueError("need lambda2 > lambda1")
    if n_max < 2:
        raise ValueError("budget must be at least 2")
    return round_split(n_max, optimal_fraction(lambda1, lambda2, c))


def pseudocode_split(c: float, lambda1: float, alpha: float = ALPHA) -> tuple[float, float]:
    """Per-iteration budget shares as printed in the adaptive exponential loop.

    These equal the printed two-point allocation at ``lambda2 = lambda1 + alpha / c``,
    which is the mirror image of :func:`optimal_fraction` (the two shares swap).
    """
    x = c * lambda1
    denom = x + alpha - 1.0
    return (x / alpha) / denom, (1.0 + x / alpha) * (alpha - 1.0) / denom


def fit_exp_known_a(curve: NoiseCurve, a: float) -> tuple[float, float]:
    """Shot-weighted least-squares ``(b, c)`` over all points, with ``a`` fixed."""
    pts = curve.merged()
    lam, ys = pts.lambdas, pts.values
    if len(lam) < 2:
        raise EstimationError("need two distinct scale factors to fit the exponential")
    if len(lam) == 2:
        return two_point_exp_fit(lam[0], ys[0], lam[1], ys[1], a)
    shots = pts.shots
    w = np.ones(len(lam)) if shots is None else shots.astype(float)
    resid = ys - a
    if np.all(resid > 0):
        sign = 1.0
    elif np.all(resid < 0):
        sign = -1.0
    else:
        raise EstimationError("data straddle the asymptote")
    # seed from the log-space line, weighting by (y - a)^2 N ~ inverse log-variance
    lw = w * resid**2
    x = np.vander(lam, 2, increasing=True) * np.sqrt(lw)[:, None]
    (z0, z1), *_ = np.linalg.lstsq(x, np.log(np.abs(resid)) * np.sqrt(lw), rcond=None)
    sw = np.sqrt(w)

    def residuals(theta):
        return sw * (a + sign * np.exp(theta[0] - theta[1] * lam) - ys)

    fit = least_squares(residuals, [z0, -z1], method="lm", xtol=1e-12, ftol=1e-12, max_nfev=400)
    if not np.all(np.isfinite(fit.x)):
        raise EstimationError("exponential fit diverged")
    return sign * math.exp(fit.x[0]), float(fit.x[1])


def _clamp(c: float) -> float:
    return min(max(c, C_BOUNDS[0]), C_BOUNDS[1])


@dataclass
class AdaptiveConfig:
    """Settings for :func:`adaptive_exp_extrapolate`.

    ``split`` is ``"optimal"`` (MSE-minimizing shares at the chosen
    ``lambda2``) or ``"pseudocode"`` (the printed per-iteration shares).
    ``snap`` maps a requested scale factor to one the executor can realize,
    e.g. the folding grid.
    """

    a: float
    n_max: int
    n_batch: int
    lambda1: float = 1.0
    c_init: float = 1.0
    split: str = "optimal"
    snap: Callable[[float], float] | None = None
    lambda_max: float = math.inf
    alpha: float = ALPHA
    sigma0_sq: float | None = None

    def __post_init__(self):
        if self.n_batch < 2:
            raise ValueError("n_batch must be at least 2")
        if self.n_batch > self.n_max:
            raise ValueError("n_batch cannot exceed n_max")
        if self.lambda1 < 1:
            raise ValueError("lambda1 must be >= 1")
        if self.split not in ("optimal", "pseudocode"):
            raise ValueError(f"unknown split rule {self.split!r}")


@dataclass
class _ExpState:
    config: AdaptiveConfig
    c: float
    b: float | None = None
    failures: int = 0
    lambda2_history: list = field(default_factory=list)

    def next_pair(self) -> tuple[float, float, int, int]:
        cfg = self.config
        lam1 = cfg.lambda1
        lam2 = min(lam1 + cfg.alpha / self.c, cfg.lambda_max)
        if cfg.snap is not None:
            lam2 = cfg.snap(lam2)
        if cfg.split == "pseudocode":
            f1 = pseudocode_split(self.c, lam1, cfg.alpha)[0]
        elif lam2 > lam1:
            f1 = optimal_fraction(lam1, lam2, self.c)
        else:
            f1 = 0.5
        n1, n2 = round_split(cfg.n_batch, f1)
        if n1 == 0:
            n1, n2 = 1, n2 - 1
        elif n2 == 0:
            n1, n2 = n1 - 1, 1
        return lam1, lam2, n1, n2

    def refit(self, curve: NoiseCurve) -> None:
        try:
            b, c = fit_exp_known_a(curve, self.config.a)
        except EstimationError:
            self.failures += 1
            return
        self.b, self.c = b, _clamp(c)

    def estimate(self, curve: NoiseCurve, used: int) -> Estimate:
        a = self.config.a
        b = self.b
        if b is None:
            # no successful fit: project the lambda1 data back with the current c
            pts = curve.merged()
            i = int(np.argmin(pts.lambdas))
            b = (pts.values[i] - a) * math.exp(self.c * pts.lambdas[i])
        info = {"samples_used": used, "fit_failures": self.failures,
                "lambda2_history": list(self.lambda2_history), "n_points": len(curve)}
        return Estimate(a + b, {"a": a, "b": b, "c": self.c}, None, "adaptive-exp", info)


def adaptive_exp_extrapolate(executor: Executor, config: AdaptiveConfig) -> Estimate:
    """Adaptive exponential extrapolation with a known asymptote.

    Each iteration measures ``lambda1`` and ``lambda2 = lambda1 + alpha / c``
    with ``n_batch`` samples in total, then refits ``c`` on every point so far.
    Stops once ``n_max`` samples are spent (overshoot is below ``n_batch``).
    """
    state = _ExpState(config, config.c_init)
    points: list[CurvePoint] = []
    used = 0
    while used < config.n_max:
        lam1, lam2, n1, n2 = state.next_pair()
        state.lambda2_history.append(lam2)
        used += n1 + n2
        y1 = executor(lam1, n1)
        y2 = executor(lam2, n2)
        points.append(CurvePoint(lam1, y1, n1))
        points.append(CurvePoint(lam2, y2, n2))
        state.refit(NoiseCurve(tuple(points)))
    est = state.estimate(NoiseCurve(tuple(points)), used)
    if config.sigma0_sq is not None:
        tot = NoiseCurve(tuple(points)).merged()
        if len(tot) == 2 and tot.shots is not None:
            est.variance = mse_b(*tot.lambdas, *tot.shots, state.c, config.sigma0_sq)
    return est


# -- generic loop ---------------------------------------------------------------------

ScalePolicy = Callable[[Estimate | None, NoiseCurve | None], float | Sequence[float]]
SamplesPolicy = Callable[[Estimate | None, NoiseCurve | None], int | Sequence[int]]
Model = Callable[[NoiseCurve], Estimate]


def generic_adaptive(executor: Executor, model: Model, initial_lambdas: Sequence[float],
                     initial_shots: Sequence[int], n_max: int, new_scale: ScalePolicy,
                     new_samples: SamplesPolicy) -> Estimate:
    """Measure the initial points, then alternate fit / choose / measure until
    ``n_max`` extra samples are spent.

    Policies see the latest fit (None before any data exist) and the curve,
    and may return one scale factor or a batch.  The model is fitted on the
    curve with repeated scale factors pooled.  The returned estimate comes
    from a final fit over every measurement.
    """
    if len(initial_lambdas) != len(initial_shots):
        raise ValueError("initial_lambdas and initial_shots differ in length")
    points: list[CurvePoint] = []
    for lam, n in zip(initial_lambdas, initial_shots):
        if lam < 1:
            raise ValueError(f"scale factor {lam} < 1")
        points.append(CurvePoint(float(lam), executor(lam, n), int(n)))

    def current() -> NoiseCurve | None:
        return NoiseCurve(tuple(points)) if points else None

    used = 0
    while used < n_max:
        curve = current()
        est = model(curve.merged()) if curve is not None else None
        lams = np.atleast_1d(new_scale(est, curve)).tolist()
        shots = np.atleast_1d(new_samples(est, curve)).tolist()
        if len(lams) != len(shots):
            raise ValueError("scale and sample policies disagree on batch size")
        if any(lam < 1 for lam in lams):
            raise ValueError(f"policy proposed a scale factor below 1: {lams}")
        used += int(sum(shots))
        for lam, n in zip(lams, shots):
            points.append(CurvePoint(float(lam), executor(lam, int(n)), int(n)))
    curve = current()
    if curve is None:
        raise EstimationError("no measurements were taken")
    est = model(curve.merged())
    est.info = dict(est.info, samples_used=used, n_points=len(points))
    return est


class ExponentialPolicy:
    """Policies and model that make :func:`generic_adaptive` run the
    adaptive exponential loop.  Pass the same instance as ``model``,
    ``new_scale`` and ``new_samples`` (via the bound methods)."""

    def __init__(self, config: AdaptiveConfig):
        self.state = _ExpState(config, config.c_init)
        self._pending: tuple[float, float, int, int] | None = None

    def model(self, curve: NoiseCurve) -> Estimate:
        self.state.refit(curve)
        return self.state.estimate(curve, 0)

    def new_scale(self, est, curve) -> list[float]:
        self._pending = self.state.next_pair()
        lam1, lam2, _, _ = self._pending
        self.state.lambda2_history.append(lam2)
        return [lam1, lam2]

    def new_samples(self, est, curve) -> list[int]:
        _, _, n1, n2 = self._pending
        return [n1, n2]


def extrapolate_nonadaptive(executor: Executor, lambdas: Sequence[float], shots: int | Sequence[int],
                            model: Model) -> tuple[Estimate, NoiseCurve]:
    """Measure every scale factor once, then fit."""
    if np.ndim(shots) == 0:
        shots = [int(shots)] * len(lambdas)
    curve = NoiseCurve(tuple(CurvePoint(float(lam), executor(lam, n), int(n))
                             for lam, n in zip(lambdas, shots)))
    return model(curve), curve
