"""Zero-noise estimators on a measured noise curve.

Every estimator takes a :class:`NoiseCurve` and returns an :class:`Estimate`
whose ``value`` is the extrapolated expectation at ``lambda = 0``.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

LOG_EPS = 1e-12
NONLINEAR_MAX_ITER = 200
NONLINEAR_XTOL = 1e-10


class EstimationError(RuntimeError):
    """The data cannot support the requested estimator."""


@dataclass(frozen=True)
class CurvePoint:
    lam: float
    y: float
    shots: int | None = None
    sigma: float | None = None


@dataclass(frozen=True)
class NoiseCurve:
    points: tuple[CurvePoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise ValueError("a noise curve needs at least one point")

    @classmethod
    def from_arrays(cls, lambdas: Iterable[float], ys: Iterable[float],
                    shots: Iterable[int | None] | None = None,
                    sigmas: Iterable[float | None] | None = None) -> NoiseCurve:
        lambdas, ys = list(lambdas), list(ys)
        if len(lambdas) != len(ys):
            raise ValueError("lambdas and ys differ in length")
        shots = [None] * len(ys) if shots is None else list(shots)
        sigmas = [None] * len(ys) if sigmas is None else list(sigmas)
        return cls(tuple(
            CurvePoint(float(l), float(y), n, None if s is None else float(s))
            for l, y, n, s in zip(lambdas, ys, shots, sigmas)
        ))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([p.y for p in self.points])

    @property
    def sigmas(self) -> np.ndarray | None:
        """Per-point standard deviations, or None unless every point has one."""
        if any(p.sigma is None for p in self.points):
            return None
        return np.array([p.sigma for p in self.points])

    @property
    def shots(self) -> np.ndarray | None:
        if any(p.shots is None for p in self.points):
            return None
        return np.array([p.shots for p in self.points])

    def merged(self) -> NoiseCurve:
        """Pool repeated scale factors into one shot-weighted point each."""
        groups: dict[float, list[CurvePoint]] = {}
        for p in self.points:
            groups.setdefault(p.lam, []).append(p)
        out = []
        for lam, pts in groups.items():
            if len(pts) == 1:
                out.append(pts[0])
                continue
            w = np.array([p.shots if p.shots else 1 for p in pts], dtype=float)
            y = float(np.dot(w, [p.y for p in pts]) / w.sum())
            total = int(w.sum()) if all(p.shots for p in pts) else None
            sig = None
            if all(p.sigma is not None for p in pts):
                var = np.array([p.sigma**2 for p in pts])
                sig = float(np.sqrt(np.dot(w**2, var)) / w.sum())
            out.append(CurvePoint(lam, y, total, sig))
        return NoiseCurve(tuple(out))

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["lambda", "y", "shots", "sigma"])
        for p in self.points:
            writer.writerow([repr(p.lam), repr(p.y),
                             "" if p.shots is None else p.shots,
                             "" if p.sigma is None else repr(p.sigma)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source: str | Path) -> NoiseCurve:
        """Read from a path, or from CSV text if ``source`` contains a newline."""
        text = source if isinstance(source, str) and "\n" in source else Path(source).read_text()
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("noise curve CSV has no data rows")
        missing = {"lambda", "y"} - set(rows[0])
        if missing:
            raise ValueError(f"noise curve CSV lacks column(s): {sorted(missing)}")
        points = []
        for row in rows:
            shots = (row.get("shots") or "").strip()
            sigma = (row.get("sigma") or "").strip()
            points.append(CurvePoint(float(row["lambda"]), float(row["y"]),
                                     int(float(shots)) if shots else None,
                                     float(sigma) if sigma else None))
        return cls(tuple(points))


@dataclass
class Estimate:
    value: float
    params: dict = field(default_factory=dict)
    variance: float | None = None
    model: str = ""
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"value": self.value, "variance": self.variance, "model": self.model,
                "params": _jsonable(self.params), "info": _jsonable(self.info)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


# -- polynomial family ----------------------------------------------------------------


def _polyfit(lambdas: np.ndarray, ys: np.ndarray, degree: int,
             weights: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares coefficients (lowest order first) and the design matrix."""
    if degree < 0:
        raise ValueError("degree must be non-negative")
    m = len(lambdas)
    if m < degree + 1:
        raise EstimationError(f"degree {degree} needs at least {degree + 1} points, got {m}")
    if len(np.unique(lambdas)) < degree + 1:
        raise EstimationError(f"degree {degree} needs at least {degree + 1} distinct scale factors")
    x = np.vander(lambdas, degree + 1, increasing=True)
    if weights is None:
        coef, _, rank, _ = np.linalg.lstsq(x, ys, rcond=None)
    else:
        sw = np.sqrt(weights)
        coef, _, rank, _ = np.linalg.lstsq(x * sw[:, None], ys * sw, rcond=None)
    if rank < degree + 1:
        raise EstimationError("design matrix is rank deficient")
    return coef, x


def fit_polynomial(curve: NoiseCurve, degree: int, weighted: bool = False) -> Estimate:
    """Least-squares polynomial in ``lambda``; the estimate is the intercept.

    The intercept variance uses the per-point ``sigma`` values when every point
    carries one. ``weighted=True`` switches to inverse-variance weights.
    """
    lam, ys, sig = curve.lambdas, curve.values, curve.sigmas
    if weighted and sig is None:
        raise ValueError("weighted fit needs sigma on every point")
    weights = None if not weighted else 1.0 / sig**2
    coef, x = _polyfit(lam, ys, degree, weights)
    variance = None
    if sig is not None:
        if weighted:
            cov = np.linalg.inv(x.T @ (x * weights[:, None]))
        else:
            xtx_inv = np.linalg.inv(x.T @ x)
            cov = xtx_inv @ (x.T * sig**2) @ x @ xtx_inv
        variance = float(cov[0, 0])
    return Estimate(float(coef[0]), {"coefficients": coef.tolist()}, variance,
                    f"poly({degree})")


def extrapolate_linear(curve: NoiseCurve, sigma2: float | None = None) -> Estimate:
    """Closed-form OLS intercept ``ybar - (S_ly / S_ll) lbar``.

    ``sigma2`` is a common per-point variance; without it the points' own
    ``sigma`` are used when they are all equal.
    """
    lam, ys = curve.lambdas, curve.values
    if len(lam) < 2:
        raise EstimationError("linear extrapolation needs at least two points")
    lbar, ybar = lam.mean(), ys.mean()
    s_ll = float(np.sum((lam - lbar) ** 2))
    if s_ll == 0.0:
        raise EstimationError("all scale factors are equal")
    s_ly = float(np.sum((lam - lbar) * (ys - ybar)))
    slope = s_ly / s_ll
    intercept = ybar - slope * lbar
    if sigma2 is None and curve.sigmas is not None and np.ptp(curve.sigmas) == 0:
        sigma2 = float(curve.sigmas[0] ** 2)
    variance = None if sigma2 is None else sigma2 * (1.0 / len(lam) + lbar**2 / s_ll)
    return Estimate(float(intercept), {"intercept": float(intercept), "slope": slope},
                    variance, "linear")


def richardson_weights(lambdas: Sequence[float]) -> np.ndarray:
    """Lagrange weights ``prod_{i != k} l_i / (l_i - l_k)`` of the value at zero."""
    lam = np.asarray(lambdas, dtype=float)
    if len(np.unique(lam)) != len(lam):
        raise EstimationError("Richardson extrapolation needs distinct scale factors")
    w = np.ones(len(lam))
    for k in range(len(lam)):
        for i in range(len(lam)):
            if i != k:
                w[k] *= lam[i] / (lam[i] - lam[k])
    return w


def extrapolate_richardson(curve: NoiseCurve) -> Estimate:
    """Value at zero of the interpolating polynomial of degree ``m - 1``."""
    w = richardson_weights(curve.lambdas)
    value = float(np.dot(w, curve.values))
    sig = curve.sigmas
    variance = None if sig is None else float(np.dot(w**2, sig**2))
    return Estimate(value, {"weights": w.tolist()}, variance, "richardson")


def richardson_variance(m: int, sigma2: float) -> float:
    """Variance of the estimator for ``lambda_k = k lambda_1`` and equal point variance."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return sigma2 * (math.comb(2 * m, m) - 1)


# -- poly-exponential family ----------------------------------------------------------


def _majority_sign(residuals: np.ndarray) -> float:
    pos = int(np.sum(residuals > 0))
    neg = int(np.sum(residuals < 0))
    return 1.0 if pos >= neg else -1.0


def _logspace_fit(lam: np.ndarray, ys: np.ndarray, degree: int, a: float, eps: float,
                  weights: np.ndarray | None) -> tuple[float, np.ndarray]:
    resid = ys - a
    if np.all(resid == 0):
        raise EstimationError("every data point equals the asymptote")
    sign = _majority_sign(resid)
    z_data = np.log(np.abs(resid) + eps)
    coef, _ = _polyfit(lam, z_data, degree, weights)
    return sign, coef


def _polyexp_model(lam: np.ndarray, a: float, sign: float, z: np.ndarray) -> np.ndarray:
    return a + sign * np.exp(np.polynomial.polynomial.polyval(lam, z))


def extrapolate_polyexp(curve: NoiseCurve, degree: int, asymptote: float | None = None,
                        eps: float = LOG_EPS, weighted: bool = False) -> Estimate:
    """``a +/- exp(z(lambda))`` with ``z`` a polynomial of the given degree.

    A known asymptote turns this into a polynomial fit of ``log|y - a|``.
    Otherwise ``a`` is fitted too, by nonlinear least squares started from
    the log-space solution with ``a`` seeded at the largest-``lambda`` value.
    """
    lam, ys = curve.lambdas, curve.values
    if weighted:
        sig = curve.sigmas
        if sig is None:
            raise ValueError("weighted fit needs sigma on every point")

    if asymptote is not None:
        weights = None
        if weighted:
            weights = (ys - asymptote) ** 2 / sig**2
        sign, z = _logspace_fit(lam, ys, degree, asymptote, eps, weights)
        value = asymptote + sign * math.exp(z[0])
        return Estimate(value, {"a": asymptote, "sign": sign, "z": z.tolist()}, None,
                        f"polyexp({degree})")

    if len(lam) < degree + 2:
        raise EstimationError(f"fitting the asymptote needs at least {degree + 2} points")
    a0 = float(ys[np.argmax(lam)])
    keep = np.abs(ys - a0) > 0
    if np.sum(keep) < degree + 1:
        raise EstimationError("not enough points away from the seeded asymptote")
    sign, z0 = _logspace_fit(lam[keep], ys[keep], degree, a0, eps, None)

    def residuals(theta):
        return _polyexp_model(lam, theta[0], sign, theta[1:]) - ys

    if weighted:
        base_residuals = residuals

        def residuals(theta):
            return base_residuals(theta) / sig

    fit = least_squares(residuals, np.concatenate([[a0], z0]), method="lm",
                        xtol=NONLINEAR_XTOL, ftol=NONLINEAR_XTOL,
                        max_nfev=NONLINEAR_MAX_ITER * (degree + 3))
    if not fit.success or not np.all(np.isfinite(fit.x)):
        raise EstimationError(f"nonlinear fit did not converge: {fit.message}")
    a, z = float(fit.x[0]), fit.x[1:]
    value = a + sign * math.exp(z[0])
    return Estimate(value, {"a": a, "sign": sign, "z": z.tolist()}, None,
                    f"polyexp({degree})", {"nfev": fit.nfev})


def extrapolate_exp(curve: NoiseCurve, asymptote: float | None = None,
                    eps: float = LOG_EPS, weighted: bool = False) -> Estimate:
    """``a + b exp(-c lambda)``, the degree-one poly-exponential."""
    est = extrapolate_polyexp(curve, 1, asymptote, eps, weighted)
    z0, z1 = est.params["z"]
    params = dict(est.params, b=est.params["sign"] * math.exp(z0), c=-z1)
    return Estimate(est.value, params, est.variance, "exp", est.info)


def by_name(method: str, asymptote: float | None = None):
    """Resolve ``linear``, ``poly:d``, ``richardson``, ``exp`` or ``polyexp:d`` to a callable."""
    name, _, arg = method.partition(":")
    name = name.strip().lower()
    if name == "linear":
        return extrapolate_linear
    if name in ("poly", "polynomial"):
        degree = int(arg)
        return lambda curve: fit_polynomial(curve, degree)
    if name == "quadratic":
        return lambda curve: fit_polynomial(curve, 2)
    if name == "richardson":
        return extrapolate_richardson
    if name in ("exp", "exponential"):
        return lambda curve: extrapolate_exp(curve, asymptote)
    if name == "polyexp":
        degree = int(arg)
        return lambda curve: extrapolate_polyexp(curve, degree, asymptote)
    raise ValueError(f"unknown extrapolation method {method!r}")
