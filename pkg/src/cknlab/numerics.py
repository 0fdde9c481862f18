"""Quadrature on (0, inf), Gamma, scalar minimization and a small eigensolver."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import DomainError, GammaOverflow, NoConvergence, NonIntegrable, NotPositiveDefinite

ABS_FLOOR = 1e-300
MAX_DEPTH = 12

# t = log r is scanned on this window; exp(-745) is the smallest subnormal
_T_MIN, _T_MAX = -745.0, 709.0
_CUT = 46.0  # drop nodes whose magnitude is below exp(-46) of the peak


@dataclass(frozen=True)
class Integrand:
    """A real function on (0, inf) with declared behaviour at both ends.

    ``log_evaluator`` and ``log_bound``, when given, take ``t = log r`` and
    return ``f(e^t) * e^t`` and an upper bound on its log-magnitude; they let
    the integrator avoid overflow far out in either tail.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    zero_exponent: float
    tail_class: tuple[str, float]
    log_evaluator: Callable[[np.ndarray], np.ndarray] | None = None
    log_bound: Callable[[np.ndarray], np.ndarray] | None = None


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int


@dataclass(frozen=True)
class SymmetricPencil:
    a_matrix: np.ndarray
    b_matrix: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a_matrix, dtype=float)
        b = np.asarray(self.b_matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
            raise DomainError("pencil matrices must be square and of equal size")
        if a.shape[0] > 64:
            raise DomainError("pencil size is capped at 64")
        for name, m in (("a_matrix", a), ("b_matrix", b)):
            if not np.allclose(m, m.T, rtol=1e-12, atol=1e-14 * max(1.0, np.abs(m).max())):
                raise DomainError(f"{name} is not symmetric")
        object.__setattr__(self, "a_matrix", a)
        object.__setattr__(self, "b_matrix", b)


def _check_integrand(f: Integrand) -> None:
    if not f.zero_exponent > -1.0:
        raise NonIntegrable(f"integrand ~ r^{f.zero_exponent:g} at the origin (need exponent > -1)")
    kind, val = f.tail_class
    if kind == "power" and not val < -1.0:
        raise NonIntegrable(f"integrand ~ r^{val:g} at infinity (need exponent < -1)")
    if kind not in ("power", "exp_power"):
        raise NonIntegrable(f"unsupported tail class {kind!r}")
    if kind == "exp_power" and not val > 0:
        raise NonIntegrable("exp_power tail needs a positive exponent")


def integrate_radial(f: Integrand, rel_tol: float = 1e-12, max_depth: int = MAX_DEPTH) -> QuadratureResult:
    """Integrate ``f`` over (0, inf).

    After ``r = e^t`` the integrand decays at least exponentially in both
    directions of t; a further ``t = t_c + w*sinh(tau)`` makes the decay double
    exponential, and the trapezoidal rule in tau is then refined by halving
    the step until two successive levels agree.
    """
    if not 0.0 < rel_tol < 1.0:
        raise DomainError("rel_tol must lie in (0, 1)")
    _check_integrand(f)

    if f.log_evaluator is not None:
        g = f.log_evaluator
    else:
        def g(t):
            with np.errstate(all="ignore"):
                r = np.exp(t)
                v = np.asarray(f.evaluator(r), dtype=float) * r
            return np.where(np.isfinite(v), v, 0.0)

    if f.log_bound is not None:
        bound = f.log_bound
    else:
        def bound(t):
            with np.errstate(divide="ignore"):
                return np.log(np.abs(g(t)))

    coarse = np.arange(_T_MIN, _T_MAX, 1.0)
    lb = bound(coarse)
    evaluations = coarse.size
    peak = np.max(lb)
    if not np.isfinite(peak):
        if peak == -np.inf:
            return QuadratureResult(0.0, 0.0, evaluations)
        raise NonIntegrable("integrand is not finite on (0, inf)")
    live = np.nonzero(lb >= peak - _CUT)[0]
    t_lo, t_hi = coarse[live[0]] - 1.0, coarse[live[-1]] + 1.0
    t_c = coarse[np.argmax(lb)]
    width = max(0.5, 0.5 * np.count_nonzero(lb >= peak - 3.0))
    tau_lo = math.asinh((t_lo - t_c) / width)
    tau_hi = math.asinh((t_hi - t_c) / width)

    def panel(tau):
        vals = g(t_c + width * np.sinh(tau)) * (width * np.cosh(tau))
        if not np.all(np.isfinite(vals)):
            raise NonIntegrable("integrand produced non-finite values inside its support")
        return vals

    h = 0.5
    tau = np.arange(math.ceil(tau_lo / h), math.floor(tau_hi / h) + 1) * h
    vals = panel(tau)
    total, l1 = vals.sum(), np.abs(vals).sum()
    evaluations += tau.size
    prev = h * total
    for level in range(1, max_depth + 1):
        h *= 0.5
        j = np.arange(math.ceil((tau_lo / h - 1) / 2), math.floor((tau_hi / h - 1) / 2) + 1)
        tau = (2 * j + 1) * h
        vals = panel(tau)
        total += vals.sum()
        l1 += np.abs(vals).sum()
        evaluations += tau.size
        cur = h * total
        diff = abs(cur - prev)
        roundoff = 64 * np.finfo(float).eps * h * l1
        if level >= 2 and diff <= max(rel_tol * abs(cur), ABS_FLOOR, roundoff):
            return QuadratureResult(float(cur), float(diff), evaluations)
        prev = cur
    raise NoConvergence(f"quadrature did not settle after depth {max_depth} (last difference {diff:.3e})")


def gamma_fn(x: float) -> float:
    if not x > 0:
        raise DomainError(f"gamma_fn needs x > 0, got {x!r}")
    try:
        return math.gamma(x)
    except OverflowError:
        raise GammaOverflow(f"Gamma({x:g}) exceeds the double range") from None


def log_gamma(x: float) -> float:
    if not x > 0:
        raise DomainError(f"log_gamma needs x > 0, got {x!r}")
    return math.lgamma(x)


def surface_area(N: int) -> float:
    """Area of the unit sphere in R^N."""
    if N < 2:
        raise DomainError("surface_area needs N >= 2")
    return 2.0 * math.pi ** (N / 2) / gamma_fn(N / 2)


def minimize_scalar(f: Callable[[float], float], bracket: tuple[float, float], rel_tol: float = 1e-10,
                    max_iter: int = 200) -> tuple[float, float]:
    """Bounded Brent minimization on ``bracket``; returns (argmin, min)."""
    lo, hi = bracket
    if not lo < hi:
        raise DomainError("bracket must satisfy lo < hi")
    xatol = rel_tol * (1.0 + min(abs(lo), abs(hi)) if lo * hi > 0 else rel_tol)
    res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded",
                                   options={"xatol": xatol, "maxiter": max_iter})
    if not res.success:
        raise NoConvergence(f"scalar minimization stopped: {res.message}")
    x = float(res.x)
    fx = float(res.fun)
    # the bounded method never evaluates the endpoints themselves
    for end in (lo, hi):
        fe = f(end)
        if fe < fx:
            x, fx = end, fe
    return x, fx


def log_scan_minimize(f: Callable[[float], float], lo: float = 1e-6, hi: float = 1e6,
                      points: int = 64, rel_tol: float = 1e-10) -> tuple[float, float]:
    """Minimize ``f`` over a positive range: coarse log-grid scan, then Brent in log space."""
    grid = np.linspace(math.log(lo), math.log(hi), points)
    vals = [f(math.exp(x)) for x in grid]
    i = int(np.argmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
    x, fx = minimize_scalar(lambda y: f(math.exp(y)), (a, b), rel_tol)
    if vals[i] < fx:
        x, fx = grid[i], vals[i]
    return math.exp(x), fx


def _jacobi_eigenvalues(c: np.ndarray, max_sweeps: int = 100) -> np.ndarray:
    c = c.copy()
    n = c.shape[0]
    scale = np.linalg.norm(c)
    if scale == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        off = np.linalg.norm(c - np.diag(np.diag(c)))
        if off <= 1e-15 * scale:
            return np.diag(c).copy()
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = c[p, q]
                if abs(apq) <= 1e-300 or abs(apq) <= 1e-18 * (abs(c[p, p]) + abs(c[q, q])):
                    c[p, q] = c[q, p] = 0.0
                    continue
                theta = (c[q, q] - c[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta  # theta**2 would overflow
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                cs = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * cs
                rp, rq = c[p, :].copy(), c[q, :].copy()
                c[p, :] = cs * rp - sn * rq
                c[q, :] = sn * rp + cs * rq
                cp, cq = c[:, p].copy(), c[:, q].copy()
                c[:, p] = cs * cp - sn * cq
                c[:, q] = sn * cp + cs * cq
                c[p, q] = c[q, p] = 0.0
    raise NoConvergence("Jacobi rotations did not converge")


def smallest_eigenvalue(p: SymmetricPencil) -> float:
    """Smallest theta with A x = theta B x (Cholesky reduction, then Jacobi)."""
    try:
        chol = np.linalg.cholesky(p.b_matrix)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("B matrix of the pencil is not positive definite") from None
    linv_a = np.linalg.solve(chol, p.a_matrix)
    c = np.linalg.solve(chol, linv_a.T).T
    c = 0.5 * (c + c.T)
    return float(np.min(_jacobi_eigenvalues(c)))


def log_trapezoid_nodes(log_density: Callable[[np.ndarray], np.ndarray], extra_powers: tuple[float, ...],
                        h: float = 1.0 / 32, cut: float = 80.0) -> tuple[np.ndarray, np.ndarray]:
    """Nodes r_i and weights w_i with sum(w_i * g(r_i)) ~ int g(r) * density(r) dr.

    The uniform trapezoidal rule in t = log r converges geometrically for the
    analytic, exponentially decaying integrands met here.  The window is
    chosen so that ``density * r**p`` is negligible outside it for every p in
    ``extra_powers``.
    """
    coarse = np.arange(_T_MIN, _T_MAX, 0.25)
    with np.errstate(over="ignore"):
        base = log_density(coarse) + coarse
    keep = np.zeros(coarse.size, dtype=bool)
    for p in extra_powers:
        lb = base + p * coarse
        keep |= lb >= np.max(lb) - cut
    idx = np.nonzero(keep)[0]
    t = np.arange(coarse[idx[0]] - 1.0, coarse[idx[-1]] + 1.0, h)
    r = np.exp(t)
    w = h * np.exp(log_density(t) + t)
    return r, w
