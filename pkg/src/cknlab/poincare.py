"""Spectral gaps of radial measures exp(-delta |y|^alpha), plain or with power weights.

Gaps are Rayleigh-Ritz estimates (upper bounds on the true constant) over a
sector of spherical-harmonic mode l.  The radial integrals are done with the
trapezoidal rule in log r on a fixed node set, so nested bases give nested
subspaces and the estimates are monotone in the basis size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .closedform import gamma_moment
from .errors import DomainError, InvalidParams
from .identities import IdentityReport, relative_residual
from .numerics import SymmetricPencil, log_trapezoid_nodes, smallest_eigenvalue, surface_area
from .profiles import ModeFunction
from .reduction import REL_TOL, angular_penalty, gradient_seminorm_sq, value_norm_sq
from .terms import TermSum

MAX_BASIS = 16


@dataclass(frozen=True)
class RadialMeasure:
    """Density exp(-delta |y|^alpha) on R^N.

    With ``mu > 0`` the Dirichlet form carries |y|^-mu and the variance
    carries |y|^(-N mu/(N-2)).
    """

    delta: float
    alpha: float
    mu: float = 0.0
    N: int = 3

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 3:
            raise InvalidParams("N must be an integer >= 3")
        if not (self.delta > 0 and self.alpha > 0):
            raise InvalidParams("need delta > 0 and alpha > 0")
        if not 0 <= self.mu < self.N - 2:
            raise InvalidParams("need 0 <= mu < N - 2")
        object.__setattr__(self, "N", int(self.N))

    @property
    def variance_power(self) -> float:
        return self.N * self.mu / (self.N - 2)

    @property
    def kelvin_exponent(self) -> float:
        """lambda = (N-2)/(N-2-mu) >= 1."""
        return (self.N - 2) / (self.N - 2 - self.mu)

    @property
    def log_concave(self) -> bool:
        return self.alpha >= 1

    @property
    def hypothesis_holds(self) -> bool:
        """alpha >= (N-2-mu)/(N-2), i.e. the transported density is log-concave."""
        return self.alpha * self.kelvin_exponent >= 1 - 1e-12

    def density(self) -> TermSum:
        return TermSum.gauss_power(1.0, 0.0, self.delta * self.alpha, self.alpha)

    def dirichlet_weight(self) -> TermSum:
        return TermSum.gauss_power(1.0, -self.mu, self.delta * self.alpha, self.alpha)

    def variance_weight(self) -> TermSum:
        return TermSum.gauss_power(1.0, -self.variance_power, self.delta * self.alpha, self.alpha)


def gaussian_measure(lam: float, N: int) -> RadialMeasure:
    """exp(-|x|^2 / lam^2)."""
    if not lam > 0:
        raise InvalidParams("lambda must be positive")
    return RadialMeasure(1.0 / lam**2, 2.0, 0.0, N)


def sector_gap(m: RadialMeasure, ell: int, n: int, nu: float = 1.0) -> float:
    """Ritz estimate of the gap restricted to mode ``ell`` with radial basis r^(nu j)."""
    if ell < 0 or int(ell) != ell:
        raise InvalidParams("mode must be a nonnegative integer")
    if not 1 <= n <= MAX_BASIS:
        raise InvalidParams(f"basis size must be in 1..{MAX_BASIS}")
    if ell == 0 and n < 2:
        raise InvalidParams("the radial sector needs n >= 2")
    N = m.N
    offset = max(ell - 1, 0)
    powers = nu * (np.arange(1, n + 1) + offset)
    q, mu = m.variance_power, m.mu
    extra = [N - 1 - q] + [N - 1 - q + 2 * p for p in powers] + [N - 3 - mu + 2 * p for p in powers]
    r, w = log_trapezoid_nodes(lambda t: -m.delta * np.exp(m.alpha * t), tuple(extra))

    vals = r[:, None] ** powers[None, :]
    ders = powers[None, :] * r[:, None] ** (powers[None, :] - 1)
    w_var = w * r ** (N - 1 - q)
    w_dir = w * r ** (N - 1 - mu)
    if ell == 0:
        # project out constants: the variance is taken about the mean
        vals = vals - (w_var @ vals) / np.sum(w_var)
    # orthonormalize the basis in the variance inner product first; the
    # Dirichlet matrix is then formed from nodal values already in that basis
    _, upper = np.linalg.qr(np.sqrt(w_var)[:, None] * vals)

    def to_ortho(nodal):
        return solve_triangular(upper, nodal.T, trans="T").T

    grad = to_ortho(np.sqrt(w_dir)[:, None] * ders)
    a_ortho = grad.T @ grad
    pen = angular_penalty(ell, N)
    if pen:
        tang = to_ortho(np.sqrt(w_dir)[:, None] * vals / r[:, None])
        a_ortho = a_ortho + pen * (tang.T @ tang)
    a_ortho = 0.5 * (a_ortho + a_ortho.T)
    return smallest_eigenvalue(SymmetricPencil(a_ortho, np.eye(n)))


def gap_estimate(m: RadialMeasure, mode: int | None = None, n: int = 8) -> float:
    """Ritz estimate of the Poincare constant; the minimum over modes 0 and 1 unless ``mode`` is given."""
    if m.mu != 0:
        raise InvalidParams("gap_estimate takes an unweighted measure (mu = 0); see weighted_gap_estimate")
    if mode is not None:
        return sector_gap(m, mode, n)
    return min(sector_gap(m, 0, n), sector_gap(m, 1, n))


def weighted_gap_estimate(m: RadialMeasure, n: int = 8, mode: int | None = None) -> float:
    """Gap with the power-weighted Dirichlet form and variance.

    The basis r^(j/lambda) is the image of the plain polynomial basis under
    the Kelvin-type change of variables, so the radial sector matches the
    transported problem exactly.
    """
    nu = 1.0 / m.kelvin_exponent
    if mode is not None:
        return sector_gap(m, mode, n, nu)
    return min(sector_gap(m, 0, n, nu), sector_gap(m, 1, n, nu))


def transported_measure(m: RadialMeasure) -> RadialMeasure:
    return RadialMeasure(m.delta, m.alpha * m.kelvin_exponent, 0.0, m.N)


def kelvin_gap_bound(m: RadialMeasure, n: int = 8) -> float:
    """gap(exp(-delta |x|^(lambda alpha))) / lambda^2: the lower bound the weighted gap inherits."""
    lam = m.kelvin_exponent
    return gap_estimate(transported_measure(m), None, n) / lam**2


def kelvin_transform(v: ModeFunction, m: RadialMeasure) -> ModeFunction:
    """lambda^(-1/2) v(|x|^lambda) for radial v."""
    if v.mode != 0:
        raise DomainError("the Kelvin-type transform is certified for radial functions only")
    lam = m.kelvin_exponent
    return ModeFunction.raw(0, v.f.transport(lam) * lam**-0.5)


def kelvin_transform_check(v: ModeFunction, m: RadialMeasure, tol: float = 1e-9, side: str = "dirichlet",
                           c: float = 0.0) -> IdentityReport:
    """Compare a weighted integral of v with its transported counterpart.

    ``dirichlet``: int |grad v|^2 |y|^-mu e dy = int |grad vbar|^2 e_lambda dx.
    ``variance``: int |v - c|^2 |y|^(-N mu/(N-2)) e dy = lambda^2 int |vbar - c lambda^(-1/2)|^2 e_lambda dx.
    """
    vbar = kelvin_transform(v, m)
    lam = m.kelvin_exponent
    target = transported_measure(m).density()
    N = m.N
    if side == "dirichlet":
        lhs = gradient_seminorm_sq(v, m.dirichlet_weight(), N)
        rhs = gradient_seminorm_sq(vbar, target, N)
    elif side == "variance":
        shifted = ModeFunction.raw(0, v.f - TermSum.constant(c))
        shifted_bar = ModeFunction.raw(0, vbar.f - TermSum.constant(c * lam**-0.5))
        lhs = value_norm_sq(shifted, m.variance_weight(), N)
        rhs = lam**2 * value_norm_sq(shifted_bar, target, N)
    else:
        raise DomainError(f"side must be 'dirichlet' or 'variance', got {side!r}")
    return IdentityReport(lhs, rhs, 0.0, relative_residual(lhs, rhs), tol, max(abs(lhs), abs(rhs)))


@dataclass(frozen=True)
class PoincareResult:
    dirichlet: float
    variance: float
    ratio: float
    mean: float

    def to_dict(self) -> dict:
        return {"dirichlet": self.dirichlet, "variance": self.variance, "ratio": self.ratio, "mean": self.mean}


def poincare_check(v: ModeFunction, m: RadialMeasure, rel_tol: float = REL_TOL) -> PoincareResult:
    """Dirichlet form, variance about the optimal constant, and their ratio (inf for constants)."""
    N = m.N
    if not v.f.derivative() and v.mode == 0:
        return PoincareResult(0.0, 0.0, math.inf, float(v.f(1.0)))
    dirichlet = gradient_seminorm_sq(v, m.dirichlet_weight(), N, rel_tol)
    second = value_norm_sq(v, m.variance_weight(), N, rel_tol)
    mean = 0.0
    variance = second
    if v.mode == 0:
        mass = surface_area(N) * gamma_moment(N - m.variance_power, m.alpha, m.delta * m.alpha)
        first = surface_area(N) * (m.variance_weight() * v.f).shift(N - 1).integrate(rel_tol).value
        mean = first / mass
        variance = second - first * mean
    if variance <= 1e-13 * second:
        return PoincareResult(dirichlet, 0.0, math.inf, mean)
    return PoincareResult(dirichlet, variance, dirichlet / variance, mean)
