"""Closed forms for the exponential extremal family and the sharp constant."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, GammaOverflow, InvalidParams
from .numerics import log_gamma, surface_area

ALIGN_TOL = 1e-12


@dataclass(frozen=True)
class CknParams:
    """Dimension and the two weight exponents of the interpolation inequality.

    The weights are |x|^(-2a) on u, |x|^(-2b) on the gradient and
    |x|^(-(a+b+1)) on the middle term.
    """

    N: int
    a: float
    b: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 3:
            raise InvalidParams("N must be an integer >= 3")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def sigma(self) -> float:
        """Exponent of the extremal profile exp(-beta r^sigma / sigma)."""
        return self.b + 1.0 - self.a

    @property
    def mid_power(self) -> float:
        return self.a + self.b + 1.0

    @property
    def gap(self) -> float:
        return self.N - self.a - self.b - 1.0

    @property
    def sharpness_regime(self) -> bool:
        N, a, b = self.N, self.a, self.b
        return 0.0 <= b < (N - 2) / 2 and a <= N * b / (N - 2)

    @property
    def scale_aligned(self) -> bool:
        return abs(self.mid_power - 2 * self.b * self.N / (self.N - 2)) <= ALIGN_TOL * max(1.0, abs(self.mid_power))

    @classmethod
    def aligned(cls, N: int, b: float) -> CknParams:
        """The a making a + b + 1 = 2bN/(N-2)."""
        return cls(N, b * (N + 2) / (N - 2) - 1.0, b)


HEISENBERG = (-1.0, 0.0)


def heisenberg(N: int) -> CknParams:
    return CknParams(N, *HEISENBERG)


def log_gamma_moment(x: float, y: float, beta: float) -> float:
    if not (x > 0 and y > 0 and beta > 0):
        raise DomainError(f"gamma_moment needs x, y, beta > 0 (got {x}, {y}, {beta})")
    return (x / y) * math.log(y / beta) - math.log(y) + log_gamma(x / y)


def gamma_moment(x: float, y: float, beta: float) -> float:
    """int_0^inf r^(x-1) exp(-(beta/y) r^y) dr."""
    val = log_gamma_moment(x, y, beta)
    if val > 709.0:
        raise GammaOverflow("gamma_moment exceeds the double range")
    return math.exp(val)


def extremal_norms(p: CknParams, alpha: float = 1.0, beta: float = 1.0) -> tuple[float, float, float]:
    """(mid, a-weighted, b-weighted gradient) squared norms of alpha exp(-beta r^sigma/sigma).

    Each is ``alpha^2 |S^{N-1}|`` times a Gamma moment with rate 2*beta; the
    gradient norm is beta^2 times the a-weighted one.
    """
    sigma = p.sigma
    if not sigma > 0:
        raise DomainError("extremal norms need b + 1 - a > 0")
    if not (p.gap > 0 and p.N - 2 * p.a > 0):
        raise DomainError("extremal norms need N - a - b - 1 > 0 and N - 2a > 0")
    if not beta > 0:
        raise DomainError("beta must be positive")
    log_pref = 2 * math.log(abs(alpha)) + math.log(surface_area(p.N)) if alpha != 0 else -math.inf
    if log_pref == -math.inf:
        return 0.0, 0.0, 0.0
    log_mid = log_pref + log_gamma_moment(p.gap, sigma, 2 * beta)
    log_a = log_pref + log_gamma_moment(p.N - 2 * p.a, sigma, 2 * beta)
    if max(log_mid, log_a + 2 * math.log(beta)) > 709.0:
        raise GammaOverflow("extremal norm exceeds the double range")
    n_a = math.exp(log_a)
    return math.exp(log_mid), n_a, beta * beta * n_a


def ckn_sharp_constant(p: CknParams) -> float:
    return abs(p.gap) / 2
