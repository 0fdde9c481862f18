"""(A, B) weight pairs, the identities they generate, presets and Bessel pairs.

For radial weights A, B put ``C = (AB)' + (N-1) AB / r - B**2``.  Then for
every alpha != 0

    alpha^2 int A^2 |Du|^2 + alpha^-2 int B^2 u^2
        = int (C + B^2) u^2 + int |alpha A Du + alpha^-1 B u x/|x||^2

with D either the full gradient or the radial derivative.  Taking alpha = 1
gives Hardy-type identities, optimizing alpha gives product (CKN-type) ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateNorm, DomainError, FamilyClosure, InvalidParams, UnknownPreset
from .profiles import ModeFunction
from .reduction import (
    REL_TOL,
    as_radial,
    ground_state_remainder,
    remainder_parts,
    seminorm_sq,
    value_norm_sq,
)
from .terms import TermSum

DEFAULT_TOL = 1e-8
PRESETS = ("c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8")


@dataclass(frozen=True)
class ABPair:
    A: TermSum
    B: TermSum
    C: TermSum
    N: int
    name: str = "custom"
    identity: str = "hardy"
    ground_state: TermSum | None = None
    params: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class IdentityReport:
    lhs: float
    rhs: float
    remainder: float
    residual: float
    tol: float
    scale: float = 0.0

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol

    @property
    def remainder_ok(self) -> bool:
        return self.remainder >= -1e-9 * max(abs(self.lhs), abs(self.rhs), self.scale)

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "remainder": self.remainder,
            "residual": self.residual,
            "tol": self.tol,
            "pass": self.passed,
        }


def relative_residual(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


def derive_c(A: TermSum, B: TermSum, N: int) -> TermSum:
    H = A * B
    return H.derivative() + H.shift(-1.0) * float(N - 1) - B * B


def make_ab_pair(A, B, N: int, **meta) -> ABPair:
    A, B = as_radial(A), as_radial(B)
    C = derive_c(A, B, N)
    H = A * B
    for r in (0.5, 1.0, 2.0):
        h = 1e-5 * r
        dH = (float(H(r + h)) - float(H(r - h))) / (2 * h)
        pieces = (dH, (N - 1) * float(H(r)) / r, -float(B(r)) ** 2)
        fd = sum(pieces)
        scale = sum(abs(x) for x in pieces) + 1e-300
        if abs(float(C(r)) - fd) > 1e-6 * scale:
            raise FamilyClosure(f"symbolic C disagrees with finite differences at r={r}")
    return ABPair(A, B, C, N, **meta)


@dataclass(frozen=True)
class BesselPair:
    """Weights (V, W) with a positive phi solving (r^(N-1) V phi')' + r^(N-1) W phi = 0."""

    V: TermSum
    W: TermSum
    phi: TermSum
    name: str = "custom"

    def __post_init__(self):
        for attr in ("V", "W", "phi"):
            val = getattr(self, attr)
            if isinstance(val, (int, float)):
                object.__setattr__(self, attr, TermSum.constant(float(val)))
        if not (self.V.is_single() and self.V.terms[0].coeff > 0):
            raise InvalidParams("V must be a single positive term so that sqrt(V) stays in the family")
        if not (self.phi.is_single() and self.phi.terms[0].coeff > 0):
            raise InvalidParams("phi must be a single positive term")


def hardy_bessel_pair(N: int) -> BesselPair:
    c = (N - 2) / 2
    return BesselPair(TermSum.constant(1.0), TermSum.monomial(-2.0, c * c), TermSum.monomial(-c), "hardy")


def gaussian_bessel_pair(N: int) -> BesselPair:
    return BesselPair(
        TermSum.constant(1.0),
        TermSum.constant(float(N)) - TermSum.monomial(2.0),
        TermSum.gauss_power(1.0, 0.0, 1.0, 2.0),
        "gaussian",
    )


BESSEL_PAIRS = {"hardy": hardy_bessel_pair, "gaussian": gaussian_bessel_pair}


def bessel_residual(p: BesselPair, N: int, grid=None) -> float:
    if grid is None:
        grid = np.logspace(-3, 3, 61)
    grid = np.asarray(grid, dtype=float)
    flux = (p.V * p.phi.derivative()).shift(N - 1).derivative()
    source = (p.W * p.phi).shift(N - 1)
    total = flux + source
    num = np.abs(total(grid))
    den = np.abs(source(grid)) + np.abs(flux(grid)) + 1e-300
    return float(np.max(num / den))


def _log_derivative(phi: TermSum) -> TermSum:
    return phi.derivative() * phi.power(-1.0)


def _assert_same(derived: TermSum, stated: TermSum, label: str) -> None:
    diff = derived - stated
    if not diff:
        return
    grid = np.logspace(-2, 1, 31)
    scale = np.abs(derived(grid)) + np.abs(stated(grid)) + 1e-300
    if np.max(np.abs(diff(grid)) / scale) > 1e-10:
        raise FamilyClosure(f"derived C does not match the stated C for {label}")


def preset(name: str, N: int, lam: float | None = None, a: float | None = None, b: float | None = None,
           pair: BesselPair | str | None = None) -> ABPair:
    """The (A, B) pair of a named preset, with C derived and cross-checked."""
    if int(N) != N or N < 3:
        raise InvalidParams("dimension N must be an integer >= 3")
    N = int(N)
    if name not in PRESETS:
        raise UnknownPreset(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")
    kind = "ckn" if name in ("c6", "c7", "c8") else "hardy"

    if name == "c1" or (name == "c2" and lam is None):
        lam = 0.0
    if name in ("c1", "c2"):
        lam = float(lam)
        g = (N - lam - 2) / 2
        A = TermSum.monomial(-lam / 2)
        B = TermSum.monomial(-lam / 2 - 1, g)
        out = make_ab_pair(A, B, N, name=name, identity=kind, ground_state=TermSum.monomial(-g),
                           params={"lam": lam})
        _assert_same(out.C, B * B, name)
        return out

    if name in ("c3", "c6"):
        out = make_ab_pair(TermSum.constant(1.0), TermSum.monomial(1.0), N, name=name, identity=kind,
                           ground_state=TermSum.gauss_power(1.0, 0.0, 1.0, 2.0))
        _assert_same(out.C, TermSum.constant(float(N)) - TermSum.monomial(2.0), name)
        return out

    if name in ("c4", "c7"):
        if a is None or b is None:
            raise InvalidParams(f"preset {name} needs both a and b")
        a, b = float(a), float(b)
        gap = N - 1 - a - b
        if abs(gap) < 1e-12:
            raise InvalidParams(f"preset {name} needs a + b != N - 1 (got a + b = {a + b:g} with N = {N})")
        sigma = b + 1 - a
        if name == "c7" and not sigma > 0:
            raise InvalidParams("preset c7 needs b + 1 - a > 0")
        sign = 1.0 if gap > 0 else -1.0
        if sigma > 0:
            ground = TermSum.gauss_power(1.0, 0.0, sign, sigma)
        elif sigma == 0:
            ground = TermSum.monomial(-sign)
        else:
            ground = None
        out = make_ab_pair(TermSum.monomial(-b, sign), TermSum.monomial(-a), N, name=name, identity=kind,
                           ground_state=ground, params={"a": a, "b": b})
        stated = TermSum.monomial(-a - b - 1, abs(gap)) - TermSum.monomial(-2 * a)
        _assert_same(out.C, stated, name)
        return out

    # c5 / c8
    if pair is None:
        raise InvalidParams(f"preset {name} needs a Bessel pair")
    if isinstance(pair, str):
        if pair not in BESSEL_PAIRS:
            raise InvalidParams(f"unknown Bessel pair {pair!r}; known: {', '.join(BESSEL_PAIRS)}")
        pair = BESSEL_PAIRS[pair](N)
    res = bessel_residual(pair, N)
    if res > 1e-10:
        raise InvalidParams(f"Bessel pair is not certified (ODE residual {res:.2e})")
    root = pair.V.sqrt()
    B = -(_log_derivative(pair.phi) * root)
    out = make_ab_pair(root, B, N, name=name, identity=kind, ground_state=pair.phi,
                       params={"pair": pair.name})
    _assert_same(out.C, pair.W, name)
    return out


def _check_alpha(alpha: float) -> None:
    if alpha == 0 or not math.isfinite(alpha):
        raise DomainError("alpha must be finite and nonzero")


def _check_n(pair: ABPair, N: int | None) -> int:
    if N is not None and N != pair.N:
        raise InvalidParams(f"pair was built for N={pair.N}, not N={N}")
    return pair.N


def general_identity_check(u: ModeFunction, pair: ABPair, alpha: float, form: str = "gradient",
                           N: int | None = None, tol: float = DEFAULT_TOL, rel_tol: float = REL_TOL) -> IdentityReport:
    _check_alpha(alpha)
    N = _check_n(pair, N)
    top = alpha**2 * seminorm_sq(u, pair.A * pair.A, N, form, rel_tol)
    bottom = alpha**-2 * value_norm_sq(u, pair.B * pair.B, N, rel_tol)
    source = value_norm_sq(u, pair.C + pair.B * pair.B, N, rel_tol)
    rem, scale = remainder_parts(u, pair.A, pair.B, alpha, N, form, rel_tol)
    lhs, rhs = top + bottom, source + rem
    return IdentityReport(lhs, rhs, rem, relative_residual(lhs, rhs), tol, scale)


def hardy_identity_check(u: ModeFunction, pair: ABPair, form: str = "gradient", N: int | None = None,
                         tol: float = DEFAULT_TOL, rel_tol: float = REL_TOL) -> IdentityReport:
    """int A^2 |Du|^2 = int C u^2 + remainder at alpha = 1."""
    N = _check_n(pair, N)
    lhs = seminorm_sq(u, pair.A * pair.A, N, form, rel_tol)
    source = value_norm_sq(u, pair.C, N, rel_tol)
    rem, scale = remainder_parts(u, pair.A, pair.B, 1.0, N, form, rel_tol)
    rhs = source + rem
    return IdentityReport(lhs, rhs, rem, relative_residual(lhs, rhs), tol, scale)


def optimal_alpha(u: ModeFunction, pair: ABPair, form: str = "gradient", rel_tol: float = REL_TOL) -> float:
    top = seminorm_sq(u, pair.A * pair.A, pair.N, form, rel_tol)
    bottom = value_norm_sq(u, pair.B * pair.B, pair.N, rel_tol)
    if not (top > 0 and bottom > 0):
        raise DegenerateNorm("both weighted norms must be positive")
    return (bottom / top) ** 0.25


def ckn_identity_check(u: ModeFunction, pair: ABPair, form: str = "gradient", N: int | None = None,
                       tol: float = DEFAULT_TOL, rel_tol: float = REL_TOL) -> IdentityReport:
    """||A Du|| ||B u|| = 1/2 int (C + B^2) u^2 + 1/2 remainder at the optimal alpha.

    The report's ``remainder`` is the half-remainder as it appears on the right.
    """
    N = _check_n(pair, N)
    top = seminorm_sq(u, pair.A * pair.A, N, form, rel_tol)
    bottom = value_norm_sq(u, pair.B * pair.B, N, rel_tol)
    if not (top > 0 and bottom > 0):
        raise DegenerateNorm("both weighted norms must be positive")
    alpha = (bottom / top) ** 0.25
    lhs = math.sqrt(top * bottom)
    source = value_norm_sq(u, pair.C + pair.B * pair.B, N, rel_tol)
    rem, scale = remainder_parts(u, pair.A, pair.B, alpha, N, form, rel_tol)
    rhs = 0.5 * source + 0.5 * rem
    return IdentityReport(lhs, rhs, 0.5 * rem, relative_residual(lhs, rhs), tol, 0.5 * scale)


def identity_check(u: ModeFunction, pair: ABPair, form: str = "gradient", tol: float = DEFAULT_TOL,
                   rel_tol: float = REL_TOL) -> IdentityReport:
    """The identity a preset is about: Hardy form, or the optimized product form."""
    if pair.identity == "ckn":
        return ckn_identity_check(u, pair, form, None, tol, rel_tol)
    return hardy_identity_check(u, pair, form, None, tol, rel_tol)


def factorized_for_pair(u: ModeFunction, pair: ABPair, alpha: float, form: str = "gradient",
                        rel_tol: float = REL_TOL) -> float:
    """The full remainder at ``alpha`` through the pair's ground state."""
    if pair.ground_state is None:
        raise InvalidParams(f"preset {pair.name} has no ground state inside the family")
    return ground_state_remainder(u, pair.A, pair.ground_state, alpha, pair.N, form, rel_tol)


def required_weights(pair: ABPair) -> list:
    """Weights (in ``validate_mode_function`` format) a profile must pass for ``pair``'s integrals."""
    weights = [0.0]
    for w in (pair.B * pair.B, pair.C):
        if w:
            weights.append(("value", -min(t.k for t in w.terms)))
    grad = -min(t.k for t in (pair.A * pair.A).terms)
    weights += [("gradient", grad), ("radial", grad)]
    return weights
