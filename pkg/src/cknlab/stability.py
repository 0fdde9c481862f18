"""Deficits, distances to the extremal family, and the stability auditors.

Throughout, ``CknParams(N, a, b)`` fixes the weights and the extremal family
``c * exp(-beta r^sigma / sigma)``, ``sigma = b + 1 - a``.  The Heisenberg
case is ``(a, b) = (-1, 0)``: weights 1, |x|^2, 1 and Gaussian extremals.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

from .closedform import CknParams, extremal_norms, gamma_moment, heisenberg
from .errors import InvalidParams
from .numerics import log_scan_minimize, surface_area
from .profiles import ModeFunction
from .reduction import REL_TOL, gradient_inner_product, gradient_seminorm_sq, inner_product, value_norm_sq
from .terms import TermSum

ABS_FLOOR = 1e-300
EQUALITY_FLOOR = 1e-9  # relative to the deficit scale: below this both sides count as zero

EXPLICIT = ("T3_1", "T3_2", "T3_3", "T3_4", "E3_first", "E3_second", "D2AB")
EMPIRICAL = ("T3_5", "T3_6a", "T3_6b", "T3_7", "T3_8")
THEOREMS = EXPLICIT + EMPIRICAL


@dataclass(frozen=True)
class ExtremalCandidate:
    c: float
    beta: float

    def profile(self, p: CknParams) -> TermSum:
        return TermSum.gauss_power(self.c, 0.0, self.beta, p.sigma)


@dataclass(frozen=True)
class StabilityReport:
    theorem: str
    deficit: float
    bound: float
    ratio: float
    witness: ExtremalCandidate
    passed: bool
    constant: float = 1.0
    empirical: bool = False
    scale: float = 0.0
    extras: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        out = {
            "theorem": self.theorem,
            "deficit": self.deficit,
            "bound": self.bound,
            "ratio": self.ratio,
            "constant": self.constant,
            "empirical": self.empirical,
            "witness": {"c": self.witness.c, "beta": self.witness.beta},
            "pass": self.passed,
        }
        out.update(self.extras)
        return out


# norms -----------------------------------------------------------------------

@lru_cache(maxsize=4096)
def ckn_norms(u: ModeFunction, p: CknParams) -> tuple[float, float, float]:
    """(int |u|^2/|x|^(a+b+1), int |u|^2/|x|^(2a), int |grad u|^2/|x|^(2b))."""
    mid = value_norm_sq(u, p.mid_power, p.N)
    na = value_norm_sq(u, 2 * p.a, p.N)
    grad = gradient_seminorm_sq(u, 2 * p.b, p.N)
    return mid, na, grad


def deficit_scale(u: ModeFunction, p: CknParams) -> float:
    mid, na, grad = ckn_norms(u, p)
    return math.sqrt(grad * na) + abs(p.gap) / 2 * mid


def deficit_ckn1(u: ModeFunction, p: CknParams) -> float:
    mid, na, grad = ckn_norms(u, p)
    return math.sqrt(grad * na) - abs(p.gap) / 2 * mid


def deficit_ckn2(u: ModeFunction, p: CknParams) -> float:
    mid, na, grad = ckn_norms(u, p)
    return grad * na - (p.gap / 2) ** 2 * mid * mid


def deficit_delta1(u: ModeFunction, N: int) -> float:
    """||grad u|| ||x u|| - (N/2) ||u||^2."""
    return deficit_ckn1(u, heisenberg(N))


def deficit_delta2(u: ModeFunction, N: int) -> float:
    return deficit_ckn2(u, heisenberg(N))


def scale_noninv_deficit(u: ModeFunction, p: CknParams) -> float:
    """int |grad u|^2/|x|^2b + int |u|^2/|x|^2a - (N-a-b-1) int |u|^2/|x|^(a+b+1)."""
    if not p.gap > 0:
        raise InvalidParams("the scale non-invariant form needs N - a - b - 1 > 0")
    mid, na, grad = ckn_norms(u, p)
    return grad + na - p.gap * mid


# distances (clamped at 0: at an optimizer the projection cancels to rounding) -------------------------------------------------------------------

def extremal_mode(p: CknParams, beta: float = 1.0, c: float = 1.0) -> ModeFunction:
    return ModeFunction(0, TermSum.gauss_power(c, 0.0, beta, p.sigma))


def phi_norm_sq(p: CknParams, beta: float, q: float) -> float:
    """int exp(-2 beta r^sigma/sigma) |x|^(-q) dx in closed form."""
    if not p.N - q > 0:
        raise InvalidParams("distance weight is not integrable against the extremal family")
    return surface_area(p.N) * gamma_moment(p.N - q, p.sigma, 2 * beta)


def overlap(u: ModeFunction, p: CknParams, beta: float, q: float) -> float:
    """int u exp(-beta r^sigma/sigma) |x|^(-q) dx (exactly 0 for mode-1 u)."""
    return inner_product(u, extremal_mode(p, beta), q, p.N)


@lru_cache(maxsize=4096)
def _best_beta(u: ModeFunction, p: CknParams, q: float) -> tuple[float, float, float, float]:
    """Maximize the normalized overlap over beta; returns (beta, overlap, ||phi||^2, ||u||^2)."""
    nu = value_norm_sq(u, q, p.N)
    if u.mode == 1:
        return 1.0, 0.0, phi_norm_sq(p, 1.0, q), nu

    def objective(beta):
        ov = overlap(u, p, beta, q)
        return -(ov * ov) / (phi_norm_sq(p, beta, q) * nu)

    beta, _ = log_scan_minimize(objective)
    return beta, overlap(u, p, beta, q), phi_norm_sq(p, beta, q), nu


def distance_d1(u: ModeFunction, p: CknParams) -> tuple[float, ExtremalCandidate]:
    """Squared weighted L^2 distance to the extremal family, and the closest member."""
    beta, ov, pn, nu = _best_beta(u, p, p.mid_power)
    return max(nu - ov * ov / pn, 0.0), ExtremalCandidate(ov / pn, beta)


def distance_d2(u: ModeFunction, p: CknParams) -> tuple[float, ExtremalCandidate]:
    """As ``distance_d1`` but over members with the same weighted norm as u."""
    beta, ov, pn, nu = _best_beta(u, p, p.mid_power)
    c = math.copysign(math.sqrt(nu / pn), ov if ov != 0 else 1.0)
    return max(2 * nu - 2 * math.sqrt(nu / pn) * abs(ov), 0.0), ExtremalCandidate(c, beta)


def projection_distance(u: ModeFunction, p: CknParams, q: float, beta: float = 1.0) -> tuple[float, ExtremalCandidate]:
    """inf over c of int |u - c exp(-beta r^sigma/sigma)|^2 |x|^(-q) dx."""
    nu = value_norm_sq(u, q, p.N)
    ov = overlap(u, p, beta, q)
    pn = phi_norm_sq(p, beta, q)
    return max(nu - ov * ov / pn, 0.0), ExtremalCandidate(ov / pn, beta)


def graph_distance(u: ModeFunction, N: int) -> tuple[float, float]:
    """inf over c of the graph norm ||grad w||^2 + ||x w||^2 + ||w||^2, w = u - c exp(-|x|^2/2).

    With phi the Gaussian, -Lap phi + |x|^2 phi + phi = (N+1) phi and
    ||phi||^2 = pi^(N/2), so the cross term is (N+1) <u, phi> and the graph
    norm of phi is (N+1) pi^(N/2).
    """
    p = heisenberg(N)
    mid, na, grad = ckn_norms(u, p)
    gauss_mass = math.pi ** (N / 2)
    ov = overlap(u, p, 1.0, 0.0)
    cross = (N + 1) * ov
    phi_graph = (N + 1) * gauss_mass
    c = cross / phi_graph
    return max(grad + na + mid - cross * cross / phi_graph, 0.0), c


def ckn_graph_distance(u: ModeFunction, p: CknParams) -> tuple[float, float]:
    """inf over c of the weighted graph norm of u - c exp(-r^sigma/sigma)."""
    mid, na, grad = ckn_norms(u, p)
    phi = extremal_mode(p, 1.0)
    cross = (
        inner_product(u, phi, p.mid_power, p.N)
        + inner_product(u, phi, 2 * p.a, p.N)
        + gradient_inner_product(u, phi, 2 * p.b, p.N)
    )
    phi_graph = sum(extremal_norms(p, 1.0, 1.0))
    c = cross / phi_graph
    return max(grad + na + mid - cross * cross / phi_graph, 0.0), c


# auditors --------------------------------------------------------------------

def ratio_of(deficit: float, bound: float, floor: float) -> float:
    if abs(deficit) <= floor and abs(bound) <= floor:
        return 1.0
    if bound <= ABS_FLOOR:
        return math.inf if deficit > 0 else 0.0
    return deficit / bound


def _require_regime(p: CknParams, aligned: bool) -> None:
    if not p.sharpness_regime:
        raise InvalidParams(f"needs 0 <= b < (N-2)/2 and a <= Nb/(N-2); got a={p.a:g}, b={p.b:g}, N={p.N}")
    if aligned and not p.scale_aligned:
        raise InvalidParams("needs scale alignment a + b + 1 = 2bN/(N-2)")


def _explicit(theorem, deficit, bound, witness, scale, constant=1.0, **extras) -> StabilityReport:
    floor = EQUALITY_FLOOR * scale
    ratio = ratio_of(deficit, bound, floor)
    passed = deficit >= bound * (1 - 1e-8) - 1e-12 * max(1.0, scale)
    return StabilityReport(theorem, deficit, bound, ratio, witness, passed, constant, False, scale, extras)


def _empirical(theorem, deficit, bound, witness, scale, **extras) -> StabilityReport:
    floor = EQUALITY_FLOOR * scale
    ratio = ratio_of(deficit, bound, floor)
    passed = math.isfinite(ratio) and ratio > 0
    return StabilityReport(theorem, deficit, bound, ratio, witness, passed, 1.0, True, scale, extras)


def check_stability(theorem: str, u: ModeFunction, N: int, a: float | None = None, b: float | None = None,
                    constant: float | None = None) -> StabilityReport:
    """Audit one stability statement on ``u``.

    Explicit-constant statements pass when deficit >= bound; statements whose
    constant is only known to exist report deficit / distance as an
    empirical ratio and pass when it is finite and positive.  ``constant``
    feeds the D2AB chain (default: u's own T3_6b ratio).
    """
    if theorem not in THEOREMS:
        raise InvalidParams(f"unknown theorem {theorem!r}; known: {', '.join(THEOREMS)}")
    heis = heisenberg(N)

    if theorem in ("T3_1", "T3_2", "T3_3", "T3_4", "E3_first", "E3_second"):
        scale = deficit_scale(u, heis)
        nu = ckn_norms(u, heis)[0]
        if theorem == "T3_1":
            dist, w = projection_distance(u, heis, 0.0)
            return _explicit(theorem, scale_noninv_deficit(u, heis), 2 * dist, w, scale, 2.0)
        if theorem == "T3_4":
            g, c = graph_distance(u, N)
            return _explicit(theorem, scale_noninv_deficit(u, heis), 2 / (N + 3) * g,
                             ExtremalCandidate(c, 1.0), scale, 2 / (N + 3))
        if theorem == "T3_2":
            d1, w = distance_d1(u, heis)
            return _explicit(theorem, deficit_delta1(u, N), d1, w, scale)
        if theorem == "T3_3":
            d2, w = distance_d2(u, heis)
            return _explicit(theorem, deficit_delta1(u, N), 0.5 * d2, w, scale, 0.5)
        scale2 = scale * scale
        if theorem == "E3_first":
            d1, w = distance_d1(u, heis)
            return _explicit(theorem, deficit_delta2(u, N), N * nu * d1 + d1 * d1, w, scale2)
        d2, w = distance_d2(u, heis)
        return _explicit(theorem, deficit_delta2(u, N), N / 2 * nu * d2 + 0.25 * d2 * d2, w, scale2)

    if a is None:
        raise InvalidParams(f"{theorem} needs the parameter a")
    if b is None:
        if theorem != "T3_5":
            raise InvalidParams(f"{theorem} needs the parameter b")
        b = 0.0
    p = CknParams(N, a, b)
    scale = deficit_scale(u, p)

    if theorem == "T3_5":
        if not (p.a <= 0 and p.b == 0):
            raise InvalidParams("T3_5 needs a <= 0 and b = 0")
        dist, w = projection_distance(u, p, 0.0)
        return _empirical(theorem, scale_noninv_deficit(u, p), dist, w, scale)
    if theorem == "T3_6a":
        _require_regime(p, False)
        dist, w = projection_distance(u, p, 2 * p.b * N / (N - 2))
        return _empirical(theorem, scale_noninv_deficit(u, p), dist, w, scale)
    _require_regime(p, True)
    if theorem == "T3_6b":
        d1, w = distance_d1(u, p)
        return _empirical(theorem, deficit_ckn1(u, p), d1, w, scale)
    if theorem == "T3_7":
        d2, w = distance_d2(u, p)
        return _empirical(theorem, deficit_ckn1(u, p), d2, w, scale)
    if theorem == "T3_8":
        g, c = ckn_graph_distance(u, p)
        return _empirical(theorem, scale_noninv_deficit(u, p), g, ExtremalCandidate(c, 1.0), scale)
    # D2AB
    d1, w = distance_d1(u, p)
    if constant is None:
        constant = ratio_of(deficit_ckn1(u, p), d1, EQUALITY_FLOOR * scale)
    mid = ckn_norms(u, p)[0]
    bound = 2 * abs(p.gap / 2) * constant * mid * d1 + constant * constant * d1 * d1
    return _explicit(theorem, deficit_ckn2(u, p), bound, w, scale * scale, constant)


@dataclass
class EmpiricalConstants:
    """Running minimum of observed ratios per (theorem, N, a, b)."""

    minima: dict = field(default_factory=dict)

    def record(self, report: StabilityReport, N: int, a: float | None = None, b: float | None = None) -> None:
        key = f"{report.theorem}|N={N}|a={a!r}|b={b!r}"
        if math.isfinite(report.ratio):
            self.minima[key] = min(self.minima.get(key, math.inf), report.ratio)

    def to_dict(self) -> dict:
        return dict(sorted(self.minima.items()))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> EmpiricalConstants:
        with open(path, encoding="utf-8") as fh:
            return cls(dict(json.load(fh)))
