"""Reference-value self test.

Every expected value is computed from N inside the table (pi^(N/2) and
friends), never typed in as a decimal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .closedform import CknParams, ckn_sharp_constant, gamma_moment
from .identities import BESSEL_PAIRS, bessel_residual, general_identity_check, identity_check, preset
from .poincare import RadialMeasure, gap_estimate, gaussian_measure, kelvin_transform_check, poincare_check
from .profiles import ModeFunction, gaussian, witness
from .reduction import gradient_seminorm_sq, value_norm_sq
from .stability import (
    check_stability,
    deficit_delta1,
    deficit_delta2,
    distance_d1,
    distance_d2,
    graph_distance,
    heisenberg,
    scale_noninv_deficit,
)
from .terms import TermSum

DEFAULT_DIMS = (3,)


@dataclass(frozen=True)
class Check:
    name: str
    N: int
    expected: float
    computed: float
    tol: float
    absolute: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def error(self) -> float:
        diff = abs(self.computed - self.expected)
        if self.absolute:
            return diff
        return diff / max(abs(self.expected), 1e-300)

    @property
    def passed(self) -> bool:
        return self.error <= self.tol

    def to_dict(self) -> dict:
        return {
            "check": self.name,
            "N": self.N,
            "expected": self.expected,
            "computed": self.computed,
            "error": self.error,
            "tol": self.tol,
            "pass": self.passed,
            **self.extras,
        }


def _witness_checks(N: int, perturb: float) -> list[Check]:
    u = witness()
    g = math.pi ** (N / 2)
    heis = heisenberg(N)
    out = [
        Check("witness.gradient_norm", N, (N + 2) / 4 * g, gradient_seminorm_sq(u, None, N), 1e-8),
        Check("witness.moment_norm", N, (N + 2) / 4 * g, value_norm_sq(u, -2.0, N), 1e-8),
        Check("witness.l2_norm", N, g / 2, value_norm_sq(u, None, N), 1e-8),
        Check("witness.scale_noninv_deficit", N, g, scale_noninv_deficit(u, heis), 1e-8),
        Check("witness.delta1", N, g / 2, deficit_delta1(u, N), 1e-8),
        Check("witness.delta2", N, (N + 1) / 4 * g * g, deficit_delta2(u, N), 1e-8),
        Check("witness.d1", N, g / 2, distance_d1(u, heis)[0], 1e-8),
        Check("witness.d2", N, g, distance_d2(u, heis)[0], 1e-8),
        Check("witness.graph_distance", N, (N + 3) / 2 * g, graph_distance(u, N)[0], 1e-8),
    ]
    for theorem in ("T3_1", "T3_2", "T3_3", "T3_4", "E3_first", "E3_second"):
        rep = check_stability(theorem, u, N)
        ratio = rep.ratio * (perturb if theorem == "T3_1" else 1.0)
        shown = {"deficit": rep.deficit, "bound": rep.bound, "ratio": ratio}
        out.append(Check(f"{theorem}.equality_ratio", N, 1.0, ratio, 1e-8, extras=shown))
    constants = {"T3_1": 2.0, "T3_3": 0.5, "T3_4": 2 / (N + 3)}
    for theorem, c in constants.items():
        out.append(Check(f"{theorem}.constant", N, c, check_stability(theorem, u, N).constant, 1e-15))
    return out


def _identity_checks(N: int) -> list[Check]:
    g = math.pi ** (N / 2)
    u = witness()
    rep = identity_check(u, preset("c6", N))
    norm = value_norm_sq(u, None, N)
    out = [
        Check("c6.witness_deficit", N, g / 2, rep.lhs - N / 2 * norm, 1e-8),
        Check("c6.witness_residual", N, 0.0, rep.residual, 1e-9, absolute=True),
    ]
    gauss = gaussian()
    rep = general_identity_check(gauss, preset("c3", N), 1.0)
    out += [
        Check("c3.gaussian_lhs", N, N * g, rep.lhs, 1e-9),
        Check("c3.gaussian_rhs", N, N * g, rep.rhs, 1e-9),
        Check("c3.gaussian_remainder", N, 0.0, rep.remainder, 1e-9 * N * g, absolute=True),
    ]
    rep = identity_check(gauss, preset("c1", N))
    out.append(Check("c1.gaussian_residual", N, 0.0, rep.residual, 1e-9, absolute=True))
    return out


def _closed_form_checks(N: int) -> list[Check]:
    out = [
        Check("sharp_constant.heisenberg", N, N / 2, ckn_sharp_constant(heisenberg(N)), 1e-15),
        Check("sharp_constant.hardy", N, (N - 2) / 2, ckn_sharp_constant(CknParams(N, 1.0, 0.0)), 1e-15),
        Check("gamma_moment.gaussian_radial", N, 2 ** (N / 2 - 1) * math.gamma(N / 2),
              gamma_moment(N, 2.0, 1.0), 1e-12),
    ]
    if N == 5:
        out.append(Check("sharp_constant.hydrogen", N, 2.0, ckn_sharp_constant(CknParams(N, 0.0, 0.0)), 1e-15))
    return out


def _bessel_checks(N: int) -> list[Check]:
    return [
        Check(f"bessel.{name}.residual", N, 0.0, bessel_residual(make(N), N), 1e-12, absolute=True)
        for name, make in BESSEL_PAIRS.items()
    ]


def _poincare_checks(N: int) -> list[Check]:
    out = [
        Check(f"gap.gaussian_lambda={lam:g}", N, 2 / lam**2, gap_estimate(gaussian_measure(lam, N)), 1e-8)
        for lam in (0.5, 1.0, 2.0, 4.0)
    ]
    x1 = ModeFunction(1, TermSum.monomial(1.0))
    out.append(Check("poincare.x1_ratio", N, 2.0, poincare_check(x1, RadialMeasure(1.0, 2.0, 0.0, N)).ratio, 1e-10))
    mu = min(1.0, (N - 2) / 2)
    m = RadialMeasure(1.0, 1.5, mu, N)
    v = gaussian()
    out.append(Check("kelvin.dirichlet_residual", N, 0.0, kelvin_transform_check(v, m).residual, 1e-9,
                     absolute=True))
    out.append(Check("kelvin.variance_residual", N, 0.0,
                     kelvin_transform_check(v, m, side="variance", c=0.5).residual, 1e-9, absolute=True))
    return out


def run_selftest(dims=DEFAULT_DIMS, perturb: bool = False) -> list[Check]:
    """All reference checks for each dimension; ``perturb`` inflates the T3_1 ratio by 1%."""
    dims = tuple(dims) or DEFAULT_DIMS
    factor = 1.01 if perturb else 1.0
    checks: list[Check] = []
    for N in dims:
        checks += _witness_checks(N, factor)
        checks += _identity_checks(N)
        checks += _closed_form_checks(N)
        checks += _bessel_checks(N)
        checks += _poincare_checks(N)
    return checks
