"""Radial building blocks of test functions.

A test function is ``u(x) = f(|x|)`` (mode 0) or ``u(x) = (x_1/|x|) f(|x|)``
(mode 1), with ``f`` a finite sum of ``coeff * r**k * exp(-beta * r**s / s)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConstraintUnsatisfiable, DomainError
from .terms import TermSum

FUNCTIONALS = ("value", "gradient", "radial")


@dataclass(frozen=True)
class GaussPowerTerm:
    coeff: float
    k: float
    beta: float
    s: float

    def __post_init__(self):
        for name in ("coeff", "k", "beta", "s"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.beta > 0 and self.s > 0 and self.k >= 0):
            raise DomainError(f"need beta > 0, s > 0, k >= 0; got {self}")
        if not all(math.isfinite(v) for v in (self.coeff, self.k, self.beta, self.s)):
            raise DomainError("profile parameters must be finite")


@dataclass(frozen=True)
class RadialProfile:
    terms: tuple[GaussPowerTerm, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise DomainError("a radial profile needs at least one term")
        object.__setattr__(self, "terms", terms)

    def __add__(self, other: RadialProfile) -> RadialProfile:
        return RadialProfile(self.terms + other.terms)

    def as_terms(self) -> TermSum:
        out = TermSum()
        for t in self.terms:
            out = out + TermSum.gauss_power(t.coeff, t.k, t.beta, t.s)
        return out

    def __call__(self, r):
        return self.as_terms()(r)


@dataclass(frozen=True)
class ModeFunction:
    """``u = f(|x|)`` for mode 0, ``u = (x_1/|x|) f(|x|)`` for mode 1.

    ``radial`` is normally a :class:`RadialProfile`; any :class:`TermSum`
    is accepted too (the Poincare module uses plain polynomials).
    """

    mode: int
    radial: RadialProfile | TermSum
    f: TermSum = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in (0, 1):
            raise DomainError("mode must be 0 or 1")
        f = self.radial.as_terms() if isinstance(self.radial, RadialProfile) else self.radial
        if not isinstance(f, TermSum):
            raise DomainError("radial part must be a RadialProfile or TermSum")
        if self.mode == 1 and f.leading_power() < 1.0:
            raise DomainError("a mode-1 function needs a radial part vanishing like r^k, k >= 1")
        object.__setattr__(self, "f", f)

    @classmethod
    def raw(cls, mode: int, f: TermSum) -> ModeFunction:
        """Build without the origin check (gauge-transformed intermediates)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "mode", mode)
        object.__setattr__(obj, "radial", f)
        object.__setattr__(obj, "f", f)
        return obj

    def __hash__(self):
        return hash((self.mode, self.f))

    def __eq__(self, other):
        return isinstance(other, ModeFunction) and self.mode == other.mode and self.f == other.f


def gaussian(beta: float = 1.0, coeff: float = 1.0, s: float = 2.0) -> ModeFunction:
    """``coeff * exp(-beta * |x|**s / s)`` as a radial function."""
    return ModeFunction(0, RadialProfile((GaussPowerTerm(coeff, 0.0, beta, s),)))


def witness() -> ModeFunction:
    """``x_1 * exp(-|x|**2 / 2)``."""
    return ModeFunction(1, RadialProfile((GaussPowerTerm(1.0, 1.0, 1.0, 2.0),)))


def eval_profile(g: RadialProfile | TermSum, r: float) -> tuple[float, float]:
    if not r > 0:
        raise DomainError("profiles are evaluated at r > 0")
    ts = g.as_terms() if isinstance(g, RadialProfile) else g
    return float(ts(r)), float(ts.derivative()(r))


@dataclass(frozen=True)
class ValidationEntry:
    functional: str
    weight: float
    exponent: float
    passed: bool


@dataclass(frozen=True)
class ValidationReport:
    entries: tuple[ValidationEntry, ...]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list[ValidationEntry]:
        return [e for e in self.entries if not e.passed]


def reduced_exponents(u: ModeFunction, p: float, N: int) -> dict[str, float]:
    """Small-r exponents of the reduced integrands for weight |x|^(-p)."""
    f, df = u.f, u.f.derivative()
    lead_f = f.leading_power()
    lead_df = df.leading_power()
    base = N - 1 - p
    value = base + 2 * lead_f
    radial = base + 2 * lead_df if df else math.inf
    gradient = radial
    if u.mode == 1:
        gradient = min(radial, base - 2 + 2 * lead_f)
    return {"value": value, "gradient": gradient, "radial": radial}


def validate_mode_function(u: ModeFunction, weights, N: int, functionals=FUNCTIONALS) -> ValidationReport:
    """Check integrability at the origin of each functional under each weight.

    A weight is either a power p (checked for every functional) or a pair
    ``(functional, p)`` checked for that functional only.
    """
    entries = []
    for w in weights:
        names, p = (functionals, w) if isinstance(w, (int, float)) else ((w[0],), w[1])
        exps = reduced_exponents(u, float(p), N)
        for name in names:
            e = exps[name]
            entries.append(ValidationEntry(name, float(p), e, e > -1.0))
    return ValidationReport(tuple(entries))


def random_profile(seed: int, cls: str = "radial", N: int = 3, pmax: float = 0.0,
                   weights=None, max_attempts: int = 200) -> ModeFunction:
    """Deterministic random test function.

    Validated on the weights ``{0, pmax}`` for all three functionals, or on
    ``weights`` (same format as :func:`validate_mode_function`) when given;
    the smallest admissible power k is raised when the weights demand it.
    """
    if cls not in ("radial", "mode1"):
        raise DomainError("class must be 'radial' or 'mode1'")
    mode = 1 if cls == "mode1" else 0
    weights = tuple(weights) if weights is not None else (0.0, float(pmax))
    rng = np.random.default_rng(seed)

    def ok(profile):
        u = ModeFunction(mode, profile)
        return u if validate_mode_function(u, weights, N).passed else None

    kmin = None
    for k in (mode, 1, 2):
        if k < mode:
            continue
        probe = RadialProfile((GaussPowerTerm(1.0, k, 1.0, 0.8),))
        if ok(probe) is not None:
            kmin = k
            break
    if kmin is None:
        raise ConstraintUnsatisfiable(f"no k <= 2 makes a profile integrable for weights {weights} in N={N}")

    for _ in range(max_attempts):
        n = int(rng.integers(1, 4))
        terms = []
        for _ in range(n):
            k = int(rng.integers(kmin, 3))
            s = float(rng.uniform(0.8, 2.4))
            beta = float(rng.uniform(0.3, 4.0))
            coeff = float(rng.uniform(0.05, 2.0)) * (1.0 if rng.random() < 0.5 else -1.0)
            terms.append(GaussPowerTerm(coeff, k, beta, s))
        u = ok(RadialProfile(tuple(terms)))
        if u is not None:
            return u
    raise ConstraintUnsatisfiable("random_profile exhausted its attempts")


def dilate(u: ModeFunction, lam: float) -> ModeFunction:
    """``x -> u(lam * x)``."""
    if not lam > 0:
        raise DomainError("dilation factor must be positive")
    if isinstance(u.radial, RadialProfile):
        terms = tuple(
            GaussPowerTerm(t.coeff * lam**t.k, t.k, t.beta * lam**t.s, t.s) for t in u.radial.terms
        )
        return ModeFunction(u.mode, RadialProfile(terms))
    return ModeFunction(u.mode, u.f.dilate(lam))


def transport(g: RadialProfile, lam: float) -> RadialProfile:
    """The profile ``r -> g(r**lam)``, again in the family."""
    return RadialProfile(tuple(GaussPowerTerm(t.coeff, t.k * lam, t.beta * lam, t.s * lam) for t in g.terms))


def profile_to_dict(u: ModeFunction) -> dict:
    if not isinstance(u.radial, RadialProfile):
        raise DomainError("only GaussPower profiles have a JSON form")
    return {
        "mode": u.mode,
        "terms": [{"coeff": t.coeff, "k": t.k, "beta": t.beta, "s": t.s} for t in u.radial.terms],
    }


def profile_from_dict(data: dict) -> ModeFunction:
    try:
        mode = data["mode"]
        raw = data["terms"]
        terms = tuple(GaussPowerTerm(t["coeff"], t["k"], t["beta"], t["s"]) for t in raw)
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed profile: {exc}") from None
    if mode not in (0, 1) or isinstance(mode, bool):
        raise DomainError("profile mode must be 0 or 1")
    return ModeFunction(int(mode), RadialProfile(terms))


def profile_to_json(u: ModeFunction) -> str:
    return json.dumps(profile_to_dict(u))


def profile_from_json(text: str) -> ModeFunction:
    """Parse inline JSON, ``@path`` to a JSON file, or a shorthand name."""
    text = text.strip()
    named = {"gaussian": gaussian, "witness": witness}
    if text in named:
        return named[text]()
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"profile is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise DomainError("profile JSON must be an object")
    return profile_from_dict(data)
