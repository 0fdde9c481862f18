"""Symbolic sums of ``coeff * r**k * exp(-sum(beta * r**s / s))`` terms.

Every radial object in the package (profiles, weights, integrands) is a
:class:`TermSum`.  The family is closed under products, derivatives, powers of
a single term, dilation ``r -> c*r`` and transport ``r -> r**lam``, so nothing
is ever differentiated numerically.  Rates may be negative (growing factors),
which is how gauge transforms such as ``u * exp(+r**2/2)`` are represented;
they cancel once the matching measure is multiplied back in.

Evaluation happens in the log variable ``t = log r`` so that huge powers and
super-exponential tails never meet as ``inf * 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np

from .errors import FamilyClosure, NonIntegrable
from .numerics import Integrand, QuadratureResult, integrate_radial

Rates = tuple[tuple[float, float], ...]

_KEY_DIGITS = 12
_SNAP = 1e-12


def _key(x: float) -> float:
    return round(x, _KEY_DIGITS) + 0.0


def merge_rates(*groups: Rates) -> Rates:
    """Add rate lists; rates at equal exponents add, near-cancellations vanish."""
    acc: dict[float, list[float]] = {}
    for group in groups:
        for s, beta in group:
            slot = acc.setdefault(_key(s), [s, 0.0, 0.0])
            slot[1] += beta
            slot[2] += abs(beta)
    out = []
    for s, total, scale in acc.values():
        if abs(total) > _SNAP * scale:
            out.append((s, total))
    return tuple(sorted(out))


@dataclass(frozen=True)
class Term:
    coeff: float
    k: float
    rates: Rates = ()

    def __mul__(self, other: Term) -> Term:
        return Term(self.coeff * other.coeff, self.k + other.k, merge_rates(self.rates, other.rates))

    def scale(self, c: float) -> Term:
        return Term(self.coeff * c, self.k, self.rates)

    def shift(self, dk: float) -> Term:
        return Term(self.coeff, self.k + dk, self.rates)

    def derivative(self) -> list[Term]:
        out = []
        if self.k != 0.0:
            out.append(Term(self.coeff * self.k, self.k - 1.0, self.rates))
        for s, beta in self.rates:
            out.append(Term(-self.coeff * beta, self.k + s - 1.0, self.rates))
        return out

    def power(self, p: float) -> Term:
        if self.coeff < 0 and not float(p).is_integer():
            raise FamilyClosure("fractional power of a negative term leaves the family")
        if self.coeff == 0 and p < 0:
            raise FamilyClosure("negative power of a zero term")
        return Term(self.coeff**p, self.k * p, tuple((s, beta * p) for s, beta in self.rates))

    def dilate(self, lam: float) -> Term:
        """The term evaluated at ``lam * r``."""
        return Term(
            self.coeff * lam**self.k,
            self.k,
            tuple((s, beta * lam**s) for s, beta in self.rates),
        )

    def transport(self, lam: float) -> Term:
        """The term evaluated at ``r**lam``."""
        return Term(self.coeff, self.k * lam, tuple((s * lam, beta * lam) for s, beta in self.rates))

    def rate_exponent(self, t: np.ndarray) -> np.ndarray:
        if not self.rates:
            return np.zeros_like(t)
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.zeros_like(t)
            for s, beta in self.rates:
                out = out - (beta / s) * np.exp(s * t)
        bad = np.isnan(out)
        if bad.any():
            # inf - inf only happens where the largest exponent dominates
            out[bad] = -np.inf if self.rates[-1][1] > 0 else np.inf
        return out

    def log_abs(self, t: np.ndarray) -> np.ndarray:
        return math.log(abs(self.coeff)) + self.k * t + self.rate_exponent(t)

    def tail(self) -> tuple[str, float]:
        if not self.rates:
            return ("power", self.k)
        s, beta = self.rates[-1]
        if beta < 0:
            return ("growth", s)
        return ("exp_power", s)


class TermSum:
    """An immutable, canonicalized sum of :class:`Term`."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=()):
        self.terms: tuple[Term, ...] = _canonical(terms)
        self._hash = None

    # constructors
    @classmethod
    def monomial(cls, k: float = 0.0, coeff: float = 1.0, rates: Rates = ()) -> TermSum:
        return cls([Term(float(coeff), float(k), tuple(rates))])

    @classmethod
    def constant(cls, c: float) -> TermSum:
        return cls.monomial(0.0, c)

    @classmethod
    def gauss_power(cls, coeff: float, k: float, beta: float, s: float) -> TermSum:
        return cls.monomial(k, coeff, ((float(s), float(beta)),))

    # algebra
    def __add__(self, other):
        other = _coerce(other)
        return TermSum(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return TermSum(t.scale(-1.0) for t in self.terms)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return TermSum(t.scale(float(other)) for t in self.terms)
        other = _coerce(other)
        return TermSum(a * b for a, b in iproduct(self.terms, other.terms))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return self * (1.0 / other)
        return self * _coerce(other).power(-1.0)

    def __eq__(self, other):
        return isinstance(other, TermSum) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.terms)
        return self._hash

    def __repr__(self):
        return f"TermSum({list(self.terms)!r})"

    def __bool__(self):
        return bool(self.terms)

    def shift(self, dk: float) -> TermSum:
        """Multiply by ``r**dk``."""
        return TermSum(t.shift(dk) for t in self.terms)

    def derivative(self) -> TermSum:
        return TermSum(d for t in self.terms for d in t.derivative())

    def power(self, p: float) -> TermSum:
        if float(p).is_integer() and p >= 0:
            out = TermSum.constant(1.0)
            for _ in range(int(p)):
                out = out * self
            return out
        if len(self.terms) != 1:
            raise FamilyClosure("non-integer powers are closed only for single terms")
        return TermSum([self.terms[0].power(p)])

    def sqrt(self) -> TermSum:
        return self.power(0.5)

    def dilate(self, lam: float) -> TermSum:
        return TermSum(t.dilate(lam) for t in self.terms)

    def transport(self, lam: float) -> TermSum:
        return TermSum(t.transport(lam) for t in self.terms)

    # evaluation
    def eval_log(self, t) -> np.ndarray:
        """Value at ``r = exp(t)``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        cache: dict[Rates, np.ndarray] = {}
        with np.errstate(over="ignore"):
            for term in self.terms:
                e = cache.get(term.rates)
                if e is None:
                    e = cache[term.rates] = term.rate_exponent(t)
                out = out + math.copysign(1.0, term.coeff) * np.exp(
                    math.log(abs(term.coeff)) + term.k * t + e
                )
        return out

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("radial functions are evaluated at r > 0 only")
        return self.eval_log(np.log(r))

    def log_bound(self, t) -> np.ndarray:
        """Upper bound on ``log|value|`` at ``r = exp(t)``."""
        t = np.asarray(t, dtype=float)
        if not self.terms:
            return np.full_like(t, -np.inf)
        out = np.full_like(t, -np.inf)
        for term in self.terms:
            out = np.maximum(out, term.log_abs(t))
        return out + math.log(len(self.terms))

    # structure
    def leading_power(self, max_extra: float = 6.0) -> float:
        """Exponent of the first non-cancelling power in the small-r expansion.

        Exponentials are expanded in their Taylor series so that sums such as
        ``exp(-r) - exp(-2r)`` report exponent 1 rather than 0.  If everything
        cancels up to ``max_extra`` beyond the smallest ``k``, that bound is
        returned (a conservative lower bound).
        """
        if not self.terms:
            return math.inf
        kmin = min(t.k for t in self.terms)
        acc: dict[float, list[float]] = {}
        for term in self.terms:
            for extra, c in _exp_series(term.rates, max_extra + kmin - term.k):
                slot = acc.setdefault(_key(term.k + extra), [0.0, 0.0])
                slot[0] += term.coeff * c
                slot[1] += abs(term.coeff * c)
        for p in sorted(acc):
            total, scale = acc[p]
            if abs(total) > 1e-10 * scale:
                return p
        return kmin + max_extra

    def tail(self) -> tuple[str, float]:
        """Decay class at infinity: ("exp_power", s), ("power", q) or ("growth", s)."""
        kinds = [t.tail() for t in self.terms]
        growth = [v for kind, v in kinds if kind == "growth"]
        if growth:
            return ("growth", max(growth))
        powers = [v for kind, v in kinds if kind == "power"]
        if powers:
            return ("power", max(powers))
        return ("exp_power", min(v for _, v in kinds))

    def is_single(self) -> bool:
        return len(self.terms) == 1

    # integration
    def integrand(self) -> Integrand:
        """Wrap as an integrand in r (the dr = r dt factor is handled here)."""
        jac = self.shift(1.0)
        kind, val = self.tail()
        if kind == "growth":
            raise NonIntegrable(f"integrand grows like exp(+c r^{val:g}) at infinity")
        return Integrand(
            evaluator=self.__call__,
            zero_exponent=self.leading_power(),
            tail_class=(kind, val),
            log_evaluator=jac.eval_log,
            log_bound=jac.log_bound,
        )

    def integrate(self, rel_tol: float = 1e-12) -> QuadratureResult:
        """Integral over (0, inf) in dr."""
        if not self.terms:
            return QuadratureResult(0.0, 0.0, 1)
        return integrate_radial(self.integrand(), rel_tol)


def _coerce(x) -> TermSum:
    if isinstance(x, TermSum):
        return x
    if isinstance(x, Term):
        return TermSum([x])
    if isinstance(x, (int, float)):
        return TermSum.constant(float(x))
    raise TypeError(f"cannot use {type(x).__name__} as a radial function")


def _canonical(terms) -> tuple[Term, ...]:
    acc: dict[tuple, list] = {}
    for t in terms:
        if t.coeff == 0.0:
            continue
        key = (_key(t.k), tuple((_key(s), _key(b)) for s, b in t.rates))
        slot = acc.setdefault(key, [t, 0.0, 0.0])
        slot[1] += t.coeff
        slot[2] += abs(t.coeff)
    out = []
    for first, total, scale in acc.values():
        if abs(total) > 1e-14 * scale:
            out.append(Term(total, first.k, first.rates))
    out.sort(key=lambda t: (t.k, t.rates))
    return tuple(out)


def _exp_series(rates: Rates, limit: float):
    """Taylor coefficients of exp(-sum beta r^s / s) up to total exponent ``limit``."""
    series = [(0.0, 1.0)]
    for s, beta in rates:
        nxt = []
        for extra, c in series:
            n, term = 0, 1.0
            while extra + n * s <= limit + 1e-12:
                nxt.append((extra + n * s, c * term))
                n += 1
                term *= -beta / s / n
        series = nxt
    return series
