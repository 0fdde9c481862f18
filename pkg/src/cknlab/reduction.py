"""N-dimensional functionals of mode functions as 1-D radial integrals.

For ``u = f(r)`` (mode 0) or ``u = (x_1/r) f(r)`` (mode 1) the angular
integrals are explicit: the sphere average of ``(x_1/r)**2`` is ``1/N`` and
the tangential gradient contributes ``l(l+N-2) f**2 / r**2``.  Everything
below is assembled from that.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError, UnknownPreset
from .numerics import surface_area
from .profiles import ModeFunction, RadialProfile
from .terms import TermSum

REL_TOL = 1e-12


@dataclass(frozen=True)
class WeightSpec:
    """The weight ``|x|**(-p) * extra(|x|)``."""

    p: float = 0.0
    extra: RadialProfile | TermSum | None = None

    def as_terms(self) -> TermSum:
        w = TermSum.monomial(-float(self.p))
        if self.extra is not None:
            extra = self.extra.as_terms() if isinstance(self.extra, RadialProfile) else self.extra
            w = w * extra
        return w


def as_weight(w) -> TermSum:
    """Accept a WeightSpec, a bare power p (weight |x|^-p) or a TermSum."""
    if w is None:
        return TermSum.constant(1.0)
    if isinstance(w, WeightSpec):
        return w.as_terms()
    if isinstance(w, TermSum):
        return w
    if isinstance(w, RadialProfile):
        return w.as_terms()
    if isinstance(w, (int, float)):
        return TermSum.monomial(-float(w))
    raise TypeError(f"unsupported weight {w!r}")


def as_radial(x) -> TermSum:
    """Coefficient functions A, B: a bare number is a constant here."""
    if isinstance(x, (int, float)):
        return TermSum.constant(float(x))
    return as_weight(x)


def _check_dim(N: int) -> None:
    if int(N) != N or N < 3:
        raise DomainError("dimension N must be an integer >= 3")


def angular_factor(mode: int, N: int) -> float:
    omega = surface_area(N)
    return omega if mode == 0 else omega / N


def angular_penalty(mode: int, N: int) -> float:
    return mode * (mode + N - 2)


def integrand_value(u: ModeFunction, weight: TermSum, N: int) -> TermSum:
    return (weight * u.f * u.f).shift(N - 1)


def integrand_radial(u: ModeFunction, weight: TermSum, N: int) -> TermSum:
    df = u.f.derivative()
    return (weight * df * df).shift(N - 1)


def integrand_gradient(u: ModeFunction, weight: TermSum, N: int) -> TermSum:
    df = u.f.derivative()
    inner = df * df
    pen = angular_penalty(u.mode, N)
    if pen:
        inner = inner + (u.f * u.f).shift(-2.0) * float(pen)
    return (weight * inner).shift(N - 1)


def _integral(u: ModeFunction, integrand: TermSum, N: int, rel_tol: float) -> float:
    _check_dim(N)
    return angular_factor(u.mode, N) * integrand.integrate(rel_tol).value


def value_norm_sq(u: ModeFunction, w=None, N: int = 3, rel_tol: float = REL_TOL) -> float:
    """int w |u|^2 dx."""
    return _integral(u, integrand_value(u, as_weight(w), N), N, rel_tol)


def radial_seminorm_sq(u: ModeFunction, w=None, N: int = 3, rel_tol: float = REL_TOL) -> float:
    """int w |Ru|^2 dx with R the radial derivative."""
    return _integral(u, integrand_radial(u, as_weight(w), N), N, rel_tol)


def gradient_seminorm_sq(u: ModeFunction, w=None, N: int = 3, rel_tol: float = REL_TOL) -> float:
    """int w |grad u|^2 dx."""
    return _integral(u, integrand_gradient(u, as_weight(w), N), N, rel_tol)


def seminorm_sq(u: ModeFunction, w, N: int, form: str, rel_tol: float = REL_TOL) -> float:
    if form == "gradient":
        return gradient_seminorm_sq(u, w, N, rel_tol)
    if form == "radial":
        return radial_seminorm_sq(u, w, N, rel_tol)
    raise DomainError(f"form must be 'gradient' or 'radial', got {form!r}")


def cross_term(u: ModeFunction, A, B, N: int, rel_tol: float = REL_TOL) -> float:
    """int 2 A B u Ru dx."""
    A, B = as_radial(A), as_radial(B)
    integrand = (A * B * u.f * u.f.derivative()).shift(N - 1) * 2.0
    return _integral(u, integrand, N, rel_tol)


def inner_product(u: ModeFunction, v: ModeFunction, w=None, N: int = 3, rel_tol: float = REL_TOL) -> float:
    """int w u v dx; exactly zero across different modes."""
    if u.mode != v.mode:
        return 0.0
    return _integral(u, (as_weight(w) * u.f * v.f).shift(N - 1), N, rel_tol)


def gradient_inner_product(u: ModeFunction, v: ModeFunction, w=None, N: int = 3,
                           rel_tol: float = REL_TOL) -> float:
    """int w grad u . grad v dx; exactly zero across different modes."""
    if u.mode != v.mode:
        return 0.0
    inner = u.f.derivative() * v.f.derivative()
    pen = angular_penalty(u.mode, N)
    if pen:
        inner = inner + (u.f * v.f).shift(-2.0) * float(pen)
    return _integral(u, (as_weight(w) * inner).shift(N - 1), N, rel_tol)


def remainder_parts(u: ModeFunction, A, B, alpha: float, N: int, form: str = "gradient",
                    rel_tol: float = REL_TOL) -> tuple[float, float]:
    """The remainder |alpha A D u + B u x/(alpha |x|)|^2 integrated, and its scale.

    Assembled from the three expanded pieces; the scale is the sum of their
    absolute values and bounds the cancellation error.
    """
    if alpha == 0:
        raise DomainError("alpha must be nonzero")
    A, B = as_radial(A), as_radial(B)
    first = alpha**2 * seminorm_sq(u, A * A, N, form, rel_tol)
    cross = cross_term(u, A, B, N, rel_tol)
    last = alpha**-2 * value_norm_sq(u, B * B, N, rel_tol)
    return first + cross + last, abs(first) + abs(cross) + abs(last)


def remainder_gradient(u: ModeFunction, A, B, alpha: float, N: int, rel_tol: float = REL_TOL) -> float:
    return remainder_parts(u, A, B, alpha, N, "gradient", rel_tol)[0]


def remainder_radial(u: ModeFunction, A, B, alpha: float, N: int, rel_tol: float = REL_TOL) -> float:
    return remainder_parts(u, A, B, alpha, N, "radial", rel_tol)[0]


def ground_state_remainder(u: ModeFunction, A, phi: TermSum, alpha: float, N: int, form: str = "gradient",
                           rel_tol: float = REL_TOL) -> float:
    """The remainder written through the ground state ``phi`` (with B = -A phi'/phi).

    With ``G = phi**(-1/alpha**2)`` one has
    ``alpha A D u + B u x/(alpha|x|) = alpha A G**-1 D(u G)``, so the remainder
    is a weighted Dirichlet integral of ``u G`` with nonnegative integrand.
    """
    if alpha == 0:
        raise DomainError("alpha must be nonzero")
    A = as_radial(A)
    gauge = phi.power(-1.0 / alpha**2)
    v = ModeFunction.raw(u.mode, u.f * gauge)
    weight = A * A * phi.power(2.0 / alpha**2) * alpha**2
    if form == "gradient":
        return gradient_seminorm_sq(v, weight, N, rel_tol)
    if form == "radial":
        return radial_seminorm_sq(v, weight, N, rel_tol)
    raise DomainError(f"form must be 'gradient' or 'radial', got {form!r}")


def extremal_profile(a: float, b: float, beta: float = 1.0, coeff: float = 1.0) -> TermSum:
    """``coeff * exp(-beta r**sigma / sigma)`` with ``sigma = b + 1 - a``."""
    sigma = b + 1.0 - a
    if not sigma > 0:
        raise DomainError("the extremal family needs b + 1 - a > 0")
    return TermSum.gauss_power(coeff, 0.0, beta, sigma)


FACTORIZED_PRESETS = ("c2_grad", "c2_radial", "c6", "hup1", "ckn1")


def factorized_remainder(u: ModeFunction, preset_id: str, params: dict | None = None, N: int = 3,
                         form: str | None = None, rel_tol: float = REL_TOL) -> float:
    """Remainder of a named preset in its factorized (ground-state) form.

    ``c2_grad``/``c2_radial`` take ``lam``; ``ckn1`` takes ``a`` and ``b``;
    ``c6`` is evaluated at the optimal alpha, the others at alpha = 1.
    The returned value is the full remainder integral, without the factor 1/2
    that the optimized identity places in front of it.
    """
    params = dict(params or {})
    _check_dim(N)
    if preset_id in ("c2_grad", "c2_radial"):
        lam = float(params.get("lam", 0.0))
        A = TermSum.monomial(-lam / 2)
        phi = TermSum.monomial(-(N - lam - 2) / 2)
        return ground_state_remainder(u, A, phi, 1.0, N, "gradient" if preset_id == "c2_grad" else "radial",
                                      rel_tol)
    form = form or "gradient"
    gauss = TermSum.gauss_power(1.0, 0.0, 1.0, 2.0)
    if preset_id == "hup1":
        return ground_state_remainder(u, TermSum.constant(1.0), gauss, 1.0, N, form, rel_tol)
    if preset_id == "c6":
        top = seminorm_sq(u, None, N, form, rel_tol)
        bottom = value_norm_sq(u, -2.0, N, rel_tol)
        alpha = (bottom / top) ** 0.25
        return ground_state_remainder(u, TermSum.constant(1.0), gauss, alpha, N, form, rel_tol)
    if preset_id == "ckn1":
        a, b = float(params["a"]), float(params["b"])
        if not N - a - b - 1 > 0:
            raise DomainError("ckn1 needs N - a - b - 1 > 0")
        return ground_state_remainder(u, TermSum.monomial(-b), extremal_profile(a, b), 1.0, N, form, rel_tol)
    raise UnknownPreset(f"no factorized form for preset {preset_id!r}; known: {', '.join(FACTORIZED_PRESETS)}")

