"""Shared oracles. Nothing here goes through TermSum or the package quadrature."""

import math

import numpy as np
import pytest
from scipy import integrate

from cknlab.profiles import RadialProfile


def sphere(N):
    return 2 * math.pi ** (N / 2) / math.gamma(N / 2)


def profile_value(profile: RadialProfile, r):
    return sum(t.coeff * r**t.k * math.exp(-t.beta * r**t.s / t.s) for t in profile.terms)


def profile_slope(profile: RadialProfile, r):
    return sum(
        t.coeff * (t.k * r ** (t.k - 1) - t.beta * r ** (t.k + t.s - 1)) * math.exp(-t.beta * r**t.s / t.s)
        for t in profile.terms
    )


def radial_quad(g, N):
    """|S^{N-1}| * int_0^inf g(r) r^(N-1) dr, split at 1 for the origin singularities."""
    f = lambda r: g(r) * r ** (N - 1)
    left = integrate.quad(f, 0, 1, epsabs=0, epsrel=1e-13, limit=400)[0]
    right = integrate.quad(f, 1, np.inf, epsabs=0, epsrel=1e-13, limit=400)[0]
    return sphere(N) * (left + right)


def oracle_norms(u, p, N):
    """int |x|^-p |u|^2 and int |x|^-p |grad u|^2 for a GaussPower mode function, by scipy quad."""
    prof = u.radial
    omega_factor = 1.0 if u.mode == 0 else 1.0 / N
    value = radial_quad(lambda r: r**-p * profile_value(prof, r) ** 2, N) * omega_factor
    pen = u.mode * (u.mode + N - 2)
    grad = radial_quad(
        lambda r: r**-p * (profile_slope(prof, r) ** 2 + pen * profile_value(prof, r) ** 2 / r**2), N
    ) * omega_factor
    return value, grad


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
