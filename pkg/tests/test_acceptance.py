"""Acceptance battery: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines are
written straight to the terminal so they survive output capture.
"""

import math
import subprocess
import sys

import numpy as np
import pytest
from scipy import integrate

from cknlab.closedform import CknParams, extremal_norms, heisenberg
from cknlab.identities import (
    BESSEL_PAIRS,
    bessel_residual,
    factorized_for_pair,
    identity_check,
    optimal_alpha,
    preset,
    required_weights,
)
from cknlab.poincare import (
    RadialMeasure,
    gap_estimate,
    gaussian_measure,
    kelvin_transform_check,
    poincare_check,
)
from cknlab.profiles import ModeFunction, dilate, random_profile, witness
from cknlab.reduction import extremal_profile, gradient_seminorm_sq, value_norm_sq
from cknlab.stability import (
    EmpiricalConstants,
    check_stability,
    deficit_ckn1,
    deficit_delta1,
    deficit_delta2,
    deficit_scale,
    distance_d1,
    distance_d2,
    graph_distance,
    scale_noninv_deficit,
)
from cknlab.terms import TermSum
from conftest import profile_value, sphere

DIMS = (3, 4, 5, 7)


@pytest.fixture
def report(capsys):
    def emit(number, title, failures):
        with capsys.disabled():
            status = "PASS" if not failures else "FAIL"
            print(f"\n[{status}] criterion {number}: {title}" + (f" ({len(failures)} failures)" if failures else ""))
        assert not failures, failures[:5]
    return emit


def close(x, y, rel):
    return abs(x - y) <= rel * max(abs(x), abs(y))


def ckn_weights(p):
    return [0.0, 2 * p.a, p.mid_power, ("gradient", 2 * p.b), ("radial", 2 * p.b), 2 * p.b * p.N / (p.N - 2)]


# 1 ---------------------------------------------------------------------------

def test_witness_reproduction(report):
    bad = []
    u = witness()
    for N in DIMS:
        g, p = math.pi ** (N / 2), heisenberg(N)
        expected = {
            "gradient": ((N + 2) / 4 * g, gradient_seminorm_sq(u, None, N)),
            "moment": ((N + 2) / 4 * g, value_norm_sq(u, -2.0, N)),
            "l2": (g / 2, value_norm_sq(u, None, N)),
            "scale_noninv": (g, scale_noninv_deficit(u, p)),
            "delta1": (g / 2, deficit_delta1(u, N)),
            "d1": (g / 2, distance_d1(u, p)[0]),
            "d2": (g, distance_d2(u, p)[0]),
            "graph": ((N + 3) / 2 * g, graph_distance(u, N)[0]),
            "delta2": ((N + 1) / 4 * g * g, deficit_delta2(u, N)),
        }
        for name, (want, got) in expected.items():
            if not close(want, got, 1e-8):
                bad.append((N, name, want, got))
        constants = {"T3_1": 2.0, "T3_2": 1.0, "T3_3": 0.5, "T3_4": 2 / (N + 3), "E3_first": 1.0}
        for theorem, c in constants.items():
            rep = check_stability(theorem, u, N)
            if not (close(rep.ratio, 1.0, 1e-8) and rep.constant == c and rep.passed):
                bad.append((N, theorem, rep.ratio, rep.constant))
        d1 = distance_d1(u, p)[0]
        chain = N * value_norm_sq(u, None, N) * d1 + d1 * d1
        if not close(chain, (N + 1) / 4 * g * g, 1e-8):
            bad.append((N, "E3 chain", chain))
    report(1, "witness reproduction", bad)


# 2 ---------------------------------------------------------------------------

def identity_configs():
    rng = np.random.default_rng(20240)
    configs = [("c1", 4, {})]
    configs += [("c2", 5, {"lam": lam}) for lam in (0.0, 1.0, 2.5)]
    configs.append(("c3", 3, {}))
    configs.append(("c6", 4, {}))
    for name in ("c4", "c7"):
        drawn = 0
        while drawn < 5:
            N = int(rng.integers(3, 7))
            a, b = float(rng.uniform(-1.5, 1.5)), float(rng.uniform(-0.8, 1.2))
            if abs(N - 1 - a - b) < 0.2 or (name == "c7" and b + 1 - a < 0.2):
                continue
            configs.append((name, N, {"a": a, "b": b}))
            drawn += 1
    for name in ("c5", "c8"):
        configs += [(name, 5, {"pair": pair}) for pair in BESSEL_PAIRS]
    return configs


def test_identity_battery(report):
    configs = identity_configs()
    assert len(configs) == 20
    bad = []
    for index, (name, N, kw) in enumerate(configs):
        pair = preset(name, N, **kw)
        weights = required_weights(pair)
        for seed in range(50):
            u = random_profile(1000 * index + seed, "mode1" if seed % 2 else "radial", N, weights=weights)
            for form in ("gradient", "radial"):
                rep = identity_check(u, pair, form)
                if not (rep.passed and rep.residual <= 1e-8 and rep.remainder_ok):
                    bad.append((name, N, kw, seed, form, rep.residual, rep.remainder))
                    continue
                if pair.ground_state is None:
                    continue
                if pair.identity == "ckn":
                    direct, fac = 2 * rep.remainder, factorized_for_pair(u, pair, optimal_alpha(u, pair, form), form)
                else:
                    direct, fac = rep.remainder, factorized_for_pair(u, pair, 1.0, form)
                if abs(direct - fac) > 1e-8 * max(abs(direct), rep.scale, 1e-300):
                    bad.append((name, N, kw, seed, form, "factorized", direct, fac))
    report(2, "identity battery", bad)


# 3 ---------------------------------------------------------------------------

def quad_moment(power, sigma, beta, N):
    f = lambda r: math.exp(-2 * beta * r**sigma / sigma) * r ** (N - 1 - power)
    return sphere(N) * (integrate.quad(f, 0, 1, epsabs=0, epsrel=1e-13, limit=200)[0]
                        + integrate.quad(f, 1, np.inf, epsabs=0, epsrel=1e-13, limit=200)[0])


def test_closed_form_oracle(report):
    rng = np.random.default_rng(33)
    bad, drawn = [], 0
    while drawn < 30:
        N = int(rng.integers(3, 8))
        a, b = float(rng.uniform(-1.5, 1.0)), float(rng.uniform(-0.5, 1.0))
        alpha, beta = float(rng.uniform(0.3, 2.0)), float(np.exp(rng.uniform(-1, 1)))
        p = CknParams(N, a, b)
        if not (p.sigma > 0.3 and p.gap > 0.3 and N - 2 * a > 0.3):
            continue
        drawn += 1
        mid, na, grad = extremal_norms(p, alpha, beta)
        s = p.sigma
        ref_mid = alpha**2 * quad_moment(p.mid_power, s, beta, N)
        ref_a = alpha**2 * quad_moment(2 * a, s, beta, N)
        # |phi'|^2 = beta^2 r^(2 sigma - 2) phi^2, weighted by r^-2b
        ref_grad = alpha**2 * beta**2 * quad_moment(2 * b - 2 * s + 2, s, beta, N)
        for label, got, want in (("mid", mid, ref_mid), ("a", na, ref_a), ("grad", grad, ref_grad)):
            if not close(got, want, 1e-10):
                bad.append((N, a, b, alpha, beta, label, got, want))
        u = ModeFunction(0, extremal_profile(a, b, beta, alpha))
        if abs(deficit_ckn1(u, p)) > 1e-9 * mid:
            bad.append((N, a, b, alpha, beta, "equality", deficit_ckn1(u, p)))
    report(3, "closed-form oracle", bad)


# 4 ---------------------------------------------------------------------------

def test_poincare(report):
    bad = []
    for N in (3, 5):
        for lam in (0.5, 1.0, 2.0, 4.0):
            gap = gap_estimate(gaussian_measure(lam, N))
            if not close(gap, 2 / lam**2, 1e-8):
                bad.append(("gauss", N, lam, gap))
    for m in (RadialMeasure(1.0, 1.0, 0.0, 3), RadialMeasure(0.5, 3.0, 0.0, 5), RadialMeasure(2.0, 1.4, 0.0, 4)):
        est = [gap_estimate(m, n=n) for n in range(2, 17)]
        if not all(y <= x * (1 + 1e-10) for x, y in zip(est, est[1:])):
            bad.append(("monotone", m, est))
    ratio = poincare_check(ModeFunction(1, TermSum.monomial(1.0)), gaussian_measure(1.0, 3)).ratio
    if not close(ratio, 2.0, 1e-10):
        bad.append(("x1", ratio))
    report(4, "Poincare gaps", bad)


# 5 ---------------------------------------------------------------------------

def test_kelvin_transform(report):
    bad = []
    rng = np.random.default_rng(55)
    for N, mu in ((4, 1.0), (5, 2.0), (6, 0.5)):
        m = RadialMeasure(float(rng.uniform(0.5, 2)), float(rng.uniform(1.0, 2.5)), mu, N)
        weights = [0.0, m.variance_power, ("gradient", mu), ("radial", mu)]
        for seed in range(30):
            v = random_profile(seed, "radial", N, weights=weights)
            c = float(rng.normal())
            for side, shift in (("dirichlet", 0.0), ("variance", c)):
                rep = kelvin_transform_check(v, m, side=side, c=shift)
                if rep.residual > 1e-9:
                    bad.append((N, mu, seed, side, rep.residual))
    report(5, "Kelvin transform", bad)


# 6 ---------------------------------------------------------------------------

HEISENBERG_THEOREMS = ("T3_1", "T3_2", "T3_3", "T3_4", "E3_first", "E3_second")
WEIGHTED = {
    "T3_5": [(4, -0.5, 0.0), (5, -0.2, 0.0)],
    "T3_6a": [(5, 0.1, 0.3), (6, 0.4, 0.5)],
    "T3_6b": [(5, None, 0.6), (6, None, 0.8)],
    "T3_7": [(5, None, 0.6), (6, None, 0.8)],
    "T3_8": [(5, None, 0.6), (6, None, 0.8)],
}


def test_stability_battery(report, tmp_path):
    bad = []
    for seed in range(100):
        N = 3 + seed % 4
        u = random_profile(seed, "mode1" if seed % 3 == 0 else "radial", N, pmax=-2.0)
        p = heisenberg(N)
        d1, _ = distance_d1(u, p)
        d2, _ = distance_d2(u, p)
        delta1, delta2 = deficit_delta1(u, N), deficit_delta2(u, N)
        norm, scale = value_norm_sq(u, None, N), deficit_scale(u, p)
        slack = 1e-9 * scale
        checks = {
            "delta1>=d1": delta1 >= d1 - slack,
            "delta1>=d2/2": delta1 >= d2 / 2 - slack,
            "d1<=d2": d1 <= d2 + slack,
            "delta2>=implied": delta2 >= N * norm * delta1 + delta1**2 - 1e-9 * scale**2,
            "deficits>=0": delta1 >= -slack and delta2 >= -1e-9 * scale**2
            and scale_noninv_deficit(u, p) >= -slack,
        }
        bad += [(seed, k) for k, ok in checks.items() if not ok]
        for theorem in HEISENBERG_THEOREMS:
            rep = check_stability(theorem, u, N)
            if not (rep.passed and rep.deficit >= -1e-9 * rep.scale):
                bad.append((seed, theorem, rep.deficit, rep.bound))

    consts = EmpiricalConstants()
    for theorem, settings in WEIGHTED.items():
        for k, (N, a, b) in enumerate(settings):
            p = CknParams.aligned(N, b) if a is None else CknParams(N, a, b)
            for seed in range(50):
                u = random_profile(seed, "mode1" if seed % 2 else "radial", N, weights=ckn_weights(p))
                rep = check_stability(theorem, u, N, p.a, p.b)
                consts.record(rep, N, p.a, p.b)
                if not rep.passed or rep.deficit < -1e-9 * rep.scale:
                    bad.append((theorem, N, seed, rep.ratio))
    # D2AB with the battery minimum of T3_6b as its constant
    for N, _, b in WEIGHTED["T3_6b"]:
        p = CknParams.aligned(N, b)
        c_min = consts.to_dict()[f"T3_6b|N={N}|a={p.a!r}|b={p.b!r}"]
        for seed in range(50):
            u = random_profile(seed, "mode1" if seed % 2 else "radial", N, weights=ckn_weights(p))
            if not check_stability("D2AB", u, N, p.a, p.b, constant=c_min).passed:
                bad.append(("D2AB", N, seed))
    path = tmp_path / "empirical_constants.json"
    consts.save(path)
    stored = EmpiricalConstants.load(path).to_dict()
    if len(stored) != 10 or not all(0 < v < math.inf for v in stored.values()):
        bad.append(("constants", stored))
    report(6, "stability property battery", bad)


# 7 ---------------------------------------------------------------------------

def test_dilation_covariance(report):
    rng = np.random.default_rng(77)
    bad = []
    for draw in range(20):
        N = int(rng.integers(3, 8))
        p = CknParams.aligned(N, float(rng.uniform(0.05, 0.95)) * (N - 2) / 2)
        u = random_profile(draw, "mode1" if draw % 2 else "radial", N, weights=ckn_weights(p))
        base = deficit_ckn1(u, p)
        for lam in (1 / 3, 3.0):
            got = deficit_ckn1(dilate(u, lam), p)
            want = lam ** (p.mid_power - N) * base
            if abs(got - want) > 1e-9 * max(abs(want), lam ** (p.mid_power - N) * deficit_scale(u, p)):
                bad.append((draw, N, lam, got, want))
    report(7, "dilation covariance", bad)


# 8 ---------------------------------------------------------------------------

def test_bessel_certification(report):
    bad = []
    for N in DIMS:
        for name, make in BESSEL_PAIRS.items():
            res = bessel_residual(make(N), N)
            if res > 1e-12:
                bad.append((N, name, res))
    for name in BESSEL_PAIRS:
        for N in (3, 5):
            pair = preset("c5", N, pair=name)
            for seed in range(20):
                u = random_profile(seed, "mode1" if seed % 2 else "radial", N, weights=required_weights(pair))
                rep = identity_check(u, pair)
                if rep.residual > 1e-8:
                    bad.append(("c5", name, N, seed, rep.residual))
    report(8, "Bessel certification", bad)


# 9 ---------------------------------------------------------------------------

def overlap_and_norm(u, beta, N):
    f = lambda r: profile_value(u.radial, r) * math.exp(-beta * r * r / 2) * r ** (N - 1)
    g = lambda r: math.exp(-beta * r * r) * r ** (N - 1)
    parts = []
    for h in (f, g):
        parts.append(sphere(N) * (integrate.quad(h, 0, 1, epsabs=0, epsrel=1e-13, limit=200)[0]
                                  + integrate.quad(h, 1, np.inf, epsabs=0, epsrel=1e-13, limit=200)[0]))
    return parts


def zoomed_min(objective, lo, hi, points=61, levels=8):
    xs = np.linspace(lo, hi, points)
    vals = [objective(x) for x in xs]
    for _ in range(levels):
        i = int(np.argmin(vals))
        step = xs[1] - xs[0]
        xs = np.linspace(xs[i] - step, xs[i] + step, 21)
        vals = [objective(x) for x in xs]
    return min(vals)


def test_optimizer_honesty(report):
    bad = []
    for seed in range(10):
        N = 3 + seed % 3
        u = random_profile(seed, "radial", N, pmax=-2.0)
        p = heisenberg(N)
        nu = value_norm_sq(u, None, N)
        memo = {}

        def parts(t):
            if t not in memo:
                memo[t] = overlap_and_norm(u, math.exp(t), N)
            return memo[t]

        def d1_obj(t):
            ov, pn = parts(t)
            return nu - ov * ov / pn  # already minimized over the linear coefficient

        def d2_obj(t):
            ov, pn = parts(t)
            return nu - 2 * math.sqrt(nu / pn) * abs(ov) + nu

        ref1 = zoomed_min(d1_obj, math.log(1e-3), math.log(1e3))
        ref2 = zoomed_min(d2_obj, math.log(1e-3), math.log(1e3))
        d1, d2 = distance_d1(u, p)[0], distance_d2(u, p)[0]
        if not (close(d1, ref1, 1e-6) and close(d2, ref2, 1e-6)):
            bad.append((seed, d1, ref1, d2, ref2))

        v = random_profile(seed, "radial", N, pmax=-2.0)
        phi = extremal_profile(-1.0, 0.0)

        def graph_obj(c):
            w = ModeFunction.raw(0, v.f - phi * c)
            return gradient_seminorm_sq(w, None, N) + value_norm_sq(w, -2.0, N) + value_norm_sq(w, None, N)

        g, c_star = graph_distance(v, N)
        spread = abs(c_star) + 1.0
        ref = zoomed_min(graph_obj, c_star - 3 * spread, c_star + 3 * spread, levels=6)
        if not close(g, ref, 1e-8):
            bad.append((seed, "graph", g, ref))
    report(9, "optimizer honesty", bad)


# 10 --------------------------------------------------------------------------

def test_selftest_exit_codes(report):
    def code(*argv):
        return subprocess.run([sys.executable, "-m", "cknlab", *argv], capture_output=True).returncode

    outcomes = {
        "clean": (code("selftest", "--dim", "3,4,5,7"), 0),
        "perturbed": (code("selftest", "--perturb"), 1),
        "malformed": (code("selftest", "--dim"), 2),
        "unknown flag": (code("selftest", "--frobnicate"), 2),
    }
    report(10, "selftest exit codes", [(k, got, want) for k, (got, want) in outcomes.items() if got != want])
