"""ckn-lab: command-line front end.

Exit codes: 0 all checks passed, 1 a mathematical check failed, 2 usage or
validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import identities as ident
from . import poincare as pc
from . import stability as st
from .closedform import CknParams
from .errors import CknLabError, InvalidParams, NumericalError, ValidationError
from .profiles import ModeFunction, gaussian, profile_from_json, random_profile, validate_mode_function
from .reduction import extremal_profile
from .selftest import DEFAULT_DIMS, run_selftest

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
SWEEP_PARAMS = {"a": "a", "b": "b", "beta": "beta", "lambda": "lam", "N": "dim", "dim": "dim"}
MAX_CELLS = 10_000


class UsageError(InvalidParams):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.floating):
        return _jsonable(float(x))
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), ensure_ascii=False)


def _fmt(x) -> str:
    if isinstance(x, float):
        if not math.isfinite(x):
            return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return f"{x:.17g}"
    return str(x)


def parse_grid(text: str) -> tuple[str, list[float]]:
    """``name=lo:hi:n`` (linear), ``name=log:lo:hi:n`` (powers of ten) or ``name=v1,v2,...``."""
    if "=" not in text:
        raise UsageError(f"grid {text!r} must look like name=lo:hi:n")
    name, spec = text.split("=", 1)
    name = name.strip()
    if name not in SWEEP_PARAMS:
        raise UsageError(f"cannot sweep {name!r}; choose from {', '.join(sorted(SWEEP_PARAMS))}")
    try:
        if spec.startswith("log:"):
            lo, hi, n = spec[4:].split(":")
            values = np.logspace(float(lo), float(hi), int(n)).tolist()
        elif ":" in spec:
            lo, hi, n = spec.split(":")
            values = np.linspace(float(lo), float(hi), int(n)).tolist()
        else:
            values = [float(v) for v in spec.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"malformed grid {text!r}") from None
    if not values:
        raise UsageError(f"grid {text!r} is empty")
    return name, values


def _dims(args) -> list[int]:
    out = []
    for chunk in args.dim or []:
        for piece in str(chunk).split(","):
            if piece.strip():
                try:
                    out.append(int(piece))
                except ValueError:
                    raise UsageError(f"--dim expects integers, got {piece!r}") from None
    return out


def _dim(args) -> int:
    dims = _dims(args)
    return dims[-1] if dims else 3


def _ckn(args, N) -> CknParams | None:
    if args.a is None and args.b is None:
        return None
    if args.a is None or args.b is None:
        raise InvalidParams("give both --a and --b")
    return CknParams(N, args.a, args.b)


def _profile(args, N, weights=()) -> ModeFunction:
    if args.profile is not None:
        u = profile_from_json(args.profile)
        if weights:
            report = validate_mode_function(u, weights, N)
            if not report.passed:
                bad = report.failures()[0]
                raise InvalidParams(f"profile is not integrable: {bad.functional} with weight |x|^-{bad.weight:g}")
        return u
    if args.seed is not None:
        return random_profile(args.seed, args.profile_class, N, weights=weights or None)
    beta = args.beta if args.beta is not None else 1.0
    if args.a is not None and args.b is not None and args.b + 1 - args.a > 0:
        return ModeFunction(0, extremal_profile(args.a, args.b, beta))
    return gaussian(beta)


def _ckn_weights(p: CknParams) -> list:
    return [0.0, 2 * p.a, p.mid_power, ("gradient", 2 * p.b), ("radial", 2 * p.b),
            2 * p.b * p.N / (p.N - 2)]


# commands --------------------------------------------------------------------

def cmd_identity(args) -> tuple[list[dict], bool]:
    N = _dim(args)
    if not args.preset:
        raise InvalidParams("identity needs --preset")
    pair = ident.preset(args.preset, N, lam=args.lam, a=args.a, b=args.b, pair=args.bessel)
    u = _profile(args, N, ident.required_weights(pair))
    forms = ("gradient", "radial") if args.form == "both" else (args.form,)
    rows, ok = [], True
    for form in forms:
        if args.alpha is not None:
            rep = ident.general_identity_check(u, pair, args.alpha, form, N, args.tol)
        else:
            rep = ident.identity_check(u, pair, form, args.tol)
        good = rep.passed and rep.remainder_ok
        ok &= good
        rows.append({"command": "identity", "preset": pair.name, "N": N, "form": form,
                     **rep.to_dict(), "pass": good})
    return rows, ok


def cmd_deficit(args) -> tuple[list[dict], bool]:
    N = _dim(args)
    p = _ckn(args, N) or st.heisenberg(N)
    u = _profile(args, N, _ckn_weights(p))
    row = {"command": "deficit", "N": N, "a": p.a, "b": p.b,
           "delta1": st.deficit_ckn1(u, p), "delta2": st.deficit_ckn2(u, p)}
    if p.gap > 0:
        row["scale_noninv"] = st.scale_noninv_deficit(u, p)
    scale = st.deficit_scale(u, p)
    row["pass"] = row["delta1"] >= -1e-9 * scale
    return [row], row["pass"]


def cmd_distance(args) -> tuple[list[dict], bool]:
    N = _dim(args)
    p = _ckn(args, N) or st.heisenberg(N)
    u = _profile(args, N, _ckn_weights(p))
    d1, w1 = st.distance_d1(u, p)
    d2, w2 = st.distance_d2(u, p)
    row = {"command": "distance", "N": N, "a": p.a, "b": p.b,
           "d1": d1, "d1_witness": {"c": w1.c, "beta": w1.beta},
           "d2": d2, "d2_witness": {"c": w2.c, "beta": w2.beta}}
    if (p.a, p.b) == (-1.0, 0.0):
        g, c = st.graph_distance(u, N)
    else:
        g, c = st.ckn_graph_distance(u, p)
    row.update(graph=g, graph_c=c)
    return [row], d1 <= d2 * (1 + 1e-12) + 1e-300


def cmd_stability(args) -> tuple[list[dict], bool]:
    N = _dim(args)
    if not args.theorem:
        raise InvalidParams("stability needs --theorem")
    a, b = args.a, args.b
    if args.align and b is not None:
        a = CknParams.aligned(N, b).a
    every = args.theorem == "all"
    if every:
        theorems = st.THEOREMS if a is not None else tuple(t for t in st.EXPLICIT if t != "D2AB")
    else:
        theorems = (args.theorem,)
    p = CknParams(N, a, b if b is not None else 0.0) if a is not None else st.heisenberg(N)
    u = _profile(args, N, _ckn_weights(p))
    rows, ok = [], True
    for th in theorems:
        try:
            rep = st.check_stability(th, u, N, a, b, args.constant)
        except InvalidParams as exc:
            if not every:
                raise
            rows.append({"command": "stability", "N": N, "a": a, "b": b, "theorem": th, "skipped": str(exc)})
            continue
        ok &= rep.passed
        rows.append({"command": "stability", "N": N, "a": a, "b": b, **rep.to_dict()})
    return rows, ok


def _measure(args, N) -> pc.RadialMeasure:
    if args.lam is not None:
        return pc.gaussian_measure(args.lam, N)
    delta = args.delta if args.delta is not None else 0.5
    alpha = args.alpha if args.alpha is not None else 2.0
    return pc.RadialMeasure(delta, alpha, args.mu or 0.0, N)


def cmd_poincare(args) -> tuple[list[dict], bool]:
    N = _dim(args)
    m = _measure(args, N)
    row = {"command": "poincare", "N": N, "delta": m.delta, "alpha": m.alpha, "mu": m.mu,
           "log_concave": m.log_concave, "hypothesis_holds": m.hypothesis_holds}
    ok = True
    if m.mu == 0:
        row["gap"] = pc.gap_estimate(m, None, args.basis)
    else:
        row["gap"] = pc.weighted_gap_estimate(m, args.basis)
        row["kelvin_bound"] = pc.kelvin_gap_bound(m, args.basis)
    if args.profile is not None or args.seed is not None:
        v = _profile(args, N, [0.0, m.mu, m.variance_power])
        res = pc.poincare_check(v, m)
        row.update(res.to_dict())
        ok = res.ratio >= row["gap"] * (1 - 1e-6)
    row["pass"] = ok
    return [row], ok


def cmd_bessel(args) -> tuple[list[dict], bool]:
    N = _dim(args)
    names = list(ident.BESSEL_PAIRS) if args.bessel is None else [args.bessel]
    rows, ok = [], True
    for name in names:
        if name not in ident.BESSEL_PAIRS:
            raise InvalidParams(f"unknown Bessel pair {name!r}; known: {', '.join(ident.BESSEL_PAIRS)}")
        res = ident.bessel_residual(ident.BESSEL_PAIRS[name](N), N)
        good = res <= 1e-12
        ok &= good
        rows.append({"command": "bessel", "pair": name, "N": N, "residual": res, "pass": good})
    return rows, ok


def cmd_selftest(args) -> tuple[list[dict], bool]:
    checks = run_selftest(_dims(args) or DEFAULT_DIMS, args.perturb)
    rows = [c.to_dict() for c in checks]
    return rows, all(c.passed for c in checks)


# sweep -----------------------------------------------------------------------

def _sweep_cell(job):
    base, assignment = job
    ns = argparse.Namespace(**base)
    for name, value in assignment.items():
        setattr(ns, SWEEP_PARAMS[name], int(value) if SWEEP_PARAMS[name] == "dim" else value)
    if isinstance(ns.dim, int):
        ns.dim = [ns.dim]
    row = dict(assignment)
    try:
        if ns.theorem:
            if ns.align and ns.b is not None:
                ns.a = CknParams.aligned(_dim(ns), ns.b).a
                row["a"] = ns.a
            out, _ = cmd_stability(ns)
            r = out[0]
            row.update(deficit=r["deficit"], bound=r["bound"], ratio=r["ratio"], status="ok" if r["pass"] else "fail")
        else:
            out, _ = cmd_poincare(ns)
            row.update(deficit=math.nan, bound=math.nan, ratio=out[0]["gap"], status="ok")
    except (CknLabError, ArithmeticError, ValueError) as exc:
        row.update(deficit=math.nan, bound=math.nan, ratio=math.nan, status=f"error: {exc}")
    return row


def cmd_sweep(args) -> tuple[list[dict], bool]:
    if not args.grid:
        raise InvalidParams("sweep needs at least one --grid")
    if len(args.grid) > 2:
        raise InvalidParams("sweep takes one or two --grid axes")
    axes = [parse_grid(g) for g in args.grid]
    cells = 1
    for _, values in axes:
        cells *= len(values)
    if cells > MAX_CELLS:
        raise InvalidParams(f"sweep grid has {cells} cells; the limit is {MAX_CELLS}")
    base = {k: v for k, v in vars(args).items() if k != "func"}
    jobs = [(base, dict(zip([n for n, _ in axes], combo))) for combo in itertools.product(*[v for _, v in axes])]
    if args.jobs and args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_sweep_cell, jobs))
    else:
        rows = [_sweep_cell(j) for j in jobs]
    ok = all(r["status"] in ("ok",) for r in rows)
    return rows, ok


def _sweep_csv(rows: list[dict]) -> str:
    tail = ["deficit", "bound", "ratio", "status"]
    fields = []
    for r in rows:
        fields += [k for k in r if k not in fields and k not in tail]
    fields += tail
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for r in rows:
        writer.writerow([_fmt(r.get(k, "")) for k in fields])
    ratios = [r["ratio"] for r in rows if not math.isnan(r["ratio"])]
    writer.writerow(["min_ratio", _fmt(min(ratios)) if ratios else "nan"] + [""] * (len(fields) - 2))
    return buf.getvalue()


def _rows_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    fields = []
    for r in rows:
        for k in r:
            if k not in fields:
                fields.append(k)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for r in rows:
        writer.writerow([_fmt(r[k]) if k in r else "" for k in fields])
    return buf.getvalue()


# parser ----------------------------------------------------------------------

COMMANDS = {
    "identity": cmd_identity,
    "deficit": cmd_deficit,
    "distance": cmd_distance,
    "stability": cmd_stability,
    "poincare": cmd_poincare,
    "bessel": cmd_bessel,
    "sweep": cmd_sweep,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--dim", action="append", help="dimension N (selftest: repeat or comma-separate)")
    common.add_argument("--a", type=float)
    common.add_argument("--b", type=float)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--mu", type=float)
    common.add_argument("--delta", type=float)
    common.add_argument("--preset")
    common.add_argument("--bessel", help="Bessel pair for c5/c8: hardy or gaussian")
    common.add_argument("--theorem")
    common.add_argument("--constant", type=float, help="constant for D2AB and the empirical theorems")
    common.add_argument("--form", choices=("gradient", "radial", "both"), default="gradient")
    common.add_argument("--profile", help="inline JSON, @file, or gaussian/witness")
    common.add_argument("--profile-class", choices=("radial", "mode1"), default="radial")
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float, default=ident.DEFAULT_TOL)
    common.add_argument("--grid", action="append")
    common.add_argument("--align", action="store_true", help="set a from b by scale alignment")
    common.add_argument("--basis", type=int, default=8, help="Ritz basis size")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--out")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--perturb", action="store_true", help=argparse.SUPPRESS)

    parser = _Parser(prog="ckn-lab", description="Weighted Hardy / Heisenberg / CKN numerical lab")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, func in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common])
        sp.set_defaults(func=func)
    return parser


def run(argv=None) -> int:
    stdout = sys.stdout
    try:
        args = build_parser().parse_args(argv)
        rows, ok = args.func(args)
        fmt = args.format or ("csv" if args.command == "sweep" else "json")
        if fmt == "csv":
            text = _sweep_csv(rows) if args.command == "sweep" else _rows_csv(rows)
        else:
            text = "".join(dumps(r) + "\n" for r in rows)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            stdout.write(text)
        return EXIT_OK if ok else EXIT_FAIL
    except ValidationError as exc:
        print(f"ckn-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"ckn-lab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"ckn-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


def main(argv=None) -> int:
    return run(argv)
