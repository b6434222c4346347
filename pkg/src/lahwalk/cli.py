"""Command-line front end.

Every subcommand builds a table (columns and rows) plus optional extra
fields, and the writer renders it as CSV, JSON or an aligned text table.
Exit codes: 0 success, 1 failed verification, 2 bad input or resource limit,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import subprocess
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from . import asymptotics as asy
from . import bigcomb as bc
from . import hullmodel, lahdist, sampling, walklab
from .errors import DegenerateError, DomainError, NumericalError, ResourceError

OUTPUT_DIR_ENV = "LAHWALK_OUTPUT_DIR"
# keys never echoed, so that output does not depend on them
_UNECHOED = {"threads", "output", "config", "format", "handler"}


class CliUsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliUsageError(f"{self.prog}: {message}")


@dataclass
class Result:
    columns: list
    rows: list
    extra: dict = field(default_factory=dict)
    ok: bool = True


def _cell(x):
    if isinstance(x, Fraction):
        return bc.exact_str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return x


def _exact_pair(x: Fraction):
    return [bc.exact_str(x), float(x)]


# ----------------------------------------------------------------- handlers


def cmd_exact(a) -> Result:
    what = a.what
    if what == "harmonic":
        v = bc.harmonic(a.n, a.m)
        return Result(["n", "m", "value_pq", "value_float"], [[a.n, a.m, *_exact_pair(v)]])
    fn = {
        "stirling1": bc.stirling_first,
        "stirling2": bc.stirling_second,
        "lah": bc.lah_number,
        "binom": bc.binomial,
    }[what]
    ks = [a.k] if a.k is not None else range(0, a.n + 1)
    return Result(["n", "k", "value"], [[a.n, k, str(fn(a.n, k))] for k in ks])


def cmd_dist(a) -> Result:
    n, k = a.n, a.k
    if a.what in ("pmf", "cdf"):
        table = lahdist.pmf_table(n, k)
        rows, acc = [], Fraction(0)
        for j, m in table.items():
            acc += m
            rows.append([j, *_exact_pair(m if a.what == "pmf" else acc)])
        return Result(["j", f"{a.what}_pq", f"{a.what}_float"], rows)
    if a.what == "moments":
        rows = [["mean", *_exact_pair(lahdist.expectation(n, k))],
                ["variance", *_exact_pair(lahdist.variance(n, k))]]
        for m in (2, 3):
            rows.append([f"factorial_moment_{m}", *_exact_pair(lahdist.factorial_moment(n, k, m))])
        return Result(["quantity", "value_pq", "value_float"], rows)
    if a.what == "mode":
        argmax, (lo, hi) = lahdist.mode(n, k)
        return Result(["mode", "formula_floor", "formula_ceil"], [[m, lo, hi] for m in argmax])
    if a.what == "zeros":
        zs = lahdist.poly_zeros(n, k, precision_bits=a.precision)
        zs = sorted(zs, key=lambda z: (z.real, z.imag))
        return Result(["re", "im"], [[z.real, z.imag] for z in zs])
    raise DomainError(f"unknown dist query {a.what!r}")


def cmd_sample(a) -> Result:
    vals = sampling.sample_lah_batch(a.n, a.k, a.method, a.trials, sampling.RngHandle(a.seed))
    if a.dump:
        return Result(["trial", "value"], [[i, int(v)] for i, v in enumerate(vals)])
    s = sampling.sample_summary(vals, a.n, a.k)
    return Result(list(s), [list(s.values())], {"exact_mean": bc.exact_str(lahdist.expectation(a.n, a.k))})


def _grid(lo, hi, points):
    if points < 1:
        raise DomainError("points must be >= 1")
    return [float(x) for x in np.linspace(lo, hi, points)]


def cmd_asy(a) -> Result:
    w = a.what
    if w == "psi":
        return Result(["z", "psi", "ratio_n"], [
            [z, asy.mod_poisson_psi(a.k, z).real, asy.mod_poisson_ratio(a.n, a.k, z)]
            for z in _grid(a.lo, a.hi, a.points)
        ])
    if w == "phi":
        return Result(["t", "phi", "phi_prime"], [
            [t, asy.phi_alpha(a.alpha, t), asy.phi_alpha_prime(a.alpha, t)] for t in _grid(a.lo, a.hi, a.points)
        ])
    if w == "rate":
        return Result(["beta", "rate_closed", "rate_legendre"], [
            [b, asy.rate_function(a.alpha, b), asy.rate_function(a.alpha, b, "legendre")]
            for b in _grid(a.lo, a.hi, a.points)
        ])
    if w == "cov":
        cov = asy.composition_cov(a.alpha, a.M)
        return Result(["i", "j", "cov"], [[i + 1, j + 1, float(cov[i, j])] for i in range(a.M) for j in range(a.M)])
    if w == "clt":
        mean, var = asy.central_clt_params(a.alpha)
        return Result(["alpha", "drift", "sigma2"], [[a.alpha, mean, var]],
                      {"sigma2_argmax": asy.sigma2_argmax()})
    if w == "thresholds":
        deltas = a.delta if a.delta else _grid(a.lo, a.hi, a.points)
        return Result(["delta", "rho_weak", "rho_strong"], [
            [p.delta, p.rho_weak, p.rho_strong] for p in hullmodel.threshold_curve(deltas)
        ])
    raise DomainError(f"unknown asy query {w!r}")


def cmd_faces(a) -> Result:
    if a.what == "expected":
        ks = [a.k] if a.k is not None else range(1, a.d + 1)
        rows = []
        for k in ks:
            ef = hullmodel.expected_faces(a.n, a.d, k)
            rows.append([a.n, a.d, k, *_exact_pair(ef), float(ef / bc.binomial(a.n + 1, k))])
        return Result(["n", "d", "k", "Ef_pq", "Ef_float", "ratio"], rows)
    if a.what == "conjecture":
        rep = hullmodel.check_monotonicity_conjecture(a.d_max, a.n_extra)
        rows = [[d, k, v] for (d, k), v in sorted(rep.directions.items())]
        extra = rep.summary()
        return Result(["d", "k", "ratio_direction"], rows, extra, ok=rep.ok)
    if a.what == "regime":
        r = hullmodel.constant_k_regime_report(a.d, a.k, a.npts)
        return Result(list(r), [list(r.values())])
    raise DomainError(f"unknown faces query {a.what!r}")


def cmd_simulate(a) -> Result:
    cfg = walklab.WalkConfig(a.d, a.n, a.law, a.trials, a.seed, workers=a.threads)
    rep = walklab.monte_carlo_report(cfg)
    rows = [[name, v["mean"], v["se"], v["exact_pq"], v["exact_float"], v["z"]] for name, v in rep.faces.items()]
    return Result(["face", "mean", "se", "exact_pq", "exact_float", "z"], rows,
                  {"resamples": rep.resamples, "violations": len(rep.violations)})


def cmd_verify(a) -> Result:
    from .acceptance import run_all

    echo = (lambda s: print(s, file=sys.stderr)) if a.format != "pretty" else None
    results = run_all(set(a.only) if a.only else None, echo=echo)
    rows = [[r.number, r.name, "PASS" if r.passed else "FAIL", r.detail] for r in results]
    return Result(["criterion", "name", "status", "detail"], rows, ok=all(r.passed for r in results))


# ------------------------------------------------------------------ parser


def _common(p):
    p.add_argument("--format", choices=("csv", "json", "pretty"), default="pretty")
    p.add_argument("--output", help="output file (relative paths resolve against $%s)" % OUTPUT_DIR_ENV)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="worker processes; results do not depend on it")
    p.add_argument("--precision", type=int, default=53, help="working precision in bits")
    p.add_argument("--config", help="key=value defaults file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lahwalk", description="Lah distributions and random-walk hulls.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("exact", help="exact combinatorial numbers")
    p.add_argument("what", choices=("stirling1", "stirling2", "lah", "binom", "harmonic"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int, default=1, help="harmonic order")
    p.set_defaults(handler=cmd_exact)

    p = sub.add_parser("dist", help="exact Lah distribution queries")
    p.add_argument("what", choices=("pmf", "cdf", "moments", "mode", "zeros"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(handler=cmd_dist)

    p = sub.add_parser("sample", help="Monte Carlo samples of Lah(n, k)")
    p.add_argument("--method", choices=sampling.METHODS, default="records")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--dump", action="store_true", help="emit every sample instead of a summary")
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("asy", help="asymptotic curves and thresholds")
    p.add_argument("what", choices=("psi", "phi", "rate", "cov", "clt", "thresholds"))
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--M", type=int, default=10)
    p.add_argument("--delta", type=float, action="append")
    p.add_argument("--lo", type=float, default=0.05)
    p.add_argument("--hi", type=float, default=0.95)
    p.add_argument("--points", type=int, default=19)
    p.set_defaults(handler=cmd_asy)

    p = sub.add_parser("faces", help="expected hull face numbers")
    p.add_argument("what", choices=("expected", "conjecture", "regime"))
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--k", type=int)
    p.add_argument("--npts", type=float, default=1000, help="number of points (regime report)")
    p.add_argument("--d-max", type=int, default=20)
    p.add_argument("--n-extra", type=int, default=60)
    p.set_defaults(handler=cmd_faces)

    p = sub.add_parser("simulate", help="random-walk hull Monte Carlo")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--law", choices=walklab.LAWS, default="gaussian")
    p.add_argument("--trials", type=int, default=2000)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--only", type=int, action="append", help="criterion number (repeatable)")
    p.set_defaults(handler=cmd_verify)

    for sp in sub.choices.values():
        _common(sp)
    return parser


def _read_config(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = _read_config(known.config)
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((t for t in argv if t in sub.choices), None)
    if command is None:
        return
    sp = sub.choices[command]
    dests = {a.dest: a for a in sp._actions}
    for key, value in values.items():
        if key not in dests or key in ("config", "help"):
            raise DomainError(f"unknown config key {key!r} for '{command}'")
        action = dests[key]
        if isinstance(action, argparse._StoreTrueAction):
            sp.set_defaults(**{key: value.lower() in ("1", "true", "yes")})
        elif isinstance(action, argparse._AppendAction):
            sp.set_defaults(**{key: [action.type(v) for v in value.split(",")]})
        else:
            sp.set_defaults(**{key: value})
        action.required = False


# ------------------------------------------------------------------ output


def _git_hash() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"], cwd=Path(__file__).resolve().parent,
            capture_output=True, text=True, timeout=5,
        )
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def _config_echo(a) -> dict:
    return {k: v for k, v in sorted(vars(a).items()) if k not in _UNECHOED}


def render(result: Result, a) -> str:
    config = _config_echo(a)
    if a.format == "json":
        doc = {
            "config": config,
            "results": {
                "columns": result.columns,
                "rows": [dict(zip(result.columns, map(_cell, r))) for r in result.rows],
                **{k: _cell(v) for k, v in result.extra.items()},
            },
            "provenance": {"git": _git_hash(), "seed": a.seed, "version": __version__},
        }
        return json.dumps(doc, indent=2) + "\n"
    if a.format == "csv":
        buf = io.StringIO()
        for k, v in config.items():
            buf.write(f"# {k}={v}\n")
        for k, v in result.extra.items():
            buf.write(f"# {k}={json.dumps(_cell(v))}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(result.columns)
        for r in result.rows:
            w.writerow([_cell(x) for x in r])
        return buf.getvalue()
    cells = [[str(c) for c in result.columns]] + [[str(_cell(x)) for x in r] for r in result.rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(result.columns))]
    lines = ["  ".join(c.ljust(wd) for c, wd in zip(row, widths)).rstrip() for row in cells]
    lines += [f"{k}: {_cell(v)}" for k, v in result.extra.items()]
    return "\n".join(lines) + "\n"


def _destination(path):
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        a = parser.parse_args(argv)
    except CliUsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except (DomainError, OSError) as exc:
        print(f"lahwalk: {exc}", file=sys.stderr)
        return 2
    if a.threads < 1:
        print("lahwalk: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        result = a.handler(a)
        text = render(result, a)
    except (DomainError, ResourceError) as exc:
        print(f"lahwalk: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, DegenerateError, ArithmeticError) as exc:
        print(f"lahwalk: numerical failure: {exc}", file=sys.stderr)
        return 3
    dest = _destination(a.output)
    if dest is None:
        sys.stdout.write(text)
    else:
        dest.write_text(text, encoding="utf-8")
    return 0 if result.ok else 1


def main() -> None:
    sys.exit(run())
