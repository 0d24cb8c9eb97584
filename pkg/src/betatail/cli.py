"""Command-line interface emitting CSV or JSON tables.

Subcommands: ``ratio-table``, ``density``, ``moment``, ``tail``.  Every output
carries a run manifest (JSON key ``manifest``; CSV ``#`` comment lines).
Exit codes: 0 success, 1 numerical failure, 2 usage or domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import shlex
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from betatail import __version__
from betatail.asymp import (density_asym, gap_prob_tail, largest_eig_tail, moment_asym,
                            soft_edge_cdf_tail, soft_edge_tail)
from betatail.core import ConvergenceError, DomainError, EnsembleSpec, Kind, density_scale
from betatail.duality import gauss_dual_rhs_scaled, laguerre_dual_moment
from betatail.exact import exact_density_log
from betatail.sampler import MCConfig, mc_moment

TABLE_S = (1.2, 1.4, 1.6, 1.8)
TABLE_N = (6, 12, 18, 24, 30)


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int | None = None
    tool_version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())


@dataclass
class Table:
    columns: list[str]
    rows: list[list]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        return float(v) if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def render(table: Table, manifest: RunManifest, fmt: str) -> str:
    if fmt == "json":
        doc = {"manifest": asdict(manifest), "columns": table.columns,
               "rows": [[_json_value(v) for v in row] for row in table.rows]}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    for key, val in asdict(manifest).items():
        if key == "parameters":
            val = json.dumps(val, sort_keys=True)
        buf.write(f"# {key}: {val}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _grid(text: str) -> list[float]:
    try:
        lo, hi, steps = text.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:steps, got {text!r}") from None
    if steps < 1:
        raise argparse.ArgumentTypeError("grid needs at least one step")
    return list(np.linspace(lo, hi, steps)) if steps > 1 else [lo]


def _points(args, name: str = "s") -> list[float]:
    pts = getattr(args, name, None)
    if args.grid is not None:
        return args.grid
    if pts is None:
        raise UsageError(f"give --{name} or --grid")
    return pts


def _spec(args) -> EnsembleSpec:
    kind = Kind.parse(args.ensemble)
    if kind is Kind.GAUSSIAN:
        return EnsembleSpec.gaussian(args.beta, args.n, args.m)
    return EnsembleSpec.laguerre(args.beta, args.n, args.a, args.m)


def cmd_ratio_table(args) -> Table:
    betas = [args.beta] if args.beta is not None else [2.0, 1.0]
    s_list = args.s or list(TABLE_S)
    n_list = args.n or list(TABLE_N)
    for beta in betas:
        if beta not in (1.0, 2.0):
            raise UsageError("ratio-table supports beta 1 or 2")
        if beta == 1.0 and any(n % 2 for n in n_list):
            raise UsageError("beta=1 exact density (Hermite closed form) requires every N to be even")
    rows = []
    for beta in betas:
        for n in n_list:
            spec = EnsembleSpec.gaussian(beta, n)
            c = density_scale(spec)
            for s in s_list:
                _, log_exact = exact_density_log(spec, np.array([c * s]))
                log_exact = float(log_exact[0]) + math.log(c)
                log_asym = density_asym(spec, s).log_total
                ratio = math.exp(log_exact - log_asym)
                inverse = 1.0 / ratio
                # the published table truncates asym/exact to three decimals
                rows.append([beta, n, s, ratio, inverse, f"{math.floor(1000.0 * inverse) / 1000.0:.3f}"])
    return Table(["beta", "n", "s", "ratio", "inverse", "table3"], rows)


def cmd_density(args) -> Table:
    spec = _spec(args)
    pts = _points(args)
    c = density_scale(spec)
    rows = []
    if args.mode == "exact":
        raw = np.array([c * s for s in pts])
        sign, log_rho = exact_density_log(spec, raw)
        for s, x, lr in zip(pts, raw, np.atleast_1d(log_rho)):
            lr = float(lr)
            rows.append([s, float(x), lr, lr + math.log(c), math.exp(lr) if math.isfinite(lr) else 0.0])
    else:
        for s in pts:
            scaled = density_asym(spec, s).log_total
            lr = scaled - math.log(c)
            rows.append([s, c * s, lr, scaled, math.exp(lr)])
    return Table(["s", "raw_x", "log_density", "log_scaled_density", "density"], rows)


def cmd_moment(args) -> Table:
    spec = _spec(args)
    rows = []
    for s in _points(args):
        se, seed, n_samples = None, None, None
        if args.route == "asym":
            log_v = moment_asym(spec, s).log_abs
        elif args.route == "dual":
            if spec.kind is Kind.GAUSSIAN:
                if spec.beta not in (2.0, 4.0):
                    raise UsageError("Gaussian dual route needs beta 2 or 4")
                if s == 0:
                    raise UsageError("Gaussian dual route needs s != 0")
                mant, scale = gauss_dual_rhs_scaled(abs(s), spec.n, spec.m_scale, int(spec.beta))
                log_v = math.log(abs(mant.real)) + scale
            else:
                if spec.beta != 2.0:
                    raise UsageError("Laguerre dual route needs beta 2")
                log_v = math.log(abs(laguerre_dual_moment(s, spec.n, spec.m_scale, spec.a)))
        else:
            if args.samples is None:
                raise UsageError("mc route needs --samples")
            est = mc_moment(spec, s, MCConfig(args.samples, args.seed))
            log_v = math.log(est.mean) if est.mean > 0 else -math.inf
            se, seed, n_samples = est.std_err, est.seed, est.n
        rows.append([args.route, s, log_v, math.exp(log_v), se, n_samples, seed])
    return Table(["route", "s", "log_value", "value", "std_err", "n_samples", "seed"], rows)


def cmd_tail(args) -> Table:
    if args.what in ("soft", "softcdf"):
        fn = soft_edge_tail if args.what == "soft" else soft_edge_cdf_tail
        xs = args.X if args.grid is None else args.grid
        if xs is None:
            raise UsageError("give --X or --grid")
        rows = []
        for x in xs:
            lv = fn(args.beta, x).log_abs
            rows.append([x, lv, math.exp(lv)])
        return Table(["X", "log_value", "value"], rows)
    spec = _spec(args)
    rows = []
    if args.what == "largest":
        c = density_scale(spec)
        for s in _points(args):
            td = largest_eig_tail(spec, s)
            rows.append([s, c * s, td.log_exponent, td.log_prefactor, td.log_constant,
                         td.log_total, math.exp(td.log_total)])
        return Table(["s", "raw_x", "log_exponent", "log_prefactor", "log_constant",
                      "log_value", "value"], rows)
    for s in _points(args):
        lv = gap_prob_tail(spec, args.k, s).log_abs
        rows.append([args.k, s, lv, math.exp(lv)])
    return Table(["k", "s", "log_value", "value"], rows)


def _add_common(p: argparse.ArgumentParser, ensemble: bool = True) -> None:
    if ensemble:
        p.add_argument("--ensemble", choices=["gauss", "laguerre"], default="gauss")
        p.add_argument("--beta", type=float, default=2.0)
        p.add_argument("--n", type=int, default=10)
        p.add_argument("--a", type=float, default=0.0)
        p.add_argument("--m", type=int, default=None, help="weight scale M (default n+1)")
    p.add_argument("--s", type=_float_list, default=None)
    p.add_argument("--grid", type=_grid, default=None, help="lo:hi:steps")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="betatail", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"betatail {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ratio-table", help="exact/asymptotic tail density ratios (Gaussian)")
    p.add_argument("--beta", type=float, default=None, help="1 or 2 (default: both)")
    p.add_argument("--n", type=_int_list, default=None)
    _add_common(p, ensemble=False)
    p.set_defaults(func=cmd_ratio_table)

    p = sub.add_parser("density", help="exact or asymptotic one-point density")
    p.add_argument("--mode", choices=["exact", "asym"], default="exact")
    _add_common(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("moment", help="beta moment of |characteristic polynomial|")
    p.add_argument("--route", choices=["mc", "dual", "asym"], default="asym")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser("tail", help="largest-eigenvalue, soft-edge and gap tails")
    p.add_argument("--what", choices=["largest", "soft", "softcdf", "gap"], default="largest")
    p.add_argument("--X", type=_float_list, default=None)
    p.add_argument("--k", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_tail)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k not in ("func", "command", "format", "out")}
    try:
        table = args.func(args)
    except (UsageError, DomainError) as exc:
        print(f"betatail: error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, ArithmeticError) as exc:
        print(f"betatail: numerical failure: {exc}", file=sys.stderr)
        return 1
    manifest = RunManifest(command=shlex.join(["betatail", *argv]), parameters=params,
                           seed=params.get("seed") if getattr(args, "route", None) == "mc" else None)
    text = render(table, manifest, args.format)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
