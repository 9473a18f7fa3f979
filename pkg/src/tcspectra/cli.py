"""Command-line interface: ``tcspectra <command> CONFIG [options]``.

Tabular output is CSV preceded by ``#`` manifest lines naming the command,
inputs, parameters, tool version and the type of every column (``rational``
columns hold exact ``p/q`` strings, ``float64`` columns hold shortest
round-trip reprs). ``--json`` emits one JSON object instead.

Exit codes: 0 success, 1 failed verification, 2 invalid document or usage,
3 level not divisible by the configuration's denominators.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .configurations import Configuration, DivisibilityError
from .documents import DocumentError, load_config
from .geodesic import MINUS_INFINITY, build_ray, equilibrium, legendre, primal_grid
from .kebounds import density_ratio, fano_model, verify_fano_bound
from .potentials import GuilleminPotential
from .rational import format_rat
from .spectra import cdf_distance, dh_measure, finite_level_norms, fit_invariants, norms, spectral_measure
from .verify import _model_for, run_suite

RATIONAL = "rational"
FLOAT = "float64"
LABEL = "label"
INTEGER = "integer"


class Table:
    """Rows with typed columns, rendered as CSV or JSON with a manifest."""

    def __init__(self, command: str, inputs: Sequence[Path], parameters: dict, columns: Sequence[tuple[str, str]]):
        self.command = command
        self.inputs = list(inputs)
        self.parameters = parameters
        self.columns = list(columns)
        self.rows: list[list] = []
        self.notes: list[str] = []

    def add(self, *row) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} entries, expected {len(self.columns)}")
        self.rows.append(list(row))

    def manifest(self) -> dict:
        return {
            "command": self.command,
            "inputs": [{"path": str(p), "sha256": hashlib.sha256(p.read_bytes()).hexdigest()} for p in self.inputs],
            "parameters": self.parameters,
            "tool": f"tcspectra {__version__}",
            "columns": [{"name": n, "type": t} for n, t in self.columns],
        }

    def _cell(self, value, kind: str) -> str:
        if value is None:
            return ""
        if kind == RATIONAL:
            return format_rat(value)
        if kind == FLOAT:
            return repr(float(value) + 0.0)
        return str(value)

    def to_csv(self) -> str:
        m = self.manifest()
        out = io.StringIO()
        out.write(f"# command: {m['command']}\n")
        for item in m["inputs"]:
            out.write(f"# input: {item['path']} sha256={item['sha256']}\n")
        params = " ".join(f"{k}={v}" for k, v in m["parameters"].items())
        out.write(f"# parameters: {params}\n")
        out.write(f"# tool: {m['tool']}\n")
        out.write("# columns: " + ",".join(f"{n}:{t}" for n, t in self.columns) + "\n")
        for note in self.notes:
            out.write(f"# note: {note}\n")
        writer = csv.writer(out, lineterminator="\n")
        for row in self.rows:
            writer.writerow([self._cell(v, t) for v, (_, t) in zip(row, self.columns)])
        return out.getvalue()

    def to_json(self) -> str:
        def cell(v, kind):
            if v is None:
                return None
            if kind == RATIONAL:
                return format_rat(v)
            if kind == FLOAT:
                f = float(v)
                return f if math.isfinite(f) else repr(f)
            if kind == INTEGER:
                return int(v)
            return str(v)

        doc = {
            "manifest": self.manifest(),
            "notes": self.notes,
            "rows": [{n: cell(v, t) for v, (n, t) in zip(row, self.columns)} for row in self.rows],
        }
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# argument helpers


def _p_list(text: str) -> list:
    out = []
    for item in text.split(","):
        item = item.strip()
        if item == "inf":
            out.append("inf")
        elif item.isdigit() and int(item) >= 1:
            out.append(int(item))
        else:
            raise argparse.ArgumentTypeError(f"p must be a positive integer or 'inf', got {item!r}")
    return out


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(s) for s in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("levels must be positive")
    return vals


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational number, got {text!r}") from None


def _axes_columns(dim: int, prefix: str) -> list[tuple[str, str]]:
    return [(f"{prefix}{i + 1}" if dim > 1 else prefix, FLOAT) for i in range(dim)]


def _reference(cfg: Configuration, nodes: int):
    toric = cfg.as_toric()
    return toric, primal_grid(GuilleminPotential(toric.polytope), nodes)


# ---------------------------------------------------------------------------
# commands


def cmd_invariants(args, cfg: Configuration) -> Table:
    inv = fit_invariants(cfg)
    t = Table("invariants", [args.config], {"period": inv.period}, [("quantity", LABEL), ("value", RATIONAL)])
    for key, value in inv.as_dict().items():
        t.add(key, value)
    return t


def cmd_spectral(args, cfg: Configuration) -> Table:
    mu = spectral_measure(cfg, args.level)
    t = Table("spectral", [args.config], {"level": args.level}, [("position", RATIONAL), ("mass", RATIONAL)])
    for pos, mass in mu.atoms:
        t.add(pos, mass)
    return t


def cmd_dh(args, cfg: Configuration) -> Table:
    dh = dh_measure(cfg)
    n = dh.dim
    cols = [("part", LABEL), ("lo", RATIONAL), ("hi", RATIONAL)] + [(f"c{i}", RATIONAL) for i in range(n)]
    t = Table("dh", [args.config], {}, cols)
    t.notes.append("density rows give -dV/dlam = sum c_i lam^i on (lo, hi); atom rows put mass c0 at lo = hi")
    for a, b, coeffs in dh.density_pieces():
        padded = list(coeffs) + [Fraction(0)] * (n - len(coeffs))
        t.add("density", a, b, *padded[:n])
    for pos, mass in dh.atoms:
        t.add("atom", pos, pos, mass, *[Fraction(0)] * (n - 1))
    return t


def cmd_norms(args, cfg: Configuration) -> Table:
    cols = [("p", LABEL), ("Q_p", RATIONAL), ("N_p", RATIONAL), ("T_p_pow", RATIONAL), ("T_p", FLOAT)]
    level = args.level
    t = Table("norms", [args.config], {"p": ",".join(map(str, args.p)), "level": level or "limit"}, cols)
    t.notes.append("T_p_pow is ||T||_p^p for finite p and ||T||_inf for p = inf; Q_p and N_p are empty for p = inf")
    for p in args.p:
        ns = norms(cfg, p) if level is None else finite_level_norms(cfg, p, level)
        t.add(str(p), ns.Qp, ns.Np, ns.norm_pow, ns.norm)
    return t


def cmd_converge(args, cfg: Configuration) -> Table:
    dh = dh_measure(cfg)
    cols = [("k", INTEGER), ("kolmogorov", RATIONAL), ("k_times_kolmogorov", RATIONAL), ("l1", FLOAT)]
    t = Table("converge", [args.config], {"levels": ",".join(map(str, args.levels))}, cols)
    for k in args.levels:
        d = cdf_distance(spectral_measure(cfg, k), dh)
        t.add(k, d.kolmogorov, d.kolmogorov * k, d.l1)
    return t


def cmd_geodesic(args, cfg: Configuration) -> Table:
    toric, u0 = _reference(cfg, args.nodes)
    ray = build_ray(u0, toric)
    n = toric.dim
    cols = [("t", FLOAT)] + _axes_columns(n, "y") + [("phi", FLOAT)]
    t = Table("geodesic", [args.config], {"tmax": args.tmax, "nodes": args.nodes, "steps": args.steps}, cols)
    t.notes.append("reference metric: Guillemin potential of the configuration polytope")
    for s in np.linspace(0.0, args.tmax, args.steps):
        phi = ray.at(float(s))
        for y, v in zip(phi.points(), phi.values.ravel()):
            t.add(float(s), *y, v)
    return t


def cmd_equilibrium(args, cfg: Configuration) -> Table:
    toric, u0 = _reference(cfg, args.nodes)
    n = toric.dim
    cols = _axes_columns(n, "y") + [("psi", FLOAT)]
    t = Table("equilibrium", [args.config], {"lambda": format_rat(args.lam), "nodes": args.nodes}, cols)
    psi = equilibrium(u0, toric, args.lam, legendre(u0).axes)
    if psi is MINUS_INFINITY:
        t.notes.append("psi is identically -inf: lambda exceeds max g")
        return t
    for y, v in zip(psi.points(), psi.values.ravel()):
        t.add(*y, v)
    return t


def cmd_ke_bound(args, cfg: Configuration) -> Table:
    names = ["P1", "P2", "blowup"] if args.model == "auto" else [args.model]
    models = [fano_model(name, args.perturbations, args.seed) for name in names]
    model = _model_for(cfg, models)
    if model is None:
        raise DocumentError("/polytope", f"the configuration polytope is not a rescaled copy of the {'/'.join(names)} polytope")
    inv = fit_invariants(cfg)
    cols = [("model", LABEL), ("metric", INTEGER), ("p", LABEL), ("lhs", FLOAT), ("rhs", FLOAT), ("F1", RATIONAL), ("norm_T", FLOAT), ("holds", LABEL)]
    params = {"model": model.name, "p": ",".join(map(str, args.p)), "perturbations": args.perturbations, "seed": args.seed}
    t = Table("ke-bound", [args.config], params, cols)
    for i in range(len(model.metrics)):
        ratio = density_ratio(model, i)
        for p in args.p:
            rep = verify_fano_bound(model, cfg, p, i, invariants=inv, ratio=ratio)
            if rep.diagnosis:
                t.notes.append(f"metric {i} p={p}: {rep.diagnosis}")
            t.add(model.name, i, str(p), rep.lhs, rep.rhs, rep.F1, rep.norm_T, "yes" if rep.holds else "no")
    return t


COMMANDS = {
    "invariants": cmd_invariants,
    "spectral": cmd_spectral,
    "dh": cmd_dh,
    "norms": cmd_norms,
    "converge": cmd_converge,
    "geodesic": cmd_geodesic,
    "equilibrium": cmd_equilibrium,
    "ke-bound": cmd_ke_bound,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tcspectra", description="Exact spectra and invariants of toric test configurations.")
    parser.add_argument("--version", action="version", version=f"tcspectra {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.add_argument("config", type=Path, help="configuration document (JSON)")
        p.add_argument("--json", action="store_true", help="emit one JSON object instead of CSV")
        p.add_argument("-o", "--output", type=Path, help="write to a file instead of stdout")
        return p

    add("invariants", "a0, a1, b0, b1, F0, F1 as exact rationals")
    add("spectral", "level-k spectral measure").add_argument("--level", type=int, required=True)
    add("dh", "exact Duistermaat-Heckman measure")
    p = add("norms", "exact Q_p, N_p and ||T||_p")
    p.add_argument("--p", type=_p_list, default=[1, 2, "inf"])
    p.add_argument("--level", type=int, default=None, help="finite-level sums instead of the limit")
    add("converge", "distance between spectral and DH measures").add_argument("--levels", type=_int_list, default=[8, 16, 32, 64, 128, 256])
    p = add("geodesic", "discrete geodesic ray on a grid")
    p.add_argument("--tmax", type=float, default=1.0)
    p.add_argument("--nodes", type=int, default=201)
    p.add_argument("--steps", type=int, default=5)
    p = add("equilibrium", "equilibrium potential psi_lambda on a grid")
    p.add_argument("--lambda", dest="lam", type=_rational, required=True)
    p.add_argument("--nodes", type=int, default=201)
    p = add("ke-bound", "distance-to-Kahler-Einstein bound on a Fano model")
    p.add_argument("--model", choices=["auto", "P1", "P2", "blowup"], default="auto")
    p.add_argument("--p", type=_p_list, default=[1, 2, 4, "inf"])
    p.add_argument("--perturbations", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("verify", help="run the acceptance suites on the shipped corpus")
    p.add_argument("--suite", choices=["exact", "geodesic", "ke", "all"], default="all")
    p.add_argument("--kmax", type=int, default=256)
    p.add_argument("--nodes", type=int, default=10_000)
    p.add_argument("--json", action="store_true")
    return parser


def _write(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text, encoding="utf-8")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        results = run_suite(args.suite, kmax=args.kmax, nodes=args.nodes)
        if args.json:
            payload = [{"criterion": r.number, "title": r.title, "passed": r.passed, "detail": r.detail, "seconds": r.seconds} for r in results]
            sys.stdout.write(json.dumps({"suite": args.suite, "results": payload}, indent=2) + "\n")
        else:
            for r in results:
                sys.stdout.write(r.line() + "\n")
        return 0 if all(r.passed for r in results) else 1
    try:
        doc = load_config(args.config)
        table = COMMANDS[args.command](args, doc.config)
    except DocumentError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return 2
    except DivisibilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _write(table.to_json() if args.json else table.to_csv(), args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
