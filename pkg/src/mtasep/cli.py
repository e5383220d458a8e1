"""Command-line interface: catalog access, classification sweeps, kernels and validation.

Exit status: 0 success, 1 result differs from the expected classification (or
a validation z-score exceeds its threshold), 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, algebra, catalog, integrability, serialize
from .algebra import SingularMatrix
from .bethe.kernel import PoleOnContour, QuadratureNotConverged, conservation, kernel
from .scattering import Rule, SingularResolvent
from .simulator import Configuration, NonStochasticMatrix, simulate
from .validate import DEFAULT_THRESHOLD, cross_validate

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    matrix: str | None = None
    N: int | None = None
    rule: str | None = None
    spectral_seed: int | None = None
    samples: int | None = None
    quadrature: dict = field(default_factory=dict)
    simulation: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "json"


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.replace(" ", "").split(",") if v != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _species(text: str) -> tuple[int, ...]:
    t = text.replace(",", "").replace(" ", "")
    if not t.isdigit():
        raise argparse.ArgumentTypeError(f"expected a species word like 21, got {text!r}")
    return tuple(int(c) for c in t)


def _sig(x, digits: int = 6) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{digits}g}"
    return str(x)


def _table(header: list[str], rows: list[list]) -> str:
    cells = [header] + [[_sig(v) for v in r] for r in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([str(v) if isinstance(v, Fraction) else v for v in r])
    return buf.getvalue()


def _envelope(cfg: RunConfig, result) -> dict:
    return {"tool": "mtasep", "version": __version__, "config": asdict(cfg), "result": result}


def _emit(cfg: RunConfig, result: dict, header: list[str], rows: list[list], out) -> None:
    if cfg.format == "json":
        text = serialize.dumps(_envelope(cfg, result))
    elif cfg.format == "csv":
        text = _csv(header, rows)
    else:
        text = _table(header, rows)
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        out.write(text)


def _matrix_rows(m) -> tuple[list[str], list[list]]:
    N = 2 if isinstance(m, catalog.TwoSpeciesMatrix) else m.N
    words = [algebra.word_label(w) for w in algebra.all_words(2, N)]
    rows = [[words[r]] + list(m.entries[r]) for r in range(len(words))]
    return ["row"] + words, rows


# -- catalog ---------------------------------------------------------------

def cmd_catalog(args, out) -> int:
    cfg = RunConfig("catalog", matrix=getattr(args, "label", None), N=getattr(args, "N", None),
                    output=getattr(args, "output", None), format=args.format,
                    extra={"action": args.action})
    if args.action == "list":
        names = catalog.labels() + ["mtasep"]
        constructions = ["bbar<l>", "c<l>", "mix(i,j,a)", "param(l,l')", "asym(l)"]
        rows = [[n, "catalog"] for n in names] + [[c, "construction"] for c in constructions]
        result = {"labels": names, "constructions": constructions, "count": len(names) - 1}
        _emit(cfg, result, ["label", "kind"], rows, out)
        return EXIT_OK
    if args.action == "show":
        m = catalog.get(args.label) if args.N == 2 and _is_plain(args.label) else catalog.resolve(args.label, args.N)
        header, rows = _matrix_rows(m)
        _emit(cfg, serialize.matrix_to_dict(m), header, rows, out)
        return EXIT_OK
    if args.action == "export":
        matrices = [catalog.get(k) for k in catalog.labels()] + [catalog.get("mtasep")]
        serialize.export_matrices(matrices, args.path)
        out.write(f"wrote {len(matrices)} matrices to {args.path}\n")
        return EXIT_OK
    if args.action == "import":
        ms = serialize.import_matrices(args.path)
        rows = [[serialize.matrix_to_dict(m)["label"], serialize.matrix_to_dict(m)["N"]] for m in ms]
        _emit(cfg, {"imported": [serialize.matrix_to_dict(m) for m in ms]}, ["label", "N"], rows, out)
        return EXIT_OK
    raise UsageError(f"unknown catalog action {args.action}")


def _is_plain(label: str) -> bool:
    try:
        catalog.get(label)
        return True
    except catalog.UnknownLabel:
        return False


# -- classify --------------------------------------------------------------

def cmd_classify(args, out) -> int:
    rule = Rule.parse(args.rule)
    cfg = RunConfig("classify", N=3, rule=rule.value, spectral_seed=args.seed, samples=args.samples,
                    output=args.output, format=args.format, extra={"sweep": args.sweep})
    kw = dict(rule=rule, samples=args.samples, seed=args.seed, workers=args.workers)
    if args.sweep == "param":
        verdicts = integrability.classify_param_family(**kw)
        rows = [[v.subject, v.passes, v.passes_a, v.passes_b, v.passes_c] for v in verdicts]
        ok = all(v.passes for v in verdicts)
        result = {"kind": "param", "rule": rule.value, "all_pass": ok, "verdicts": [v.to_dict() for v in verdicts]}
        _emit(cfg, result, ["subject", "passes", "a", "b", "c"], rows, out)
        return EXIT_OK if ok else EXIT_MISMATCH
    sweep = {"natural": integrability.classify_natural_extensions,
             "convex": integrability.classify_convex_mixtures,
             "asymmetric": integrability.classify_asymmetric_extensions}[args.sweep]
    res = sweep(**kw)
    rows = []
    for k in sorted(set(res.verdicts) | set(res.excluded)):
        key = ",".join(map(str, k)) if isinstance(k, tuple) else str(k)
        vs = res.verdicts.get(k, [])
        wit = next((w for v in vs for w in v.witnesses), None)
        reason = res.excluded.get(k, "")
        if wit:
            reason = f"relation ({wit.relation}) violated by {wit.to_dict()['violation']}"
        rows.append([key, k in res.found, k in res.expected, reason])
    _emit(cfg, res.to_dict(), ["subject", "passes", "expected", "reason"], rows, out)
    return EXIT_OK if res.matches else EXIT_MISMATCH


# -- kernel ----------------------------------------------------------------

def cmd_kernel(args, out) -> int:
    rule = Rule.parse(args.rule)
    B = catalog.resolve(args.matrix, args.N)
    Y, X = args.Y, args.X or args.Y
    if len(X) != len(Y):
        raise UsageError("X and Y must have the same length")
    cfg = RunConfig("kernel", matrix=args.matrix, N=args.N, rule=rule.value,
                    quadrature={"r": args.r, "M": args.M, "tol": args.tol},
                    extra={"X": list(X), "Y": list(Y), "t": args.t, "species_in": list(args.species_in or ()),
                           "conserve": args.conserve},
                    output=args.output, format=args.format)
    K = kernel(B, rule, Y, X, args.t, r=args.r, M=args.M, tol=args.tol, label=args.matrix)
    result = K.to_dict()
    words = algebra.all_words(len(Y), args.N)
    cols = range(len(words))
    if args.species_in:
        if len(args.species_in) != len(Y):
            raise UsageError("--species-in must have one species per particle")
        cols = [algebra.word_rank(args.species_in, args.N)]
        result["column"] = {"species_in": algebra.word_label(args.species_in),
                            "values": [float(K.matrix[r, cols[0]]) for r in range(len(words))]}
    if args.conserve:
        sums = conservation(B, rule, Y, args.t, r=args.r)
        result["conservation"] = {"column_totals": [float(v) for v in sums],
                                  "max_deviation": float(np.max(np.abs(sums - 1)))}
    header = ["row"]
    for c in cols:
        lab = algebra.word_label(words[c])
        header += [f"{lab}_re", f"{lab}_im"]
    rows = []
    for r, w in enumerate(words):
        line = [algebra.word_label(w)]
        for c in cols:
            line += [float(K.values[r, c].real), float(K.values[r, c].imag)]
        rows.append(line)
    if args.format == "table":
        header = ["row"] + [algebra.word_label(words[c]) for c in cols]
        rows = [[row[0]] + row[1::2] for row in rows]
    _emit(cfg, result, header, rows, out)
    return EXIT_OK


# -- simulate / validate ---------------------------------------------------

def _initial(args) -> Configuration:
    species = args.species_in or tuple(range(len(args.Y), 0, -1))
    if any(not 1 <= s <= args.N for s in species):
        raise UsageError(f"species must lie in 1..{args.N}")
    try:
        return Configuration(args.Y, species)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_simulate(args, out) -> int:
    rule = Rule.parse(args.rule)
    B = catalog.resolve(args.matrix, args.N)
    init = _initial(args)
    cfg = RunConfig("simulate", matrix=args.matrix, N=args.N, rule=rule.value,
                    simulation={"t": args.t, "trials": args.trials, "seed": args.seed},
                    extra={"initial": init.key()}, output=args.output, format=args.format)
    res = simulate(init, B, rule, args.t, args.trials, args.seed, args.workers)
    rows = [[k, v, v / res.trials] for k, v in res.histogram.items()]
    _emit(cfg, res.to_dict(), ["state", "count", "frequency"], rows, out)
    return EXIT_OK


def cmd_validate(args, out) -> int:
    rule = Rule.parse(args.rule)
    B = catalog.resolve(args.matrix, args.N)
    init = _initial(args)
    cfg = RunConfig("validate", matrix=args.matrix, N=args.N, rule=rule.value,
                    quadrature={"r": args.r, "M": args.M},
                    simulation={"t": args.t, "trials": args.trials, "seed": args.seed},
                    extra={"initial": init.key(), "top": args.top, "threshold": args.threshold},
                    output=args.output, format=args.format)
    rep = cross_validate(B, rule, init, args.t, args.trials, args.seed, args.top, args.threshold,
                         r=args.r, M=args.M, workers=args.workers)
    rows = [[r.state, r.kernel, r.estimate, r.stderr_null, r.z] for r in rep.rows]
    _emit(cfg, rep.to_dict(), ["state", "kernel", "estimate", "stderr", "z"], rows, out)
    return EXIT_OK if rep.passes else EXIT_MISMATCH


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mtasep", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"mtasep {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "table"), default="json")
    common.add_argument("--output", "-o", default=None, help="write to this path instead of stdout")
    common.add_argument("--workers", type=int, default=integrability.default_workers(),
                        help="worker processes (default from MTASEP_THREADS, else 1)")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("catalog", help="list, show, export or import interaction matrices")
    csub = c.add_subparsers(dest="action", required=True)
    csub.add_parser("list", parents=[common])
    show = csub.add_parser("show", parents=[common])
    show.add_argument("label")
    show.add_argument("--N", type=int, default=2)
    exp = csub.add_parser("export", parents=[common])
    exp.add_argument("path")
    imp = csub.add_parser("import", parents=[common])
    imp.add_argument("path")

    cl = sub.add_parser("classify", parents=[common], help="Yang-Baxter classification sweeps")
    cl.add_argument("sweep", choices=("natural", "convex", "param", "asymmetric"))
    cl.add_argument("--rule", default="backward")
    cl.add_argument("--samples", type=int, default=integrability.DEFAULT_SAMPLES)
    cl.add_argument("--seed", type=int, default=integrability.DEFAULT_SEED)

    def particles(sp, need_x: bool):
        sp.add_argument("--matrix", default="b02")
        sp.add_argument("--N", type=int, default=2)
        sp.add_argument("--rule", default="backward")
        sp.add_argument("--Y", type=_ints, required=True, help="initial positions, e.g. 0,1")
        sp.add_argument("--species-in", type=_species, default=None, help="initial species word, e.g. 21")
        sp.add_argument("--t", type=float, default=1.0)
        sp.add_argument("--r", type=float, default=None, help="contour radius")
        if need_x:
            sp.add_argument("--X", type=_ints, default=None, help="final positions (default: Y)")

    k = sub.add_parser("kernel", parents=[common], help="transition kernel by contour quadrature")
    particles(k, True)
    k.add_argument("--M", type=int, default=64)
    k.add_argument("--tol", type=float, default=1e-10)
    k.add_argument("--conserve", action="store_true", help="also report truncated total probability")

    s = sub.add_parser("simulate", parents=[common], help="Monte-Carlo final-state histogram")
    particles(s, False)
    s.add_argument("--trials", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)

    v = sub.add_parser("validate", parents=[common], help="kernel versus Monte-Carlo z-scores")
    particles(v, False)
    v.add_argument("--M", type=int, default=64)
    v.add_argument("--trials", type=int, default=100_000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--top", type=int, default=20)
    v.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    return p


COMMANDS = {"catalog": cmd_catalog, "classify": cmd_classify, "kernel": cmd_kernel,
            "simulate": cmd_simulate, "validate": cmd_validate}


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except (UsageError, catalog.UnknownLabel, catalog.NotApplicable, catalog.InconsistentExtension,
            catalog.ColumnSumError, NonStochasticMatrix, FileNotFoundError, ValueError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (PoleOnContour, QuadratureNotConverged, SingularResolvent, SingularMatrix,
            ZeroDivisionError) as exc:
        err.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
