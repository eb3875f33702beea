"""toric-limits command line: subdivisions, fans, samples, distances and limits.

Reports go to stdout as JSON (12 significant digits). With --out-dir the
report, any CSV, and a manifest.json describing the run are written there.
Exit codes: 0 success, 1 invalid input, 2 inconclusive or mismatching result.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from ._linalg import normalize_direction
from .configurations import pentagon
from .degeneration import (
    CONVERGED,
    limit_equations,
    sequence_limit,
    verify_toric_degeneration,
)
from .hausdorff import CloudError, hausdorff, net_radius
from .io import (
    InputError,
    config_to_dict,
    dumps,
    parse_cloud,
    parse_config,
    parse_lift,
    parse_sequence,
    parse_weight,
    read_json,
)
from .pointconfig import ConfigurationError, PointConfiguration, reduce_mod_aff
from .secfan import SequenceSpec, gauge_coordinates, sample_secondary_fan, secondary_cone
from .subdivision import SubdivisionError, convex_certificate, induced_subdivision, minimal_nonfaces
from .toric import BirchStats, sample_variety

EXIT_OK, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2
PENTAGON_GAUGE = ("(1,1)", "(1/2,3/2)", "(0,1)")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


class Run:
    """Collects inputs, digests and outputs for one invocation."""

    def __init__(self, args):
        self.args = args
        self.inputs: dict = {}
        self.csv: str | None = None

    def load(self, flag: str, path):
        if path is None:
            raise InputError(f"--{flag} is required")
        data, digest = read_json(path)
        self.inputs[flag] = {"path": str(path), "sha256": digest}
        return data

    def config(self) -> PointConfiguration:
        return parse_config(self.load("config", self.args.config), str(self.args.config))


def _gauge(A: PointConfiguration, text: str | None):
    if text is None:
        return None
    if text == "orthogonal":
        return "orthogonal"
    labels = [s.strip() for s in _split_labels(text)]
    for lab in labels:
        if lab not in A.labels:
            raise InputError(f"--gauge: unknown label {lab!r}")
    return labels


def _split_labels(text: str) -> list:
    # labels such as "(1/2,3/2)" contain commas, so split on ';' or on commas outside parentheses
    if ";" in text:
        return [s for s in text.split(";") if s.strip()]
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
            continue
        depth += ch in "([{"
        depth -= ch in ")]}"
        cur += ch
    out.append(cur)
    return [s for s in out if s.strip()]


def _reduced(A, f, gauge) -> dict:
    if gauge is None or gauge == "orthogonal":
        red = reduce_mod_aff(A, f, "orthogonal")
        return {lab: x for lab, x in zip(A.labels, red)}
    red = reduce_mod_aff(A, f, gauge)
    return {lab: x for lab, x in zip(A.labels, red)}


# ---------------------------------------------------------------- commands

def cmd_subdivide(run: Run) -> tuple[dict, int]:
    A = run.config()
    lam = parse_lift(run.load("lift", run.args.lift), A, str(run.args.lift))
    gauge = _gauge(A, run.args.gauge)
    S = induced_subdivision(A, lam)
    nf = minimal_nonfaces(S)
    C = secondary_cone(A, S)
    report = {
        "subdivision": S.to_dict(),
        "trivial": S.is_trivial,
        "triangulation": S.is_triangulation,
        "nonfaces": {"pairs": [list(p) for p in nf.pairs], "singletons": list(nf.singletons)},
        "secondary_cone": {"dim": C.dim, "lineality_dim": C.lineality_dim, "n_forms": len(C.forms)},
        "lift_reduced": _reduced(A, lam, gauge),
    }
    return report, EXIT_OK


def cmd_fan(run: Run) -> tuple[dict, int]:
    A = run.config()
    gauge = _gauge(A, run.args.gauge)
    fan = sample_secondary_fan(A, run.args.samples, run.args.seed)
    cones = []
    for fc in fan.cones:
        entry = {"dim": fc.dim, "hits": fc.hits, "subdivision": fc.subdivision.to_dict()}
        if fc.dim == fan.lineality_dim + 1:
            ray = [r for r in fc.cone.rays]
            if ray:
                vec = A.function(list(ray[0]))
                g = (gauge_coordinates(A, vec, gauge) if isinstance(gauge, list)
                     else reduce_mod_aff(A, vec, "orthogonal"))
                entry["generator"] = normalize_direction(list(g))
        cones.append(entry)
    counts = {}
    for fc in fan.cones:
        counts[str(fc.dim)] = counts.get(str(fc.dim), 0) + 1
    report = {"samples": fan.n_samples, "seed": run.args.seed, "complete": fan.complete,
              "counts_by_dim": counts, "cones": cones, "edges": [list(e) for e in fan.edges]}
    return report, EXIT_OK if fan.complete else EXIT_INCONCLUSIVE


def cmd_certify(run: Run) -> tuple[dict, int]:
    A = run.config()
    lam = parse_lift(run.load("lift", run.args.lift), A, str(run.args.lift))
    S = induced_subdivision(A, lam)
    if run.args.nonface:
        targets = [tuple(_split_labels(run.args.nonface))]
        for lab in targets[0]:
            if lab not in A.labels:
                raise InputError(f"--nonface: unknown label {lab!r}")
    else:
        targets = minimal_nonfaces(S).monomials()
    certs = []
    ok = True
    for nf in targets:
        c = convex_certificate(S, nf, lam)
        valid = c.check(A, lam)
        ok &= valid
        certs.append({"nonface": list(nf), "kind": c.kind, "facet": list(c.facet), "point": list(c.point),
                      "margin": c.margin, "beta": list(c.beta) if c.beta is not None else None, "valid": valid})
    return {"subdivision": S.to_dict(), "certificates": certs}, EXIT_OK if ok else EXIT_INCONCLUSIVE


def cmd_sample(run: Run) -> tuple[dict, int]:
    A = run.config()
    lw = parse_weight(run.load("weight", run.args.weight), A, str(run.args.weight))
    stats = BirchStats()
    cloud = sample_variety(A, None, run.args.mesh, stats, log_weight=lw)
    out = cloud.to_dict()
    out["eta"] = net_radius(cloud)
    out["newton_max"] = stats.max_iterations
    return out, EXIT_OK


def cmd_hausdorff(run: Run) -> tuple[dict, int]:
    X = parse_cloud(run.load("cloud-a", run.args.cloud_a), str(run.args.cloud_a))
    Y = parse_cloud(run.load("cloud-b", run.args.cloud_b), str(run.args.cloud_b))
    if tuple(X.labels) != tuple(Y.labels):
        if set(X.labels) != set(Y.labels):
            raise InputError("clouds are indexed by different labels")
        order = [X.labels.index(lab) for lab in Y.labels]
        X.points, X.labels = X.points[:, order], tuple(Y.labels)
    try:
        rep = hausdorff(X, Y, with_eta=True)
    except CloudError as exc:
        raise InputError(str(exc)) from None
    return rep.to_dict(), EXIT_OK


def _schedule(t_max: float, t_step: float) -> list:
    if t_step <= 0 or t_max < 0:
        raise InputError("--t-step must be positive and --t-max nonnegative")
    n = int(np.floor(t_max / t_step + 1e-9))
    return [k * t_step for k in range(n + 1)]


def cmd_degenerate(run: Run) -> tuple[dict, int]:
    A = run.config()
    lam = parse_lift(run.load("lift", run.args.lift), A, str(run.args.lift))
    lw = parse_weight(run.load("weight", run.args.weight), A, str(run.args.weight))
    rep = verify_toric_degeneration(A, [float(x) for x in lam], None, _schedule(run.args.t_max, run.args.t_step),
                                    run.args.mesh, run.args.tol, log_weight=lw)
    run.csv = rep.csv()
    return rep.to_dict(), EXIT_OK if rep.verdict == CONVERGED else EXIT_INCONCLUSIVE


def cmd_sequence_limit(run: Run) -> tuple[dict, int]:
    A = run.config()
    seq = parse_sequence(run.load("sequence", run.args.sequence), A, str(run.args.sequence))
    predicted, diag, rep = sequence_limit(A, seq, run.args.mesh, run.args.tol)
    run.csv = rep.csv()
    out = rep.to_dict()
    out["equations"] = limit_equations(A, predicted.subdivision, log_weight=predicted.log_weight).to_dict()
    return out, EXIT_OK if rep.verdict == CONVERGED else EXIT_INCONCLUSIVE


# ---------------------------------------------------------------- reproductions

def _pentagon_terms(terms: dict) -> SequenceSpec:
    return SequenceSpec.structured(pentagon(), terms=terms)


def _repro_limit(A, seq, expect_facets, expect_lw, run) -> tuple[dict, int]:
    predicted, diag, rep = sequence_limit(A, seq, run.args.mesh, run.args.tol)
    run.csv = rep.csv()
    facets = {frozenset(F) for F in predicted.subdivision.facets}
    ok_s = facets == {frozenset(F) for F in expect_facets}
    out = {"subdivision": predicted.subdivision.to_dict(), "subdivision_matches": ok_s,
           "verdict": rep.verdict, "final": list(rep.final)}
    ok_w = True
    if expect_lw is not None:
        gap = reduce_mod_aff(A, predicted.log_weight - np.asarray(expect_lw, dtype=float), "orthogonal")
        out["weight_gap"] = float(np.abs(gap).max())
        ok_w = out["weight_gap"] <= 1e-9
        out["weight_matches"] = ok_w
    out["log_weight_orthogonal"] = diag["log_weight_orthogonal"]
    good = ok_s and ok_w and rep.verdict == CONVERGED
    return out, EXIT_OK if good else EXIT_INCONCLUSIVE


def repro_pentagon_square(run):
    seq = _pentagon_terms({"(0,0)": "-i-1/i", "(1,0)": "i-1", "(1,1)": "i", "(1/2,3/2)": "-i/2", "(0,1)": "-i"})
    expect = [("(0,0)", "(1,0)", "(1,1)", "(0,1)"), ("(1,1)", "(1/2,3/2)", "(0,1)")]
    out, code = _repro_limit(seq.config, seq, expect, [0.0, -1.0, 0.0, 0.0, 0.0], run)
    eq = limit_equations(seq.config, induced_subdivision(seq.config, [-1, -1, 0, 0, 0]),
                         log_weight=[0.0, -1.0, 0.0, 0.0, 0.0])
    out["equations"] = eq.to_dict()
    return out, code


def repro_pentagon_sqrt(run):
    seq = _pentagon_terms({"(0,0)": "sqrt(i)-i", "(1,0)": "-i"})
    expect = [("(0,0)", "(1,0)", "(1,1)"), ("(0,0)", "(1,1)", "(0,1)"), ("(1,1)", "(1/2,3/2)", "(0,1)")]
    return _repro_limit(seq.config, seq, expect, None, run)


def repro_pentagon_bounded(run):
    # v_i = i * (affine function) + a convergent part: the limit is another translate
    A = pentagon()
    c = {"(0,0)": "1/i", "(1,0)": "2", "(1,1)": "-1+1/i", "(1/2,3/2)": "0", "(0,1)": "1/2"}
    terms = {}
    for lab, (x, y) in zip(A.labels, A.coords):
        terms[lab] = f"i*({Fraction(2) * x - y + 3}) + {c[lab]}"
    seq = SequenceSpec.structured(A, terms=terms)
    expect = [tuple(A.labels)]
    return _repro_limit(A, seq, expect, [0.0, 2.0, -1.0, 0.0, 0.5], run)


def repro_pentagon_fan(run):
    A = pentagon()
    fan = sample_secondary_fan(A, run.args.samples, run.args.seed)
    dims = sorted(fc.dim for fc in fan.cones)
    rays = {}
    for fc in fan.rays():
        vec = A.function(list(fc.cone.rays[0]))
        g = gauge_coordinates(A, vec, list(PENTAGON_GAUGE))
        rays[str(len(rays))] = {"facets": fc.subdivision.to_dict()["facets"], "generator": normalize_direction(list(g))}
    out = {"counts": {"minimal": len(fan.minimal()), "rays": len(fan.rays()), "chambers": len(fan.maximal())},
           "complete": fan.complete, "rays": rays, "dims": dims}
    good = out["counts"] == {"minimal": 1, "rays": 5, "chambers": 5} and fan.complete
    return out, EXIT_OK if good else EXIT_INCONCLUSIVE


REPROS = {
    "pentagon-square": repro_pentagon_square,
    "pentagon-sqrt": repro_pentagon_sqrt,
    "pentagon-bounded": repro_pentagon_bounded,
    "pentagon-fan": repro_pentagon_fan,
}


def cmd_repro(run: Run) -> tuple[dict, int]:
    out, code = REPROS[run.args.name](run)
    out["example"] = run.args.name
    if run.args.name.startswith("pentagon"):
        run.inputs["config"] = {"builtin": "pentagon", "config": config_to_dict(pentagon())}
    return out, code


# ---------------------------------------------------------------- wiring

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out-dir", type=Path)

    p = _Parser(prog="toric-limits", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"toric-limits {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("subdivide", cmd_subdivide, "regular subdivision induced by a lift")
    sp.add_argument("--config", type=Path, required=True)
    sp.add_argument("--lift", type=Path, required=True)
    sp.add_argument("--gauge")

    sp = add("fan", cmd_fan, "sample the secondary fan")
    sp.add_argument("--config", type=Path, required=True)
    sp.add_argument("--samples", type=int, default=2000)
    sp.add_argument("--gauge")

    sp = add("certify", cmd_certify, "separation certificates for nonfaces")
    sp.add_argument("--config", type=Path, required=True)
    sp.add_argument("--lift", type=Path, required=True)
    sp.add_argument("--nonface")

    sp = add("sample", cmd_sample, "sample a translated toric variety")
    sp.add_argument("--config", type=Path, required=True)
    sp.add_argument("--weight", type=Path, required=True)
    sp.add_argument("--mesh", type=float, default=0.05)

    sp = add("hausdorff", cmd_hausdorff, "l1 Hausdorff distance of two clouds")
    sp.add_argument("--cloud-a", type=Path, required=True)
    sp.add_argument("--cloud-b", type=Path, required=True)

    sp = add("degenerate", cmd_degenerate, "check a one-parameter toric degeneration")
    sp.add_argument("--config", type=Path, required=True)
    sp.add_argument("--lift", type=Path, required=True)
    sp.add_argument("--weight", type=Path, required=True)
    sp.add_argument("--t-max", type=float, default=40.0)
    sp.add_argument("--t-step", type=float, default=2.0)
    sp.add_argument("--mesh", type=float, default=0.05)
    sp.add_argument("--tol", type=float, default=0.05)

    sp = add("sequence-limit", cmd_sequence_limit, "predict and check the limit of a translate sequence")
    sp.add_argument("--config", type=Path, required=True)
    sp.add_argument("--sequence", type=Path, required=True)
    sp.add_argument("--mesh", type=float, default=0.05)
    sp.add_argument("--tol", type=float, default=0.05)

    sp = add("repro", cmd_repro, "reproduce a worked example")
    sp.add_argument("name", choices=sorted(REPROS))
    sp.add_argument("--mesh", type=float, default=0.05)
    sp.add_argument("--tol", type=float, default=0.05)
    sp.add_argument("--samples", type=int, default=2000)
    return p


def _manifest(run: Run, wall: float, code: int) -> dict:
    a = run.args
    tolerances = {k: getattr(a, k) for k in ("mesh", "tol", "t_max", "t_step", "samples") if hasattr(a, k)}
    return {"command": a.command, "argv": run.argv, "inputs": run.inputs, "seed": a.seed,
            "tolerances": tolerances, "version": __version__, "wall_time_s": round(wall, 3), "exit_code": code}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    r = Run(args)
    r.argv = argv
    start = time.perf_counter()
    try:
        report, code = args.fn(r)
    except (InputError, ConfigurationError, SubdivisionError, ValueError) as exc:
        print(f"toric-limits {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = dumps(report)
    sys.stdout.write(text)
    if args.out_dir is not None:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(text, encoding="utf-8")
        if r.csv is not None:
            (out / "distances.csv").write_text(r.csv, encoding="utf-8")
        (out / "manifest.json").write_text(dumps(_manifest(r, time.perf_counter() - start, code)), encoding="utf-8")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
