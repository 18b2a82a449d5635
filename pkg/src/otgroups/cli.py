"""Command-line front end: ``otgroups {metric-check, ot-solve, probe, quotient}``.

Exit codes: 0 success, 1 mathematical failure (defect not reached,
certificate mismatch, invalid metric), 2 input or usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import io as oio
from .groups import (DEFAULT_RADIUS_CAP, DihedralInf, Group, RadiusExceeded, SimplexElement,
                     group_from_descriptor, parse_word, uniform_ball, word_metric_space)
from .metric import validate_metric
from .probe import (DEFAULT_SUPPORT_CAP, Failure, ProbeTask, default_pool, defect,
                    dihedral_folner, dihedral_target_set, homomorphism_obstruction,
                    sequential_minimize)
from .quotient import orbit_hausdorff, pushforward, quotient_metric
from .rational import fmt, to_fraction
from .transport import MeanNotZero, arens_eells_norm, solve, verify_certificate

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


class InputError(Exception):
    pass


class Output:
    """Collects the JSON payload and the table lines of one command."""

    def __init__(self, args, command: str, inputs: list[str]):
        self.args = args
        self.started = time.perf_counter()
        self.manifest = {
            "command": command,
            "inputs": {p: _digest(p) for p in inputs if p},
            "config": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
            "version": __version__,
        }
        self.rows: list[str] = []

    def num(self, q: Fraction):
        return float(q) if self.args.float else fmt(q)

    def emit(self, payload: dict) -> None:
        self.manifest["wall_time"] = round(time.perf_counter() - self.started, 6)
        fmt_choice = self.args.format or ("table" if sys.stdout.isatty() else "json")
        if fmt_choice == "json":
            sys.stdout.write(oio.dumps({"manifest": self.manifest, **payload}))
        else:
            sys.stdout.write("\n".join(self.rows) + "\n")


def _digest(path: str) -> str:
    try:
        return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError:
        return "unreadable"


def _load(loader, path, *extra):
    try:
        return loader(path, *extra)
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {exc.filename}") from None
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


# -- metric-check ------------------------------------------------------------

def cmd_metric_check(args) -> int:
    out = Output(args, "metric-check", [args.path])
    space = _load(oio.load_metric_space, args.path)
    if space.is_explicit:
        probe = None
    else:
        probe = space.word_metric.ball(args.probe_radius)
    report = validate_metric(space, probe)
    violations = [{"axiom": v.axiom, "witness": [oio.encode_point(p, space) for p in v.witness],
                   "detail": v.detail} for v in report.violations]
    out.rows.append(f"metric check: {space!r}, {report.probed} points probed")
    out.rows += [f"  {v['axiom']:<14} {v['witness']}  {v['detail']}" for v in violations]
    out.rows.append("OK" if report.ok else f"{len(violations)} violation(s)")
    out.emit({"ok": report.ok, "probed": report.probed, "violations": violations})
    return 0 if report.ok else 1


# -- ot-solve ----------------------------------------------------------------

def cmd_ot_solve(args) -> int:
    out = Output(args, "ot-solve", [args.measure, args.space])
    space = _load(oio.load_metric_space, args.space)
    xi = _load(oio.load_measure, args.measure, space)
    try:
        sol = solve(xi)
    except MeanNotZero as exc:
        raise InputError(str(exc)) from None
    payload = {"value": out.num(sol.value), "plan": oio.plan_to_json(sol.plan, space)["moves"]}
    out.rows.append(f"value  {out.num(sol.value)}")
    for mv in sol.plan.moves:
        out.rows.append(f"  {oio.encode_point(mv.source, space)} -> {oio.encode_point(mv.sink, space)}"
                        f"  mass {out.num(mv.mass)}")
    if args.dual:
        payload["dual_value"] = out.num(sol.witness.pair(xi))
        payload["witness"] = oio.witness_to_json(sol.witness, space)["values"]
        out.rows.append(f"dual   {out.num(sol.witness.pair(xi))}")
        for p, v in sorted(sol.witness.values.items(), key=lambda kv: space.sort_key(kv[0])):
            out.rows.append(f"  phi({oio.encode_point(p, space)}) = {out.num(v)}")
    status = 0
    if args.verify:
        ok = verify_certificate(xi, sol.plan, sol.witness)
        payload["verified"] = ok
        out.rows.append(f"certificate {'verified' if ok else 'FAILED'}")
        status = 0 if ok else 1
    out.emit(payload)
    return status


# -- probe -------------------------------------------------------------------

def _group_from_config(cfg: dict) -> Group:
    desc = {k: v for k, v in cfg.items() if k not in ("generators", "radius_cap")}
    return group_from_descriptor(desc)


def _beta_from_config(bcfg: dict, group: Group, gens, cap: int) -> SimplexElement:
    kind = bcfg.get("kind")
    if kind == "dihedral_folner":
        return dihedral_folner(int(bcfg.get("N", 1)), int(bcfg["M"]))
    if kind == "uniform_group":
        return SimplexElement.uniform(group.elements(), group)
    if kind == "uniform_ball":
        return uniform_ball(group, int(bcfg["radius"]), gens, cap)
    if kind == "uniform_interval":
        lo, hi = int(bcfg["lo"]), int(bcfg["hi"])
        return SimplexElement.uniform(list(range(lo, hi + 1)), group)
    if kind == "entries":
        return SimplexElement([(group.parse(k), to_fraction(v)) for k, v in bcfg["entries"].items()], group)
    raise InputError(f"unknown beta kind {kind!r}")


def _task_from_config(cfg: dict) -> ProbeTask:
    gcfg = cfg.get("group")
    if not gcfg:
        raise InputError("config needs a [group] table")
    group = _group_from_config(gcfg)
    names = None
    gens = None
    raw = gcfg.get("generators")
    if isinstance(raw, dict):
        names = {k: group.parse(v) for k, v in raw.items()}
        gens = tuple(names.values())
    elif raw is not None:
        gens = tuple(group.parse(v) for v in raw)
    cap = int(gcfg.get("radius_cap", DEFAULT_RADIUS_CAP))
    space = word_metric_space(group, gens, cap)
    tcfg = cfg.get("task", {})
    if "E" in tcfg:
        E = [parse_word(group, w, names) for w in tcfg["E"]]
    elif "E_dihedral" in tcfg:
        E = dihedral_target_set(int(tcfg["E_dihedral"]))
    elif "E_ball" in tcfg:
        E = space.word_metric.ball(int(tcfg["E_ball"]))
    else:
        raise InputError("[task] needs E, E_ball or E_dihedral")
    return ProbeTask(group, space, tuple(E), to_fraction(str(tcfg.get("epsilon", "1/2"))),
                     space.word_metric.generators)


def cmd_probe(args) -> int:
    out = Output(args, "probe", [args.config])
    try:
        cfg = tomllib.loads(Path(args.config).read_text())
    except FileNotFoundError:
        raise InputError(f"no such file: {args.config}") from None
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise InputError(f"{args.config}: {exc}") from None
    try:
        task = _task_from_config(cfg)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{args.config}: {exc}") from None
    G = task.group
    mode = cfg.get("task", {}).get("mode", "pairs")
    scfg = cfg.get("search", {})
    out.manifest["config_snapshot"] = cfg

    if "beta" in cfg:
        beta = _beta_from_config(cfg["beta"], G, task.generators, task.metric.word_metric.radius_cap)
        report = defect(beta, task, mode, args.threads)
        result = report
        if report.defect >= task.epsilon:
            obs = homomorphism_obstruction(beta, task)
            result = Failure(report, 0, "fixed beta misses epsilon",
                             *(obs if obs is not None else (None, None, None)))
    else:
        pool_kind = scfg.get("pool", "default")
        if pool_kind == "dihedral_folner":
            if not isinstance(G, DihedralInf):
                raise InputError("dihedral_folner pool needs the dihedral_inf group")
            pool = [dihedral_folner(1, M) for M in range(int(scfg.get("max_M", 30)) + 1)]
        elif pool_kind == "balls":
            pool = [uniform_ball(G, r, task.generators) for r in range(1, int(scfg.get("max_radius", 6)) + 1)]
        elif pool_kind == "default":
            pool = default_pool(G, task.generators, int(scfg.get("max_radius", 6)), int(scfg.get("max_M", 30)))
        else:
            raise InputError(f"unknown pool {pool_kind!r}")
        result = sequential_minimize(task, pool, int(scfg.get("budget", 100)), mode,
                                     int(scfg.get("support_cap", DEFAULT_SUPPORT_CAP)), args.threads)

    failed = isinstance(result, Failure)
    report = result.best if failed else result
    payload = {
        "status": "failure" if failed else "success",
        "group": G.descriptor(),
        "generators": [G.canonical(s) for s in task.generators],
        "E": [G.canonical(g) for g in task.E],
        "epsilon": fmt(task.epsilon),
        "report": oio.defect_report_to_json(report, task),
    }
    out.rows.append(f"group {G!r}, S = {{{', '.join(G.canonical(s) for s in task.generators)}}}, "
                    f"|E| = {len(task.E)}, epsilon = {fmt(task.epsilon)}, mode = {report.mode}")
    out.rows.append(f"{'pair':<24} {'value':>14}  certificate")
    for (g, f), r in report.per_pair.items():
        status = {True: "verified", False: "FAILED", None: "unchecked"}[r.certified]
        out.rows.append(f"{G.canonical(g) + ' / ' + G.canonical(f):<24} {str(out.num(r.value)):>14}  {status}")
    out.rows.append(f"defect {out.num(report.defect)} (support {len(report.beta)})")
    if failed:
        payload["failure"] = {"reason": result.reason, "evaluations": result.evaluations}
        out.rows.append(f"FAILURE: {result.reason}")
        if result.lower_bound is not None:
            g, f = result.obstruction_pair
            payload["failure"]["lower_bound"] = {
                "value": fmt(result.lower_bound), "pair": [G.canonical(g), G.canonical(f)],
                "witness": oio.witness_to_json(result.obstruction_witness, task.metric)["values"]}
            out.rows.append(f"certified lower bound {out.num(result.lower_bound)} on pair "
                            f"{G.canonical(g)} / {G.canonical(f)}")
    else:
        out.rows.append(f"SUCCESS: defect < {fmt(task.epsilon)}")
    out.emit(payload)
    if not report.all_certified:
        return 1
    return 1 if failed and not args.allow_fail else 0


# -- quotient ----------------------------------------------------------------

def cmd_quotient(args) -> int:
    out = Output(args, "quotient", [args.action, args.measure])
    action = _load(oio.load_action, args.action)
    q = quotient_metric(action)
    space = action.space
    ok_metric = validate_metric(q.metric).ok
    matches = all(q.metric.dist(b, c) == orbit_hausdorff(q, b, c) for b in q.orbits for c in q.orbits)
    labels = ["{" + ",".join(str(oio.encode_point(x, space)) for x in orb) + "}" for orb in q.orbits]
    payload = {
        "orbits": [[oio.encode_point(x, space) for x in orb] for orb in q.orbits],
        "matrix": [[out.num(q.metric.dist(b, c)) for c in q.orbits] for b in q.orbits],
        "quotient_metric_valid": ok_metric,
        "hausdorff_agrees": matches,
    }
    width = max(len(s) for s in labels)
    out.rows.append(f"{len(q.orbits)} orbit(s) under {action.label}")
    out.rows.append(" " * (width + 2) + "  ".join(f"{s:>{width}}" for s in labels))
    for lab, b in zip(labels, q.orbits):
        out.rows.append(f"{lab:>{width}}  " + "  ".join(f"{str(out.num(q.metric.dist(b, c))):>{width}}"
                                                       for c in q.orbits))
    status = 0 if ok_metric and matches else 1
    if args.measure:
        xi = _load(oio.load_measure, args.measure, space)
        try:
            A_xi = pushforward(xi, q)
        except MeanNotZero as exc:
            raise InputError(str(exc)) from None
        norm_x, _ = arens_eells_norm(xi)
        norm_q, _ = arens_eells_norm(A_xi)
        contraction = norm_q <= norm_x
        payload["pushforward"] = [{"orbit": [oio.encode_point(x, space) for x in orb], "mass": fmt(m)}
                                  for orb, m in A_xi.items()]
        payload["norm_X"] = out.num(norm_x)
        payload["norm_quotient"] = out.num(norm_q)
        payload["contraction"] = contraction
        push = ", ".join(f"{labels[q.orbits.index(orb)]}: {out.num(m)}" for orb, m in A_xi.items()) or "0"
        out.rows.append(f"pushforward  {push}")
        out.rows.append(f"norm on X {out.num(norm_x)}, on quotient {out.num(norm_q)}, "
                        f"contraction {'holds' if contraction else 'VIOLATED'}")
        status = status or (0 if contraction else 1)
    out.emit(payload)
    return status


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default=None,
                        help="output format (default: table on a terminal, json otherwise)")
    common.add_argument("--float", action="store_true", help="print numbers as floats")

    parser = argparse.ArgumentParser(prog="otgroups", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"otgroups {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metric-check", parents=[common], help="validate the écart axioms of a metric file")
    p.add_argument("path")
    p.add_argument("--probe-radius", type=int, default=3, help="ball radius probed for group metrics")
    p.set_defaults(func=cmd_metric_check)

    p = sub.add_parser("ot-solve", parents=[common], help="Arens–Eells norm of a mean-zero measure")
    p.add_argument("measure")
    p.add_argument("space")
    p.add_argument("--dual", action="store_true", help="also print the 1-Lipschitz dual witness")
    p.add_argument("--verify", action="store_true", help="check the primal/dual certificate")
    p.set_defaults(func=cmd_ot_solve)

    p = sub.add_parser("probe", parents=[common], help="invariance defect probe from a TOML config")
    p.add_argument("config")
    p.add_argument("--allow-fail", action="store_true", help="exit 0 even if epsilon is not reached")
    p.add_argument("--threads", type=int, default=None, help="per-pair parallelism (env OTGROUPS_THREADS)")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("quotient", parents=[common], help="orbit space of a finite isometric action")
    p.add_argument("action")
    p.add_argument("measure", nargs="?")
    p.set_defaults(func=cmd_quotient)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RadiusExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
