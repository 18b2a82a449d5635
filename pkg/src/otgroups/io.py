"""JSON encodings for spaces, measures, plans, witnesses, actions and reports.

Every number is written as an exact "num/den" string.  Points of a matrix
space are written as given in its "points" list; points of a group space are
written as canonical element keys.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .groups import (DEFAULT_RADIUS_CAP, Group, SimplexElement, group_from_descriptor,
                     word_metric_space)
from .metric import MetricSpace
from .rational import fmt, to_fraction
from .transport import LipschitzWitness, Move, SignedMeasure, TransportPlan


def read_json(source) -> Any:
    if isinstance(source, Mapping):
        return source
    return json.loads(Path(source).read_text())


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


# -- points ------------------------------------------------------------------

def encode_point(p, space: MetricSpace):
    group = getattr(space, "group", None)
    if group is not None:
        return group.canonical(p)
    if isinstance(p, tuple):  # orbit of a quotient space
        return [encode_point(x, space) for x in p]
    return p


def decode_point(raw, space: MetricSpace):
    group = getattr(space, "group", None)
    if group is not None:
        return group.parse(raw) if isinstance(raw, str) else raw
    if isinstance(raw, list):
        return tuple(raw)
    return raw


# -- metric spaces -----------------------------------------------------------

def metric_space_from_json(data: Mapping) -> MetricSpace:
    if "matrix" in data:
        exact = not data.get("float", False)
        return MetricSpace.from_matrix(data["points"], data["matrix"], exact=exact, name=data.get("name"))
    if "group" in data:
        if data.get("metric", "word") != "word":
            raise ValueError(f"unsupported group metric {data.get('metric')!r}")
        group = group_from_descriptor(data["group"])
        gens = generators_from_json(group, data.get("generators"))
        return word_metric_space(group, gens, int(data.get("radius_cap", DEFAULT_RADIUS_CAP)))
    raise ValueError("metric file needs either 'matrix' or 'group'")


def generators_from_json(group: Group, raw) -> tuple | None:
    """Generating set given as a list of keys/words or a {name: key} table."""
    if raw is None:
        return None
    if isinstance(raw, Mapping):
        return tuple(group.parse(v) for v in raw.values())
    return tuple(group.parse(v) for v in raw)


def load_metric_space(path) -> MetricSpace:
    return metric_space_from_json(read_json(path))


def metric_space_to_json(space: MetricSpace) -> dict:
    group = getattr(space, "group", None)
    if group is not None:
        gens = space.word_metric.generators
        return {"group": group.descriptor(), "metric": "word",
                "generators": [group.canonical(s) for s in gens],
                "radius_cap": space.word_metric.radius_cap}
    if not space.is_explicit:
        raise ValueError("oracle spaces without a group cannot be serialised")
    pts = list(space.points)
    return {"points": [encode_point(p, space) for p in pts],
            "matrix": [[fmt(space.dist(x, y)) for y in pts] for x in pts]}


# -- measures, plans, witnesses ----------------------------------------------

def measure_from_json(data: Mapping, space: MetricSpace) -> SignedMeasure:
    return SignedMeasure([(decode_point(e["point"], space), to_fraction(e["mass"]))
                          for e in data["entries"]], space)


def measure_to_json(xi: SignedMeasure) -> dict:
    return {"entries": [{"point": encode_point(p, xi.space), "mass": fmt(m)} for p, m in xi.items()]}


def load_measure(path, space: MetricSpace) -> SignedMeasure:
    return measure_from_json(read_json(path), space)


def plan_to_json(plan: TransportPlan, space: MetricSpace) -> dict:
    return {"moves": [{"source": encode_point(mv.source, space), "sink": encode_point(mv.sink, space),
                       "mass": fmt(mv.mass)} for mv in plan.moves]}


def plan_from_json(data: Mapping, space: MetricSpace) -> TransportPlan:
    return TransportPlan(tuple(Move(decode_point(m["source"], space), decode_point(m["sink"], space),
                                    to_fraction(m["mass"])) for m in data["moves"]))


def witness_to_json(witness: LipschitzWitness, space: MetricSpace) -> dict:
    pts = space.sorted(witness.values)
    return {"values": [{"point": encode_point(p, space), "value": fmt(witness.values[p])} for p in pts]}


def witness_from_json(data: Mapping, space: MetricSpace) -> LipschitzWitness:
    return LipschitzWitness({decode_point(e["point"], space): to_fraction(e["value"]) for e in data["values"]})


def simplex_from_json(data: Mapping, group: Group) -> SimplexElement:
    return SimplexElement([(group.parse(e["point"]), to_fraction(e["mass"])) for e in data["entries"]], group)


def simplex_to_json(beta: SimplexElement) -> dict:
    return {"entries": [{"point": beta.group.canonical(g), "mass": fmt(w)} for g, w in beta.items()]}


# -- actions -----------------------------------------------------------------

def action_from_json(data: Mapping):
    """Action file: a matrix metric space plus "permutations" (image index
    lists), or plus "group" (finite descriptor) and "action_table" mapping
    element keys to image index lists."""
    from .quotient import FiniteAction

    space = metric_space_from_json({k: data[k] for k in ("points", "matrix", "float", "name") if k in data})
    if "permutations" in data:
        return FiniteAction.from_permutations(space, data["permutations"])
    if "group" in data and "action_table" in data:
        group = group_from_descriptor(data["group"])
        table = {group.parse(k): tuple(v) for k, v in data["action_table"].items()}
        pts = space.points
        return FiniteAction.from_group(space, group, lambda g, x: pts[table[g][space.index(x)]])
    raise ValueError("action file needs 'permutations' or 'group' + 'action_table'")


def load_action(path):
    return action_from_json(read_json(path))


# -- reports -----------------------------------------------------------------

def defect_report_to_json(report, task) -> dict:
    G, space = task.group, task.metric
    pairs = []
    for (g, f), r in report.per_pair.items():
        pairs.append({
            "g": G.canonical(g), "f": G.canonical(f), "value": fmt(r.value),
            "certified": r.certified,
            "plan": plan_to_json(r.plan, space)["moves"],
            "witness": witness_to_json(r.witness, space)["values"],
        })
    return {"defect": fmt(report.defect), "mode": report.mode,
            "beta": simplex_to_json(report.beta), "support_size": len(report.beta),
            "pairs": pairs}


def fraction_or_none(q: Fraction | None):
    return None if q is None else fmt(q)
