"""Instance and solution file formats.

Text format (``c`` lines are comments)::

    p ksp <num_sets> <k> <universe_size>
    s <num>/<den> <elem> <elem> ...

    p mwis <n> <m>
    v <id> <num>/<den>
    e <u> <v>

The JSON mirror carries the same data under ``kind``, ``k``, ``universe``,
``sets``, ``weights`` and ``edges``.
"""
import json
import logging
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ValidationError, model_validator

from errors import InputError
from instance import ConflictGraph, PackingInstance
from utils import fmt_fraction, parse_rational

logger = logging.getLogger(__name__)

CLAW_BOUND_PREFIX = "c claw bound d="


class InstanceDocument(BaseModel):
    kind: Literal["ksp", "mwis"]
    k: Optional[int] = None
    universe: Optional[int] = None
    sets: List[List[int]] = []
    weights: List[str]
    edges: List[List[int]] = []
    d: Optional[int] = None

    @model_validator(mode="after")
    def check_shape(self):
        if self.kind == "ksp":
            if self.k is None or self.universe is None:
                raise ValueError("ksp documents need k and universe")
            if len(self.sets) != len(self.weights):
                raise ValueError("sets and weights differ in length")
        for edge in self.edges:
            if len(edge) != 2:
                raise ValueError(f"edge {edge} must have two endpoints")
        return self


class SolutionDocument(BaseModel):
    members: Optional[List[int]] = None
    final_members: Optional[List[int]] = None

    def ids(self):
        if self.members is not None:
            return self.members
        if self.final_members is not None:
            return self.final_members
        raise ValueError("solution document has neither members nor final_members")


# Text format
def parse_instance(text):
    header, claw_bound = None, None
    sets, weights, vertex_weights, edges = [], [], {}, []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith(CLAW_BOUND_PREFIX):
            try:
                claw_bound = int(line[len(CLAW_BOUND_PREFIX):])
            except ValueError as e:
                raise InputError(f"line {lineno}: bad claw bound: {e}") from e
            continue
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        tag = parts[0]
        try:
            if tag == "p":
                if header is not None:
                    raise InputError("duplicate problem line")
                header = parts[1:]
                if header[0] not in ("ksp", "mwis"):
                    raise InputError(f"unknown problem kind {header[0]!r}")
            elif header is None:
                raise InputError("data before the problem line")
            elif tag == "s" and header[0] == "ksp":
                weights.append(parse_rational(parts[1]))
                sets.append([int(x) for x in parts[2:]])
            elif tag == "v" and header[0] == "mwis":
                v = int(parts[1])
                if v in vertex_weights:
                    raise InputError(f"vertex {v} declared twice")
                vertex_weights[v] = parse_rational(parts[2])
            elif tag == "e" and header[0] == "mwis":
                edges.append((int(parts[1]), int(parts[2])))
            else:
                raise InputError(f"unexpected line tag {tag!r}")
        except (IndexError, ValueError) as e:
            raise InputError(f"line {lineno}: {e}") from e
    if header is None:
        raise InputError("missing problem line")
    try:
        if header[0] == "ksp":
            count, k, universe = (int(x) for x in header[1:4])
            if count != len(sets):
                raise InputError(f"header announces {count} sets, found {len(sets)}")
            return PackingInstance(universe, tuple(sets), tuple(weights), k)
        n, m = (int(x) for x in header[1:3])
    except ValueError as e:
        raise InputError(f"bad problem line: {e}") from e
    if sorted(vertex_weights) != list(range(n)):
        raise InputError(f"vertex ids must be exactly 0..{n - 1}")
    if m != len(edges):
        raise InputError(f"header announces {m} edges, found {len(edges)}")
    return ConflictGraph.from_edges(n, edges, [vertex_weights[v] for v in range(n)], d=claw_bound)


def dump_instance(obj):
    if isinstance(obj, PackingInstance):
        lines = [f"p ksp {obj.n} {obj.k} {obj.universe_size}"]
        for s, w in zip(obj.sets, obj.weights):
            lines.append("s " + " ".join([fmt_fraction(w)] + [str(e) for e in s]))
    else:
        edges = obj.edges()
        lines = [f"p mwis {obj.n} {len(edges)}"]
        if obj.d is not None:
            lines.insert(0, f"{CLAW_BOUND_PREFIX}{obj.d}")
        lines += [f"v {v} {fmt_fraction(w)}" for v, w in enumerate(obj.weights)]
        lines += [f"e {u} {v}" for u, v in edges]
    return "\n".join(lines) + "\n"


# JSON mirror
def instance_to_json(obj):
    if isinstance(obj, PackingInstance):
        doc = InstanceDocument(
            kind="ksp",
            k=obj.k,
            universe=obj.universe_size,
            sets=[list(s) for s in obj.sets],
            weights=[fmt_fraction(w) for w in obj.weights],
        )
    else:
        doc = InstanceDocument(
            kind="mwis",
            weights=[fmt_fraction(w) for w in obj.weights],
            edges=[list(e) for e in obj.edges()],
            d=obj.d,
        )
    return json.dumps(doc.model_dump(exclude_none=True), indent=2, sort_keys=True) + "\n"


def instance_from_json(text):
    try:
        doc = InstanceDocument.model_validate_json(text)
    except ValidationError as e:
        raise InputError(f"invalid instance document: {e}") from e
    weights = [parse_rational(w) for w in doc.weights]
    if doc.kind == "ksp":
        return PackingInstance(doc.universe, tuple(tuple(s) for s in doc.sets), tuple(weights), doc.k)
    return ConflictGraph.from_edges(len(weights), [tuple(e) for e in doc.edges], weights, d=doc.d)


# Files
def read_instance(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    if path.suffix == ".json":
        return instance_from_json(text)
    return parse_instance(text)


def load_instance(path):
    """
    인스턴스 파일을 읽어 (instance, None) 또는 (None, error message)를 반환합니다.
    """
    try:
        return read_instance(path), None
    except InputError as e:
        logger.warning("failed to load %s: %s", path, e)
        return None, str(e)


def save_instance(obj, path):
    path = Path(path)
    text = instance_to_json(obj) if path.suffix == ".json" else dump_instance(obj)
    path.write_text(text)
    return path


def parse_solution(text):
    try:
        return SolutionDocument.model_validate_json(text).ids()
    except (ValidationError, ValueError) as e:
        raise InputError(f"invalid solution document: {e}") from e


def load_solution(path):
    """
    해 파일(JSON)을 읽어 (vertex id list, None) 또는 (None, error message)를 반환합니다.
    """
    try:
        return parse_solution(Path(path).read_text()), None
    except (OSError, InputError) as e:
        return None, str(e)


def solution_to_json(members):
    return json.dumps({"members": sorted(members)}) + "\n"
