"""Reading problem files and writing result documents."""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Dag, WeightedFunction, build_dag, chain, domination_closure, transitive_closure

SIG_DIGITS = 12
ORDERS = ("linear", "dag", "points")


@dataclass
class ProblemInput:
    """Weighted data together with the order it lives on."""

    order: str
    fw: WeightedFunction
    edges: np.ndarray | None = None
    points: np.ndarray | None = None
    ids: list | None = None

    @property
    def n(self) -> int:
        return self.fw.n

    def closure(self) -> Dag:
        if self.order == "linear":
            return transitive_closure(chain(self.n))
        if self.order == "dag":
            return transitive_closure(build_dag(self.n, self.edges))
        return domination_closure(self.points)


def _rows(text: str) -> tuple[list[str], list[list[float]]]:
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError("input has no rows")
    header = [c.strip().lower() for c in rows[0]]
    body = []
    for k, r in enumerate(rows[1:], start=2):
        try:
            body.append([float(c) for c in r])
        except ValueError as exc:
            raise ValueError(f"line {k}: {exc}") from None
        if len(r) != len(header):
            raise ValueError(f"line {k}: expected {len(header)} fields, got {len(r)}")
    if not body:
        raise ValueError("input has a header but no data")
    return header, body


def parse_linear_csv(text: str) -> ProblemInput:
    """CSV with header ``value`` or ``value,weight``; row order is the chain order."""
    header, body = _rows(text)
    if header not in (["value"], ["value", "weight"]):
        raise ValueError(f"linear CSV header must be 'value[,weight]', got {','.join(header)!r}")
    arr = np.array(body)
    w = arr[:, 1] if arr.shape[1] == 2 else None
    return ProblemInput("linear", WeightedFunction.from_values(arr[:, 0], w))


def parse_points_csv(text: str) -> ProblemInput:
    """CSV ``x1,...,xd,value[,weight]``: coordinates first, then value and optional weight."""
    header, body = _rows(text)
    if "value" not in header:
        raise ValueError("points CSV needs a 'value' column")
    k = header.index("value")
    if k == 0 or header[k + 1:] not in ([], ["weight"]):
        raise ValueError("points CSV layout is x1,...,xd,value[,weight]")
    arr = np.array(body)
    w = arr[:, k + 1] if arr.shape[1] == k + 2 else None
    return ProblemInput("points", WeightedFunction.from_values(arr[:, k], w), points=arr[:, :k])


def parse_dag_json(text: str) -> ProblemInput:
    """JSON ``{"nodes": [{"id", "value", "weight"?}], "edges": [[u, v], ...]}`` with ``u`` below ``v``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or "nodes" not in doc:
        raise ValueError("dag document needs a 'nodes' list")
    nodes = doc["nodes"]
    if not isinstance(nodes, list) or not nodes:
        raise ValueError("'nodes' must be a nonempty list")
    ids, values, weights = [], [], []
    for k, node in enumerate(nodes):
        if not isinstance(node, dict) or "id" not in node or "value" not in node:
            raise ValueError(f"node {k} needs 'id' and 'value'")
        ids.append(node["id"])
        values.append(float(node["value"]))
        weights.append(float(node.get("weight", 1.0)))
    index = {i: k for k, i in enumerate(ids)}
    if len(index) != len(ids):
        raise ValueError("node ids must be unique")
    edges = []
    for e in doc.get("edges", []):
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise ValueError(f"edge {e!r} is not a pair")
        try:
            edges.append((index[e[0]], index[e[1]]))
        except KeyError as exc:
            raise ValueError(f"edge refers to unknown node {exc.args[0]!r}") from None
    edges_arr = np.array(edges, dtype=np.intp).reshape(-1, 2)
    build_dag(len(ids), edges_arr)  # validate early: cycles, self-loops
    return ProblemInput("dag", WeightedFunction.from_values(values, weights), edges=edges_arr, ids=ids)


def load_problem(path: str, order: str | None = None) -> ProblemInput:
    """Read a problem file; ``order`` defaults to ``dag`` for ``.json`` files and ``linear`` otherwise."""
    text = _read_text(path)
    if order is None:
        order = "dag" if str(path).endswith(".json") else "linear"
    if order == "linear":
        return parse_linear_csv(text)
    if order == "dag":
        return parse_dag_json(text)
    if order == "points":
        return parse_points_csv(text)
    raise ValueError(f"unknown order {order!r}")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def sig(x: float, digits: int = SIG_DIGITS):
    """Round to ``digits`` significant digits; infinities become strings so the output stays valid JSON."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return float(f"{x:.{digits}g}")


def rounded(obj):
    """Apply :func:`sig` to every float inside nested lists, tuples and dicts."""
    if isinstance(obj, dict):
        return {k: rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [rounded(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return sig(obj)
    return obj


def dump(doc: dict) -> str:
    return json.dumps(rounded(doc), indent=2, allow_nan=False) + "\n"
