"""JSON documents for matrices, hypergyroplanes and fitted models.

A matrix document looks like::

    {"kind": "spd", "n": 2, "data": [[2.0, 0.5], [0.5, 1.0]]}

``kind`` is one of ``sym``, ``spd``, ``onb``, ``projector`` or ``tangent``.
Frames (``onb``) carry ``p`` as well, and ``data`` is then ``n x p``. A
``tangent`` with ``p`` is a Grassmann tangent at the base and must have the
off-diagonal block structure. Numbers are written with Python's shortest
round-trip representation, so storing and loading gives bitwise-equal values.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from gyromat import grassmann as gr
from gyromat import kgc
from gyromat import matker as mk
from gyromat.errors import GyroError, KindViolation, ParseError
from gyromat.mlr import Hypergyroplane, MlrModel

KINDS = ("sym", "spd", "onb", "projector", "tangent")


@dataclass(frozen=True)
class MatrixDocument:
    kind: str
    data: np.ndarray
    p: int = None

    @property
    def n(self):
        return self.data.shape[0]

    def to_dict(self):
        d = {"kind": self.kind, "n": self.n, "data": self.data.tolist()}
        if self.p is not None:
            d["p"] = self.p
        return d


def _reject_constant(name):
    raise ParseError(f"non-finite number {name} in document")


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh, parse_constant=_reject_constant)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(obj, path=None):
    """Serialize ``obj`` deterministically; return the text when ``path`` is empty."""
    text = dumps(obj)
    if path in (None, "-"):
        return text
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return None


def _array(rows, what="data"):
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ParseError(f"{what} must be a non-empty list of rows")
    width = len(rows[0])
    if width == 0 or any(len(r) != width for r in rows):
        raise ParseError(f"{what} rows are empty or ragged")
    for r in rows:
        for x in r:
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ParseError(f"{what} contains a non-numeric entry {x!r}")
    A = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(A)):
        raise ParseError(f"{what} contains non-finite numbers")
    return A


def _int_field(d, key, required):
    v = d.get(key)
    if v is None:
        if required:
            raise ParseError(f"missing field {key!r}")
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        raise ParseError(f"field {key!r} must be an integer")
    return v


def validate_kind(kind, A, p=None):
    """Check ``A`` against the invariants of ``kind``; raises :class:`KindViolation`."""
    if kind not in KINDS:
        raise ParseError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    try:
        if kind == "onb":
            if p is None or A.shape[1] != p:
                raise KindViolation(f"frame needs p matching its {A.shape[1]} columns")
            gr.check_onb(A)
            return
        if A.shape[0] != A.shape[1]:
            raise KindViolation(f"{kind} matrix must be square, got {A.shape}")
        if kind == "sym":
            mk.check_symmetric(A)
        elif kind == "spd":
            mk.check_spd(A)
        elif kind == "projector":
            gr.check_projector(A, p)
        elif kind == "tangent":
            mk.check_symmetric(A)
            if p is not None:
                gr.block_of(A, p)
    except KindViolation:
        raise
    except GyroError as exc:
        raise KindViolation(f"{kind}: {type(exc).__name__}: {exc}") from None


def matrix_from_dict(d, expect=None):
    if not isinstance(d, dict):
        raise ParseError("matrix document must be a JSON object")
    kind = d.get("kind")
    if not isinstance(kind, str):
        raise ParseError("missing field 'kind'")
    if expect is not None and kind not in expect:
        raise KindViolation(f"expected a {' or '.join(expect)} document, got {kind!r}")
    A = _array(d.get("data"))
    n = _int_field(d, "n", required=True)
    p = _int_field(d, "p", required=kind == "onb")
    if A.shape[0] != n:
        raise KindViolation(f"declared n = {n} but data has {A.shape[0]} rows")
    validate_kind(kind, A, p)
    if kind == "projector" and p is None:
        p = gr.check_projector(A)[1]
    return MatrixDocument(kind, A, p)


def load_matrix(path, expect=None):
    """Read and validate a matrix document; ``expect`` restricts the allowed kinds."""
    return matrix_from_dict(_read_json(path), expect)


def store_matrix(doc, path=None):
    """Write ``doc`` to ``path``; with no path (or ``-``) return the text instead."""
    validate_kind(doc.kind, doc.data, doc.p)
    return write_json(doc.to_dict(), path)


def matrix_document(kind, A, p=None):
    """Build a validated document from an array."""
    A = np.array(A, dtype=np.float64)
    if A.ndim != 2:
        raise KindViolation("matrix documents hold 2-D arrays")
    validate_kind(kind, A, p)
    return MatrixDocument(kind, A, p)


# -- planes and SPD block lists -------------------------------------------------


def _plane_from_dict(d, metric):
    if not isinstance(d, dict):
        raise ParseError("plane block must be an object with 'P' and 'W'")
    P = _array(d.get("P"), "P")
    W = _array(d.get("W"), "W")
    validate_kind("spd", P)
    validate_kind("sym", W)
    return Hypergyroplane(metric, P, W)


def _plane_to_dict(H):
    return {"P": H.P.tolist(), "W": H.W.tolist()}


def load_planes(path):
    """Plane document: ``{"kind": "plane", "metric": m, "blocks": [{"P": .., "W": ..}, ..]}``.

    A single-block plane may give ``P`` and ``W`` at top level instead of ``blocks``.
    Returns ``(metric, [Hypergyroplane, ...])``.
    """
    d = _read_json(path)
    if not isinstance(d, dict) or d.get("kind") != "plane":
        raise KindViolation("expected a plane document")
    metric = d.get("metric")
    blocks = d.get("blocks", [{"P": d.get("P"), "W": d.get("W")}])
    if not isinstance(blocks, list) or not blocks:
        raise ParseError("'blocks' must be a non-empty list")
    return metric, [_plane_from_dict(b, metric) for b in blocks]


def plane_document(metric, planes):
    return {"kind": "plane", "metric": str(getattr(metric, "value", metric)), "blocks": [_plane_to_dict(H) for H in planes]}


def load_spd_blocks(path):
    """A single ``spd`` matrix document, or ``{"kind": "spd_blocks", "blocks": [rows, ...]}``."""
    d = _read_json(path)
    if isinstance(d, dict) and d.get("kind") == "spd_blocks":
        blocks = d.get("blocks")
        if not isinstance(blocks, list) or not blocks:
            raise ParseError("'blocks' must be a non-empty list")
        out = []
        for i, rows in enumerate(blocks):
            A = _array(rows, f"block {i}")
            validate_kind("spd", A)
            out.append(A)
        return out
    return [matrix_from_dict(d, expect=("spd",)).data]


# -- models ----------------------------------------------------------------------


def mlr_model_to_dict(model):
    return {
        "kind": "mlr_model",
        "metric": model.metric.value,
        "K": model.K,
        "N": model.blocks,
        "classes": [[_plane_to_dict(H) for H in c] for c in model.classes],
    }


def mlr_model_from_dict(d):
    if not isinstance(d, dict) or d.get("kind") != "mlr_model":
        raise KindViolation("expected an mlr_model document")
    metric = d.get("metric")
    classes = d.get("classes")
    if not isinstance(classes, list):
        raise ParseError("'classes' must be a list")
    model = MlrModel(metric, tuple(tuple(_plane_from_dict(b, metric) for b in c) for c in classes))
    for key, actual in (("K", model.K), ("N", model.blocks)):
        declared = _int_field(d, key, required=False)
        if declared is not None and declared != actual:
            raise KindViolation(f"declared {key} = {declared} but found {actual}")
    return model


def load_mlr_model(path):
    return mlr_model_from_dict(_read_json(path))


def kgc_model_to_dict(model):
    return {
        "kind": "kgc_model",
        "n": model.n,
        "p": model.p,
        "entities": {k: {"B": np.asarray(e.B).tolist(), "bias": float(e.bias)} for k, e in model.entities.items()},
        "relations": {
            k: {"A": np.asarray(r.A).tolist(), "B_R": np.asarray(r.B_R).tolist()}
            for k, r in model.relations.items()
        },
    }


def _bias(v, name):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ParseError(f"entity {name!r} bias must be a finite number")
    return float(v)


def kgc_model_from_dict(d):
    if not isinstance(d, dict) or d.get("kind") != "kgc_model":
        raise KindViolation("expected a kgc_model document")
    n = _int_field(d, "n", required=True)
    p = _int_field(d, "p", required=True)
    ents = d.get("entities")
    rels = d.get("relations")
    if not isinstance(ents, dict) or not isinstance(rels, dict):
        raise ParseError("'entities' and 'relations' must be objects")
    for k, v in list(ents.items()) + list(rels.items()):
        if not isinstance(v, dict):
            raise ParseError(f"embedding {k!r} must be an object")
    entities = {
        k: kgc.EntityEmbedding(_array(v.get("B"), f"{k}.B"), _bias(v.get("bias", 0.0), k))
        for k, v in ents.items()
    }
    relations = {
        k: kgc.RelationEmbedding(_array(v.get("A"), f"{k}.A"), _array(v.get("B_R"), f"{k}.B_R"))
        for k, v in rels.items()
    }
    return kgc.KgcModel(n, p, entities, relations)


def load_kgc_model(path):
    return kgc_model_from_dict(_read_json(path))

