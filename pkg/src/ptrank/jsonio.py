"""JSON containers for every object type.

Each object is a self-describing dict with a ``"type"`` tag and an embedded field
descriptor.  Entries are ints for prime fields, ``[re, im]`` pairs for complex
fields and ``"a/b"`` strings for rationals; tensor labels that are tuples are
written as lists.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np

from .abpformula import Leaf, OrderedABP, Plus, Times
from .fieldlinalg import ComplexField, CyclotomicField, Field, Matrix, PrimeField, RationalField
from .pathmeasures import PathGraph
from .ptcore import InvalidCertificate, PTCertificate, make_certificate
from .soslink import SoSCertificate
from .tensorspace import HyperMatrix, Tensor

__all__ = ["field_to_json", "field_from_json", "emit", "parse", "dump", "load", "dumps", "loads",
           "parse_field_spec"]


def field_to_json(field: Field) -> dict:
    if isinstance(field, CyclotomicField):
        return {"kind": "cycmod", "q": field.p, "n": field.n, "omega": int(field.omega)}
    if isinstance(field, PrimeField):
        return {"kind": "gfp", "p": field.p}
    if isinstance(field, ComplexField):
        return {"kind": "complex", "eps": field.eps}
    if isinstance(field, RationalField):
        return {"kind": "rational"}
    raise TypeError(f"unsupported field {field!r}")


def field_from_json(obj: dict) -> Field:
    kind = obj.get("kind")
    if kind == "gfp":
        return PrimeField(int(obj["p"]))
    if kind == "cycmod":
        return CyclotomicField(int(obj["q"]), int(obj["n"]), int(obj["omega"]))
    if kind == "complex":
        return ComplexField(float(obj.get("eps", 1e-9)))
    if kind == "rational":
        return RationalField()
    raise ValueError(f"unknown field kind {kind!r}")


def parse_field_spec(text: str) -> Field:
    """Command-line field names: gf2, gf3, gfp:7, complex, complex:1e-9, rational, cycmod:5."""
    t = text.lower()
    if t.startswith("gfp:"):
        return PrimeField(int(t[4:]))
    if t.startswith("gf"):
        return PrimeField(int(t[2:]))
    if t.startswith("complex"):
        return ComplexField(float(t.split(":")[1])) if ":" in t else ComplexField()
    if t in ("rational", "q"):
        return RationalField()
    if t.startswith("cycmod:"):
        parts = t.split(":")
        idx = int(parts[2]) if len(parts) > 2 else 0
        return CyclotomicField.for_order(int(parts[1]))[idx]
    raise ValueError(f"unknown field {text!r}")


def _enc_entries(data: np.ndarray, field: Field) -> list:
    flat = np.asarray(data).reshape(-1)
    if isinstance(field, ComplexField):
        return [[float(z.real), float(z.imag)] for z in flat]
    if isinstance(field, RationalField):
        return [f"{Fraction(x).numerator}/{Fraction(x).denominator}" for x in flat]
    return [int(x) for x in flat]


def _dec_entries(entries: list, field: Field, shape) -> np.ndarray:
    if isinstance(field, ComplexField):
        arr = np.array([complex(a, b) for a, b in entries], dtype=np.complex128)
    elif isinstance(field, RationalField):
        arr = field.elements(np.array([Fraction(e) for e in entries], dtype=object))
    else:
        arr = np.array(entries, dtype=np.int64)
    return field.elements(arr.reshape(shape))


def _enc_label(lab):
    return list(lab) if isinstance(lab, tuple) else lab


def _dec_label(lab):
    return tuple(lab) if isinstance(lab, list) else lab


def _jsonable(x):
    """Metadata values made JSON safe (tuples -> lists, numpy scalars -> Python)."""
    if isinstance(x, dict):
        return {str(k) if not isinstance(k, str) else k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _formula_to_json(f):
    if isinstance(f, Leaf):
        return {"leaf": [f.block, f.var, f.scalar]}
    tag = "plus" if isinstance(f, Plus) else "times"
    return {tag: [_formula_to_json(c) for c in f.children]}


def _formula_from_json(obj):
    if "leaf" in obj:
        b, v, s = obj["leaf"]
        return Leaf(int(b), int(v), int(s))
    if "plus" in obj:
        return Plus(tuple(_formula_from_json(c) for c in obj["plus"]))
    return Times(tuple(_formula_from_json(c) for c in obj["times"]))


def emit(x) -> dict:
    """Object -> JSON-compatible dict."""
    if isinstance(x, Matrix):
        return {"type": "matrix", "rows": x.rows, "cols": x.cols, "field": field_to_json(x.field),
                "entries": _enc_entries(x.data, x.field)}
    if isinstance(x, HyperMatrix):
        return {"type": "hypermatrix", "n": x.n, "d": x.d, "field": field_to_json(x.field),
                "entries": _enc_entries(x.data, x.field)}
    if isinstance(x, Tensor):
        return {"type": "tensor", "n": x.n, "labels": [_enc_label(lab) for lab in x.labels],
                "field": field_to_json(x.field), "entries": _enc_entries(x.data, x.field)}
    if isinstance(x, PTCertificate):
        return {"type": "pt-certificate", "target": emit(x.target),
                "parts": [{"kappa": list(k), "matrix": emit(N)} for k, N in sorted(x.parts.items())],
                "value": x.value, "metadata": _jsonable(x.metadata)}
    if isinstance(x, SoSCertificate):
        return {"type": "sos-certificate", "n": x.n, "d": x.d, "field": field_to_json(x.field),
                "terms": [_enc_entries(np.asarray(g), x.field) for g in x.terms],
                "metadata": _jsonable(x.metadata)}
    if isinstance(x, PathGraph):
        return {"type": "path-graph", "edges": list(x.edges)}
    if isinstance(x, OrderedABP):
        return {"type": "abp", "n": math.isqrt(x.m), "m": x.m, "d": x.depth, "widths": x.widths,
                "field": field_to_json(x.field),
                "layers": [_enc_entries(L, x.field) for L in x.layers],
                "v1": _enc_entries(x.v1, x.field), "v2": _enc_entries(x.v2, x.field)}
    if isinstance(x, (Leaf, Plus, Times)):
        return {"type": "formula", "root": _formula_to_json(x)}
    raise TypeError(f"cannot serialize {type(x).__name__}")


def parse(obj: dict):
    """JSON dict -> object (inverse of :func:`emit`)."""
    kind = obj.get("type")
    if kind == "matrix":
        field = field_from_json(obj["field"])
        return Matrix(_dec_entries(obj["entries"], field, (obj["rows"], obj["cols"])), field)
    if kind == "hypermatrix":
        field = field_from_json(obj["field"])
        size = obj["n"] ** obj["d"]
        return HyperMatrix.from_array(obj["n"], obj["d"], _dec_entries(obj["entries"], field, (size, size)),
                                      field)
    if kind == "tensor":
        field = field_from_json(obj["field"])
        labels = tuple(_dec_label(lab) for lab in obj["labels"])
        return Tensor(obj["n"], labels, _dec_entries(obj["entries"], field, (obj["n"],) * len(labels)), field)
    if kind == "pt-certificate":
        target = parse(obj["target"])
        parts = {tuple(p["kappa"]): parse(p["matrix"]) for p in obj["parts"]}
        cert = make_certificate(target, parts, obj.get("metadata") or {})
        if "value" in obj and cert.value != obj["value"]:
            raise InvalidCertificate(f"stored value {obj['value']} differs from recomputed {cert.value}")
        return cert
    if kind == "sos-certificate":
        field = field_from_json(obj["field"])
        shape = (obj["n"],) * obj["d"]
        terms = [_dec_entries(t, field, shape) for t in obj["terms"]]
        return SoSCertificate(obj["n"], obj["d"], field, terms, obj.get("metadata") or {})
    if kind == "path-graph":
        return PathGraph(obj["edges"])
    if kind == "abp":
        field = field_from_json(obj["field"])
        w, m = obj["widths"], obj["m"]
        layers = [_dec_entries(L, field, (w[i], w[i + 1], m)) for i, L in enumerate(obj["layers"])]
        return OrderedABP(m, layers, _dec_entries(obj["v1"], field, (w[0],)),
                          _dec_entries(obj["v2"], field, (w[-1],)), field)
    if kind == "formula":
        return _formula_from_json(obj["root"])
    raise ValueError(f"unknown object type {kind!r}")


def dumps(x) -> str:
    return json.dumps(emit(x), sort_keys=True)


def loads(text: str):
    return parse(json.loads(text))


def dump(x, path):
    with open(path, "w") as fh:
        json.dump(emit(x), fh, sort_keys=True, indent=1)


def load(path):
    with open(path) as fh:
        return parse(json.load(fh))
