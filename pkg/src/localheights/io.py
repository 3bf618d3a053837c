"""JSON documents for instances, building queries and results.

Rationals travel as strings ("3/4"), complex numbers as {"re": .., "im": ..}.
Matrices are lists of rows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import jsonschema
import numpy as np

from .building import Lattice, Subspace
from .exact import RationalMatrix, ValuationContext


class SchemaError(ValueError):
    pass


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("localheights").joinpath("schema", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(doc: dict, name: str) -> None:
    try:
        jsonschema.validate(doc, load_schema(name))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{path}: {exc.message}") from None


def complex_to_json(M: np.ndarray) -> list[list[dict]]:
    return [[{"re": float(z.real), "im": float(z.imag)} for z in row] for row in np.asarray(M, dtype=complex)]


def complex_from_json(rows) -> np.ndarray:
    return np.array([[complex(z["re"], z["im"]) for z in row] for row in rows], dtype=complex)


def _ratmatrix(rows) -> RationalMatrix:
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise SchemaError("ragged matrix")
    try:
        return RationalMatrix.from_strings(rows)
    except ZeroDivisionError:
        raise SchemaError("rational entry with zero denominator") from None


@dataclass
class InstanceDocument:
    n: int
    place: str
    A: object
    B: object
    C: object
    D: object
    prime: int | None = None
    L_A: object = None
    L_B: object = None
    h_A: object = None
    h_B: object = None
    h0: object = None
    seed: int | None = None

    @property
    def finite(self) -> bool:
        return self.place == "finite"

    @classmethod
    def from_json(cls, doc: dict) -> "InstanceDocument":
        validate(doc, "instance")
        finite = doc["place"] == "finite"
        conv = _ratmatrix if finite else complex_from_json
        kw = {k: conv(doc[k]) for k in ("A", "B", "C", "D")}
        for k in ("L_A", "L_B"):
            if k in doc:
                kw[k] = _ratmatrix(doc[k])
        for k in ("h_A", "h_B", "h0"):
            if k in doc:
                kw[k] = complex_from_json(doc[k])
        out = cls(n=doc["n"], place=doc["place"], prime=doc.get("prime"), seed=doc.get("seed"), **kw)
        out.check_shapes()
        return out

    def check_shapes(self) -> None:
        shape = (lambda M: M.shape) if self.finite else (lambda M: np.shape(M))
        sA, sB, sC, sD = (shape(getattr(self, k)) for k in "ABCD")
        p, q = sA[1], sC[1]
        if any(s[0] != self.n for s in (sA, sB, sC, sD)):
            raise SchemaError("basis matrices must have n rows")
        if sB[1] != p or sD[1] != q or p + q != self.n:
            raise SchemaError("need A, B of shape n x p and C, D of shape n x q with p + q = n")
        for k, d in (("L_A", p), ("L_B", p)):
            M = getattr(self, k)
            if M is not None and M.shape != (self.n, d):
                raise SchemaError(f"{k} must be n x p")
        for k, d in (("h_A", p), ("h_B", p)):
            M = getattr(self, k)
            if M is not None and np.shape(M) != (d, d):
                raise SchemaError(f"{k} must be p x p")

    def to_json(self) -> dict:
        doc = {"n": self.n, "place": self.place}
        if self.finite:
            doc["prime"] = self.prime
            for k in ("A", "B", "C", "D", "L_A", "L_B"):
                M = getattr(self, k)
                if M is not None:
                    doc[k] = M.to_strings()
        else:
            for k in ("A", "B", "C", "D", "h_A", "h_B", "h0"):
                M = getattr(self, k)
                if M is not None:
                    doc[k] = complex_to_json(M)
        if self.seed is not None:
            doc["seed"] = self.seed
        return doc

    def nonarch(self):
        from .nonarch import CycleQuadruple

        ctx = ValuationContext(self.prime)
        quad = CycleQuadruple(*(Subspace(getattr(self, k)) for k in "ABCD"), ctx)
        L_A = Lattice(self.L_A, ctx) if self.L_A is not None else None
        L_B = Lattice(self.L_B, ctx) if self.L_B is not None else None
        return quad, L_A, L_B

    def arch(self):
        from .arch import ArchQuadruple, MetricClass
        from .symspace import ComplexSubspace

        A, B, C, D = (ComplexSubspace(getattr(self, k)) for k in "ABCD")
        hA = MetricClass(A, self.h_A) if self.h_A is not None else None
        hB = MetricClass(B, self.h_B) if self.h_B is not None else None
        return ArchQuadruple(A, B, C, D, hA, hB, self.h0)

    @classmethod
    def from_nonarch(cls, quad, L_A=None, L_B=None, seed=None) -> "InstanceDocument":
        return cls(
            n=quad.n,
            place="finite",
            prime=quad.ctx.prime,
            A=quad.A.basis,
            B=quad.B.basis,
            C=quad.C.basis,
            D=quad.D.basis,
            L_A=L_A.basis if L_A is not None else None,
            L_B=L_B.basis if L_B is not None else None,
            seed=seed,
        )

    @classmethod
    def from_arch(cls, quad, seed=None) -> "InstanceDocument":
        return cls(
            n=quad.n,
            place="archimedean",
            A=quad.A.basis,
            B=quad.B.basis,
            C=quad.C.basis,
            D=quad.D.basis,
            h_A=quad.h_A.gram if quad.h_A is not None else None,
            h_B=quad.h_B.gram if quad.h_B is not None else None,
            h0=quad.h0_gram,
            seed=seed,
        )


def parse_instance(text: str) -> InstanceDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    return InstanceDocument.from_json(doc)


def serialize_instance(doc: InstanceDocument) -> str:
    return dumps(doc.to_json())


def parse_building_query(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    validate(doc, "building")
    out = {"ctx": ValuationContext(doc["prime"])}
    for k in ("x", "y", "W", "W1", "W2"):
        if k in doc:
            out[k] = _ratmatrix(doc[k])
    for k in ("k_max", "m"):
        if k in doc:
            out[k] = doc[k]
    return out


def dumps(obj, pretty: bool = False) -> str:
    if pretty:
        return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False)
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
