"""Parsing and printing of the structured document formats.

Value-ring elements render as ascending sums like ``1/6*X^4 + 2*X^5``
with an optional truncation suffix ``O(X^5)``; field elements render as
``1*t1^-3*t2^2 + 1*t1^1*t2^3`` with coefficients in 1..q-1.  Sets,
functions, and whole workspaces are JSON documents; the exact grammar is
documented in the README.  parse(print(x)) == x for every object here.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from typing import Any, Optional, Union

from .errors import InvalidSet, UnknownName
from .field import FieldElem, Level
from .field_integration import FDDSet, FIdealCoset, FSimpleFn
from .integration import SimpleFn
from .matrices import Coset, Mat2
from .sets import DDDSet, DDSet, validate_ddd
from .values import GlobalParams, ValueElem

# -- value-ring elements ---------------------------------------------------

_VALUE_TERM = re.compile(r"^(-?\d+(?:/\d+)?)(?:\*X(?:\^(-?\d+))?)?$")
_VALUE_BARE_X = re.compile(r"^X(?:\^(-?\d+))?$")
_VALUE_TRUNC = re.compile(r"^O\(X\^(-?\d+)\)$")


def render_value(v: ValueElem) -> str:
    return v.render()


def parse_value(text: str) -> ValueElem:
    text = text.strip()
    if text == "0":
        return ValueElem.zero()
    terms: dict[int, Fraction] = {}
    truncated_at: Optional[int] = None
    for token in text.split(" + "):
        token = token.strip()
        m = _VALUE_TRUNC.match(token)
        if m:
            truncated_at = int(m.group(1)) - 1
            continue
        m = _VALUE_TERM.match(token)
        if m:
            coeff = Fraction(m.group(1))
            exp = 0
            if token.endswith("X"):
                exp = 1
            elif m.group(2) is not None:
                exp = int(m.group(2))
            terms[exp] = terms.get(exp, Fraction(0)) + coeff
            continue
        m = _VALUE_BARE_X.match(token)
        if m:
            exp = int(m.group(1)) if m.group(1) is not None else 1
            terms[exp] = terms.get(exp, Fraction(0)) + 1
            continue
        raise ValueError(f"cannot parse value term {token!r}")
    return ValueElem(terms, truncated_at)


# -- field elements ----------------------------------------------------------

_FIELD_TERM = re.compile(r"^(\d+)\*t1\^(-?\d+)\*t2\^(-?\d+)$")


def render_field_elem(e: FieldElem) -> str:
    if not e.is_exact:
        raise ValueError("only exact field elements are serialisable")
    if not e.coeffs:
        return "0"
    parts = []
    for (a, b), c in sorted(e.coeffs.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        parts.append(f"{c}*t1^{a}*t2^{b}")
    return " + ".join(parts)


def parse_field_elem(text: str, q: int) -> FieldElem:
    text = text.strip()
    if text == "0":
        return FieldElem.zero(q)
    coeffs: dict[tuple[int, int], int] = {}
    for token in text.split(" + "):
        m = _FIELD_TERM.match(token.strip())
        if not m:
            raise ValueError(f"cannot parse field term {token!r}")
        c, a, b = int(m.group(1)), int(m.group(2)), int(m.group(3))
        key = (a, b)
        coeffs[key] = (coeffs.get(key, 0) + c) % q
    return FieldElem(q, coeffs)


# -- matrices, levels, cosets -------------------------------------------------


def matrix_to_json(m: Mat2) -> list[list[str]]:
    return [
        [render_field_elem(m.a), render_field_elem(m.b)],
        [render_field_elem(m.c), render_field_elem(m.d)],
    ]


def matrix_from_json(data: Any, q: int) -> Mat2:
    if (
        not isinstance(data, list)
        or len(data) != 2
        or any(not isinstance(row, list) or len(row) != 2 for row in data)
    ):
        raise ValueError(f"a matrix must be a 2x2 array of strings, got {data!r}")
    return Mat2(
        parse_field_elem(data[0][0], q),
        parse_field_elem(data[0][1], q),
        parse_field_elem(data[1][0], q),
        parse_field_elem(data[1][1], q),
    )


def level_from_json(data: Any) -> Level:
    if not isinstance(data, list) or len(data) != 2:
        raise ValueError(f"a level must be a pair [i, j], got {data!r}")
    return Level(int(data[0]), int(data[1]))


def coset_to_json(c: Coset) -> dict:
    return {"rep": matrix_to_json(c.rep), "level": [c.level.i, c.level.j]}


def coset_from_json(data: Any, q: int) -> Coset:
    return Coset(matrix_from_json(data["rep"], q), level_from_json(data["level"]))


# -- sets ---------------------------------------------------------------------


def component_to_json(comp: DDSet) -> dict:
    return {
        "big": [coset_to_json(b) for b in comp.bigs],
        "small": [coset_to_json(s) for s in comp.smalls],
    }


def component_from_json(data: Any, q: int) -> DDSet:
    return DDSet(
        tuple(coset_from_json(b, q) for b in data.get("big", ())),
        tuple(coset_from_json(s, q) for s in data.get("small", ())),
    )


def ddd_to_json(a: DDDSet) -> list:
    return [component_to_json(c) for c in a.components]


def ddd_from_json(data: Any, q: int) -> DDDSet:
    if not isinstance(data, list):
        raise ValueError("a set must be a list of components")
    return DDDSet(tuple(component_from_json(comp, q) for comp in data))


def fcoset_to_json(c: FIdealCoset) -> dict:
    return {"center": render_field_elem(c.center), "level": [c.level.i, c.level.j]}


def fcoset_from_json(data: Any, q: int) -> FIdealCoset:
    return FIdealCoset(parse_field_elem(data["center"], q), level_from_json(data["level"]))


def fcomponent_to_json(comp: FDDSet) -> dict:
    return {
        "big": [fcoset_to_json(b) for b in comp.bigs],
        "small": [fcoset_to_json(s) for s in comp.smalls],
    }


def fcomponent_from_json(data: Any, q: int) -> FDDSet:
    return FDDSet(
        tuple(fcoset_from_json(b, q) for b in data.get("big", ())),
        tuple(fcoset_from_json(s, q) for s in data.get("small", ())),
    )


# -- functions ------------------------------------------------------------------


def simple_fn_to_json(f: SimpleFn) -> dict:
    doc: dict[str, Any] = {
        "terms": [
            {"coeff": render_value(c), "support": component_to_json(s)}
            for c, s in f.terms
        ]
    }
    if f.exceptional:
        doc["exceptional"] = [matrix_to_json(m) for m in f.exceptional]
    return doc


def simple_fn_from_json(data: Any, q: int) -> SimpleFn:
    terms = tuple(
        (parse_value(t["coeff"]), component_from_json(t["support"], q))
        for t in data.get("terms", ())
    )
    exceptional = tuple(matrix_from_json(m, q) for m in data.get("exceptional", ()))
    return SimpleFn(terms, exceptional)


def fsimple_fn_to_json(f: FSimpleFn) -> dict:
    return {
        "terms": [
            {"coeff": render_value(c), "support": fcomponent_to_json(s)}
            for c, s in f.terms
        ]
    }


def fsimple_fn_from_json(data: Any, q: int) -> FSimpleFn:
    return FSimpleFn(
        tuple(
            (parse_value(t["coeff"]), fcomponent_from_json(t["support"], q))
            for t in data.get("terms", ())
        )
    )


# -- workspace -------------------------------------------------------------------


@dataclass
class Workspace:
    """Named sets and functions, all validated on load."""

    params: GlobalParams
    sets: dict[str, DDDSet] = dataclass_field(default_factory=dict)
    fsets: dict[str, FDDSet] = dataclass_field(default_factory=dict)
    functions: dict[str, SimpleFn] = dataclass_field(default_factory=dict)
    ffunctions: dict[str, FSimpleFn] = dataclass_field(default_factory=dict)

    def lookup_set(self, name: str) -> DDDSet:
        if name in self.sets:
            return self.sets[name]
        builtin = builtin_set(name, self.params)
        if builtin is not None:
            return builtin
        raise UnknownName(f"no set named {name!r}")


_BUILTIN_COMPACT = re.compile(r"^K(\d)(\d)$")
_BUILTIN_PAIR = re.compile(r"^K(-?\d+),(-?\d+)$")


def builtin_set(name: str, params: GlobalParams) -> Optional[DDDSet]:
    """Built-in names: K (the full group) and Kij / Ki,j for K_{i,j}."""
    from .sets import full_K

    if name == "K":
        return full_K(params.q, budget=params.coset_budget)
    m = _BUILTIN_PAIR.match(name) or _BUILTIN_COMPACT.match(name)
    if m:
        level = Level(int(m.group(1)), int(m.group(2)))
        return DDDSet.single(Coset(Mat2.identity(params.q), level))
    return None


def workspace_from_json(data: Union[str, dict], params: Optional[GlobalParams] = None) -> Workspace:
    if isinstance(data, str):
        data = json.loads(data)
    if not isinstance(data, dict):
        raise ValueError("a workspace document must be a JSON object")
    q = int(data.get("q", params.q if params else 2))
    if params is None or params.q != q:
        base = params or GlobalParams()
        params = GlobalParams(
            q=q,
            t1_window=base.t1_window,
            t2_window=base.t2_window,
            x_trunc=base.x_trunc,
            coset_budget=base.coset_budget,
        )
    ws = Workspace(params=params)
    for name, doc in (data.get("sets") or {}).items():
        dset = ddd_from_json(doc, q)
        validate_ddd(dset, budget=params.coset_budget)
        ws.sets[name] = dset
    for name, doc in (data.get("fsets") or {}).items():
        ws.fsets[name] = fcomponent_from_json(doc, q)
    for name, doc in (data.get("functions") or {}).items():
        fn = simple_fn_from_json(doc, q)
        _validate_simple_fn(fn, params.coset_budget)
        ws.functions[name] = fn
    for name, doc in (data.get("ffunctions") or {}).items():
        ws.ffunctions[name] = fsimple_fn_from_json(doc, q)
    return ws


def workspace_to_json(ws: Workspace) -> dict:
    doc: dict[str, Any] = {"q": ws.params.q}
    if ws.sets:
        doc["sets"] = {name: ddd_to_json(s) for name, s in ws.sets.items()}
    if ws.fsets:
        doc["fsets"] = {name: fcomponent_to_json(s) for name, s in ws.fsets.items()}
    if ws.functions:
        doc["functions"] = {name: simple_fn_to_json(f) for name, f in ws.functions.items()}
    if ws.ffunctions:
        doc["ffunctions"] = {
            name: fsimple_fn_to_json(f) for name, f in ws.ffunctions.items()
        }
    return doc


def _validate_simple_fn(fn: SimpleFn, budget: int) -> None:
    from .sets import dd_intersect, _component_witness

    supports = [s for _, s in fn.terms]
    for i in range(len(supports)):
        for k in range(i + 1, len(supports)):
            inter = dd_intersect(supports[i], supports[k])
            if inter.bigs and _component_witness(inter, budget=budget) is not None:
                raise InvalidSet(f"supports of terms {i} and {k} overlap")
