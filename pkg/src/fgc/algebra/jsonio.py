"""Series <-> JSON in the interchange schema.

    {"ring": {"base": "Q", "gens": [["m1", 2]]},
     "vars": ["x", "y"], "trunc": 8,
     "tate": {"low": -1, "high": 6},            # Tate series only
     "terms": [{"t": -1, "mono": [1, 0], "coeff": "-2*m1"}]}

Terms are sorted by (t-exponent, graded-lex monomial) so equal series
always serialize to identical text.
"""
from __future__ import annotations

import json

from ..errors import ParseError
from .rings import GradedRing, RingElement, TateRing
from .series import TateSeries, TruncSeries


def ring_to_json(ring):
    base = ring.base if isinstance(ring, TateRing) else ring
    return {"base": base.base, "gens": [[n, d] for n, d in base.gens]}


def ring_from_json(obj):
    try:
        return GradedRing(obj.get("base", "Q"), tuple((n, d) for n, d in obj.get("gens", [])))
    except (TypeError, ValueError, AttributeError) as exc:
        raise ParseError(f"bad ring description: {exc}") from None


def series_to_json(f):
    out = {"ring": ring_to_json(f.ring), "vars": list(f.vars), "trunc": f.order}
    if any(w != 1 for w in f.weights):
        out["weights"] = list(f.weights)
    shown = f.sorted_terms()
    if f.is_tate:
        shown, top, exact = f.window_terms()
        low = min([0] + [te for te, _, _ in shown])
        out["tate"] = {"low": low, "high": top}
        if exact:
            out["tate"]["exact"] = True
        if f.ring.t != "t":
            out["tate"]["var"] = f.ring.t
    terms = []
    for te, mono, coeff in shown:
        item = {}
        if te is not None:
            item["t"] = te
        item["mono"] = list(mono)
        item["coeff"] = str(coeff)
        terms.append(item)
    out["terms"] = terms
    return out


def series_from_json(obj, tate_ring=None):
    """Rebuild a series; ``tate_ring`` overrides the window stored in the file."""
    if not isinstance(obj, dict):
        raise ParseError("series JSON must be an object")
    try:
        base = ring_from_json(obj.get("ring", {}))
        vars = tuple(obj["vars"])
        order = int(obj["trunc"])
        weights = obj.get("weights")
        terms = obj.get("terms", [])
        tate = obj.get("tate")
        if tate is None:
            coeffs = {}
            for item in terms:
                if item.get("t", 0) != 0:
                    raise ParseError("t-exponent in a series without a tate window")
                mono = tuple(item["mono"])
                c = base.parse(str(item["coeff"]))
                coeffs[mono] = coeffs.get(mono, base.zero()) + c
            return TruncSeries(base, vars, order, coeffs, weights)
        ring = tate_ring or TateRing(base, min(0, int(tate["low"])), max(0, int(tate["high"])), tate.get("var", "t"))
        coeffs = {}
        for item in terms:
            key = (int(item.get("t", 0)), tuple(item["mono"]))
            c = base.parse(str(item["coeff"]))
            coeffs[key] = coeffs.get(key, base.zero()) + c
        # the file only promises t^e for e <= high at every x-degree
        high = None if tate.get("exact") else int(tate["high"])
        if weights is not None and any(w != 1 for w in weights):
            raise ParseError("weighted variables are not supported for Tate series")
        return TateSeries(ring, vars, order, coeffs, high)
    except KeyError as exc:
        raise ParseError(f"series JSON missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"bad series JSON: {exc}") from None


def dumps(obj):
    """Canonical text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, separators=(",", ": "), indent=2) + "\n"


def load_series(path, tate_ring=None):
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON ({exc.msg})", position=exc.pos) from None
    return series_from_json(obj, tate_ring)


def element_to_json(a: RingElement):
    return {"ring": ring_to_json(a.ring), "value": str(a)}
