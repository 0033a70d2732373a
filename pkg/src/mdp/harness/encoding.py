"""Canonical wire encoding.

Replica agreement is asserted on bytes, so the encoding must be a
function of the value: UTF-8 JSON with lexicographically sorted keys,
no insignificant whitespace, rationals rendered "num/den" in lowest
terms, tuples and lists both rendered as arrays. Floats are rejected
outright: nothing that touches money may ever round.
"""

from __future__ import annotations

import json
from fractions import Fraction

from ..errors import EncodingError
from ..mechlib.rational import encode_rational


def _canonize(value):
    if isinstance(value, Fraction):
        return encode_rational(value)
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        raise EncodingError("floats are not protocol values")
    if isinstance(value, str):
        return value
    if isinstance(value, bytes):
        raise EncodingError("raw bytes are not protocol values; encode explicitly")
    if isinstance(value, (list, tuple)):
        return [_canonize(v) for v in value]
    if isinstance(value, dict):
        out = {}
        for k, v in value.items():
            if not isinstance(k, str):
                raise EncodingError("protocol dict keys must be strings")
            out[k] = _canonize(v)
        return out
    to_wire = getattr(value, "to_wire", None)
    if callable(to_wire):
        return _canonize(to_wire())
    raise EncodingError("cannot canonically encode %r" % (value,))


def encode_canonical(value) -> bytes:
    return json.dumps(_canonize(value), sort_keys=True,
                      separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def decode_canonical(data: bytes):
    """Inverse of encode_canonical up to the JSON tree; rational fields are
    re-interpreted by each protocol type's from_wire."""
    try:
        return json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise EncodingError("not a canonical payload: %s" % exc) from exc
