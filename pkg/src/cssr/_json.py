"""JSON helpers shared by the machine and process-spec documents."""

from __future__ import annotations

import json
import re

from .errors import ParseError

_FLOAT_TAG = "\x00f17:"
_TAGGED = re.compile(r'"\\u0000f17:([^"]+)"')


class Float17(float):
    """A float that :func:`dumps` writes with 17 significant digits."""


def _tag(obj):
    if isinstance(obj, Float17):
        return _FLOAT_TAG + format(float(obj), ".17g")
    if isinstance(obj, dict):
        return {k: _tag(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_tag(v) for v in obj]
    return obj


def dumps(doc) -> str:
    text = json.dumps(_tag(doc), indent=2, ensure_ascii=True)
    return _TAGGED.sub(lambda m: m.group(1), text) + "\n"


def _no_duplicates(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise ParseError(f"duplicate key {key!r}")
        out[key] = value
    return out


def loads(text: str):
    try:
        return json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None


def require(obj, key, kind, where):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError("missing field", field=f"{where}.{key}" if where else key)
    value = obj[key]
    if kind is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif kind is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    else:
        ok = isinstance(value, kind)
    if not ok:
        raise ParseError(f"expected {getattr(kind, '__name__', kind)}", field=f"{where}.{key}" if where else key)
    return value
