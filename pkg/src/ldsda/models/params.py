"""Reader for ``key = value`` parameter files.

Blank lines and ``#`` comments are ignored; keys may be dotted
(``demand.A = 200000``). Values stay strings until a builder's
``from_mapping`` converts them.
"""
from ..errors import InvalidParams


def parse_params_text(text, source="<string>"):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParams(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise InvalidParams(f"{source}:{lineno}: empty key")
        if key in values:
            raise InvalidParams(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def read_params(path):
    with open(path, encoding="utf-8") as fh:
        return parse_params_text(fh.read(), str(path))


def get_float(values, key, default=None):
    if key not in values:
        if default is None:
            raise InvalidParams(f"missing parameter {key!r}")
        return float(default)
    try:
        return float(values[key])
    except ValueError:
        raise InvalidParams(f"parameter {key!r} is not a number: {values[key]!r}") from None


def get_int(values, key, default=None):
    v = get_float(values, key, default)
    if v != int(v):
        raise InvalidParams(f"parameter {key!r} must be an integer, got {values[key]!r}")
    return int(v)


def get_list(values, key, default=None):
    if key not in values:
        if default is None:
            raise InvalidParams(f"missing parameter {key!r}")
        return list(default)
    items = [t.strip() for t in values[key].split(",")]
    if not all(items):
        raise InvalidParams(f"parameter {key!r} has an empty list entry")
    return items


def check_known(values, allowed_prefixes, allowed_keys):
    for key in values:
        if key in allowed_keys:
            continue
        if any(key.startswith(p + ".") for p in allowed_prefixes):
            continue
        raise InvalidParams(f"unknown parameter {key!r}")
