"""External-variable reformulation of ordered Boolean vectors.

An :class:`ExternalVarSpec` names an ordered list of Booleans of which exactly
one is True; its external variable is the 1-based position of that Boolean.
Only positions matter: labels attached to a spec are carried for reporting
and never influence the lattice.
"""
import math
from dataclasses import dataclass
from typing import Optional, Tuple

from . import logic
from .errors import DuplicateBoolean, MissingExactlyOne, OutOfBounds


@dataclass(frozen=True)
class ExternalVarSpec:
    index: int
    booleans: Tuple[logic.BoolRef, ...]
    labels: Optional[Tuple[object, ...]] = None
    name: Optional[str] = None

    @property
    def size(self):
        return len(self.booleans)

    @property
    def bounds(self):
        return (1, len(self.booleans))

    def label_of(self, position):
        if self.labels is None:
            return position
        return self.labels[position - 1]


def _has_partition(m, indices):
    target = set(indices)
    for p in m.all_propositions():
        if (
            isinstance(p, logic.Exactly)
            and p.m == 1
            and all(isinstance(a, logic.BoolRef) for a in p.args)
            and {a.index for a in p.args} == target
        ):
            return True
    return False


def declare_external(m, booleans, index=0, labels=None, name=None):
    """Declare an external variable over ``booleans`` (in their given order).

    Raises
    ------
    DuplicateBoolean
        If a Boolean appears twice.
    MissingExactlyOne
        If the model has no ``Exactly(1, ...)`` over exactly this set.
    """
    booleans = tuple(booleans)
    if not booleans:
        raise ValueError("an external variable needs at least one Boolean")
    indices = [b.index for b in booleans]
    if len(set(indices)) != len(indices):
        raise DuplicateBoolean(f"repeated Booleans in {booleans!r}")
    if labels is not None and len(labels) != len(booleans):
        raise ValueError("labels must match the Boolean list length")
    if not _has_partition(m, indices):
        raise MissingExactlyOne(f"no Exactly(1, ...) proposition covers {booleans!r}")
    return ExternalVarSpec(index, booleans, None if labels is None else tuple(labels), name)


def auto_detect(m):
    """One spec per disjunction, ordered by disjunct position."""
    return [
        ExternalVarSpec(j, tuple(dj.indicators), None, dj.name)
        for j, dj in enumerate(m.disjunctions)
    ]


def lattice_shape(specs):
    return tuple(s.size for s in specs)


def lattice_size(specs):
    return math.prod(lattice_shape(specs))


def in_box(specs, z):
    return len(z) == len(specs) and all(1 <= zj <= s.size for s, zj in zip(specs, z))


def fix_booleans(specs, z):
    """Map a lattice point to ``{boolean index: value}`` for every spec Boolean."""
    if len(z) != len(specs):
        raise OutOfBounds(f"point {tuple(z)} has {len(z)} components, expected {len(specs)}")
    fixed = {}
    for s, zj in zip(specs, z):
        if not 1 <= zj <= s.size:
            raise OutOfBounds(f"component {zj} outside [1, {s.size}] for external variable {s.index}")
        for pos, b in enumerate(s.booleans, start=1):
            fixed[b.index] = pos == zj
    return fixed


def point_from_assignment(specs, assignment):
    """Recover the lattice point from a Boolean assignment (inverse of :func:`fix_booleans`)."""
    z = []
    for s in specs:
        hits = [pos for pos, b in enumerate(s.booleans, start=1) if assignment[b.index]]
        if len(hits) != 1:
            raise ValueError(f"external variable {s.index} has {len(hits)} True positions")
        z.append(hits[0])
    return tuple(z)
