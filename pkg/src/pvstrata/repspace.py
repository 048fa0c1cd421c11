"""The two representations, their coordinate numbering and weights.

Case 1 is GL3 x GL3 x GL2 acting on Aff3 (x) Aff3 (x) Aff2 with coordinates
x_{ijk}.  Case 2 is GL6 x GL2 acting on Wedge2(Aff6) (x) Aff2 with coordinates
x_{ab,k}, a < b.  Both weight spaces have dimension 8.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .exact import ShapeError, dot, q

STANDARD = "Standard"
WEDGE2 = "Wedge2"


@dataclass(frozen=True)
class GroupShape:
    factor_sizes: tuple[int, ...]

    @property
    def dimension(self) -> int:
        return sum(self.factor_sizes)

    def blocks(self) -> tuple[range, ...]:
        """Position ranges of each GL factor inside a weight vector."""
        out, start = [], 0
        for n in self.factor_sizes:
            out.append(range(start, start + n))
            start += n
        return tuple(out)


@dataclass(frozen=True)
class RepSpec:
    case_id: int
    shape: GroupShape
    factors: tuple[tuple[int, str], ...]

    @property
    def dim(self) -> int:
        return len(coordinates(self.case_id))


CASE1 = RepSpec(1, GroupShape((3, 3, 2)), ((1, STANDARD), (2, STANDARD), (3, STANDARD)))
CASE2 = RepSpec(2, GroupShape((6, 2)), ((1, WEDGE2), (2, STANDARD)))


def rep_spec(case_id: int) -> RepSpec:
    if case_id == 1:
        return CASE1
    if case_id == 2:
        return CASE2
    raise ValueError(f"unknown case {case_id!r}; only 1 and 2 exist")


@dataclass(frozen=True, order=True)
class Coord:
    """One coordinate: ``indices`` is (i, j, k) in Case 1 and (a, b, k) in Case 2."""

    case_id: int
    serial: int
    indices: tuple[int, ...]

    @property
    def label(self) -> str:
        return "".join(str(i) for i in self.indices)

    def content(self) -> dict[int, frozenset[int]]:
        """Indices carried by each GL factor (1-based factor numbers)."""
        if self.case_id == 1:
            return {f + 1: frozenset({i}) for f, i in enumerate(self.indices)}
        a, b, k = self.indices
        return {1: frozenset({a, b}), 2: frozenset({k})}

    def __repr__(self) -> str:
        return f"x{self.label}"


def _build(case_id: int) -> tuple[Coord, ...]:
    out = []
    if case_id == 1:
        for k in (1, 2):
            for i in (1, 2, 3):
                for j in (1, 2, 3):
                    out.append((i, j, k))
    else:
        for k in (1, 2):
            for a, b in combinations(range(1, 7), 2):
                out.append((a, b, k))
    return tuple(Coord(case_id, n + 1, t) for n, t in enumerate(out))


_COORDS = {1: _build(1), 2: _build(2)}
_BY_LABEL = {c: {x.label: x for x in _COORDS[c]} for c in (1, 2)}
_BY_CONTENT = {
    c: {tuple(sorted((f, s) for f, s in x.content().items())): x for x in _COORDS[c]} for c in (1, 2)
}


def coordinates(case_id: int) -> tuple[Coord, ...]:
    return _COORDS[rep_spec(case_id).case_id]


def enumerate_coordinates(spec: RepSpec) -> tuple[Coord, ...]:
    return coordinates(spec.case_id)


def coord(case_id: int, label: str | int) -> Coord:
    """Look up a coordinate by label ("231") or by serial number."""
    if isinstance(label, int):
        cs = coordinates(case_id)
        if not 1 <= label <= len(cs):
            raise KeyError(f"serial {label} out of range for case {case_id}")
        return cs[label - 1]
    try:
        return _BY_LABEL[case_id][label.lstrip("x")]
    except KeyError:
        raise KeyError(f"no coordinate {label!r} in case {case_id}") from None


def coord_from_content(case_id: int, content: Mapping[int, Iterable[int]]) -> Coord | None:
    """Coordinate with the given per-factor index sets, or None if invalid."""
    key = tuple(sorted((f, frozenset(s)) for f, s in content.items()))
    return _BY_CONTENT[case_id].get(key)


def raw_weight(c: Coord) -> tuple[int, ...]:
    """0/1 indicator of the indices each factor carries, length 8."""
    spec = rep_spec(c.case_id)
    w = [0] * spec.shape.dimension
    for f, idx in c.content().items():
        start = spec.shape.blocks()[f - 1].start
        for i in idx:
            w[start + i - 1] += 1
    return tuple(w)


def project_to_tstar(w: Sequence, shape: GroupShape) -> tuple[Fraction, ...]:
    """Subtract the mean of each factor block so every block sums to zero."""
    if len(w) != shape.dimension:
        raise ShapeError(f"weight of length {len(w)} for dimension {shape.dimension}")
    out = [q(x) for x in w]
    for blk in shape.blocks():
        mean = sum((out[i] for i in blk), Fraction(0)) / len(blk)
        for i in blk:
            out[i] -= mean
    return tuple(out)


def block_sums(w: Sequence, shape: GroupShape) -> tuple[Fraction, ...]:
    return tuple(sum((q(w[i]) for i in blk), Fraction(0)) for blk in shape.blocks())


def pairing(a: Sequence, b: Sequence) -> Fraction:
    """The inner product on weight vectors: the standard dot product."""
    return dot(a, b)


def _sigma_coord(c: Coord) -> Coord:
    i, j, k = c.indices
    return coord(1, f"{j}{i}{k}")


def sigma_swap(obj, case_id: int = 1):
    """Exchange the two GL3 factors of Case 1.

    Accepts a Coord, a length-8 weight vector, or a length-18 point vector.
    """
    if case_id != 1:
        raise ValueError("sigma is defined for Case 1 only")
    if isinstance(obj, Coord):
        if obj.case_id != 1:
            raise ValueError("sigma is defined for Case 1 only")
        return _sigma_coord(obj)
    seq = tuple(obj)
    if len(seq) == 8:
        return seq[3:6] + seq[0:3] + seq[6:8]
    if len(seq) == 18:
        out = [None] * 18
        for c in coordinates(1):
            out[_sigma_coord(c).serial - 1] = seq[c.serial - 1]
        return tuple(out)
    raise ValueError("sigma is defined for Case 1 only (weights of length 8, points of length 18)")


def point(case_id: int, values: Mapping[str, object] | None = None) -> tuple[Fraction, ...]:
    """Point of V from a sparse ``{label: value}`` mapping; unset entries are 0."""
    out = [Fraction(0)] * len(coordinates(case_id))
    for label, v in (values or {}).items():
        out[coord(case_id, label).serial - 1] = q(v)
    return tuple(out)


def support(case_id: int, x: Sequence) -> tuple[Coord, ...]:
    return tuple(c for c in coordinates(case_id) if x[c.serial - 1] != 0)
