"""Catalog of stratum labels and their independent re-derivation.

A label is a nonzero vector of t* (zero sum in every factor block, entries
non-decreasing inside each block).  The catalog is stored as a text table;
``enumerate_candidates`` recomputes the same set as minimum-norm points of
convex hulls of projected coordinate weights.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

from .exact import InconsistentSystemError, dot, matrix, q, solve_linear
from .repspace import RepSpec, block_sums, coordinates, project_to_tstar, raw_weight, rep_spec

NONEMPTY = "NonEmpty"
EMPTY = "Empty"
SINGLE_POINT = "SinglePoint"
EX2 = "Ex2"
NOT_APPLICABLE = "n/a"


class CatalogError(ValueError):
    """A catalog file is malformed; the message names the offending record."""


@dataclass(frozen=True)
class Beta:
    case_id: int
    index: int
    vector: tuple[Fraction, ...]

    def __post_init__(self):
        problem = beta_problem(self.case_id, self.vector)
        if problem:
            raise CatalogError(f"case {self.case_id} index {self.index}: {problem}")


def beta_problem(case_id: int, vec: Sequence[Fraction]) -> str | None:
    """Reason why ``vec`` is not a dominant nonzero t* vector, or None."""
    shape = rep_spec(case_id).shape
    if len(vec) != shape.dimension:
        return f"expected {shape.dimension} entries, got {len(vec)}"
    if any(s != 0 for s in block_sums(vec, shape)):
        return "block sums are not zero"
    for blk in shape.blocks():
        vals = [vec[i] for i in blk]
        if vals != sorted(vals):
            return "entries not non-decreasing within a block"
    if all(v == 0 for v in vec):
        return "vector is zero"
    return None


def dominant(vec: Sequence, case_id: int) -> tuple:
    """Sort entries non-decreasingly inside each factor block."""
    out = []
    for blk in rep_spec(case_id).shape.blocks():
        out.extend(sorted(vec[i] for i in blk))
    return tuple(out)


@dataclass(frozen=True)
class CatalogEntry:
    beta: Beta
    status: str
    orbit_set: str


@dataclass(frozen=True)
class BetaCatalog:
    case_id: int
    entries: tuple[CatalogEntry, ...]

    def __getitem__(self, index: int) -> CatalogEntry:
        for e in self.entries:
            if e.beta.index == index:
                return e
        raise KeyError(f"no index {index} in case {self.case_id}")

    def indices(self, status: str | None = None) -> tuple[int, ...]:
        return tuple(e.beta.index for e in self.entries if status is None or e.status == status)

    def vectors(self) -> set[tuple[Fraction, ...]]:
        return {e.beta.vector for e in self.entries}


def default_fixture_dir() -> Path:
    return Path(__file__).resolve().parent / "fixtures"


def resolve_fixture_dir(path: str | os.PathLike | None) -> Path:
    """``path`` if given and present, else the copy bundled with the package."""
    if path is not None and Path(path).is_dir():
        return Path(path)
    return default_fixture_dir()


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


CATALOG_HEADER = "# case index status orbit_set b1 b2 b3 b4 b5 b6 b7 b8"


def format_catalog(cat: BetaCatalog) -> str:
    lines = [CATALOG_HEADER]
    for e in cat.entries:
        fields = [str(cat.case_id), str(e.beta.index), e.status, e.orbit_set]
        fields += [_fmt(v) for v in e.beta.vector]
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def parse_catalog(text: str, case_id: int) -> BetaCatalog:
    entries = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split()
        label = f"line {lineno}" if len(parts) < 2 else f"index {parts[1]}"
        if len(parts) != 12:
            raise CatalogError(f"{label}: expected 12 fields, got {len(parts)}")
        try:
            case, index = int(parts[0]), int(parts[1])
            vec = tuple(Fraction(p) for p in parts[4:])
        except ValueError as exc:
            raise CatalogError(f"{label}: {exc}") from None
        if case != case_id:
            raise CatalogError(f"{label}: record for case {case} in a case {case_id} file")
        status, orbit = parts[2], parts[3]
        if status not in (NONEMPTY, EMPTY):
            raise CatalogError(f"{label}: unknown status {status!r}")
        if orbit not in (SINGLE_POINT, EX2, NOT_APPLICABLE):
            raise CatalogError(f"{label}: unknown orbit set {orbit!r}")
        if (status == EMPTY) != (orbit == NOT_APPLICABLE):
            raise CatalogError(f"{label}: orbit set {orbit} inconsistent with status {status}")
        entries.append(CatalogEntry(Beta(case, index, vec), status, orbit))
    expected = {1: 49, 2: 81}[case_id]
    if [e.beta.index for e in entries] != list(range(1, expected + 1)):
        raise CatalogError(f"case {case_id}: expected indices 1..{expected} in order")
    return BetaCatalog(case_id, tuple(entries))


def load_catalog(case_id: int, fixtures: str | os.PathLike | None = None) -> BetaCatalog:
    path = resolve_fixture_dir(fixtures) / f"catalog_case{case_id}.txt"
    return parse_catalog(path.read_text(), case_id)


# ---------------------------------------------------------------- hull geometry


def affine_min_norm(points: Sequence[Sequence[Fraction]]) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Projection of the origin onto the affine hull of ``points``.

    Returns (point, barycentric coefficients).  Coefficients are one
    solution of the bordered Gram system; the point itself is unique.
    """
    k = len(points)
    gram = [[dot(a, b) for b in points] + [Fraction(1)] for a in points]
    gram.append([Fraction(1)] * k + [Fraction(0)])
    rhs = [Fraction(0)] * k + [Fraction(1)]
    sol = solve_linear(matrix(gram), rhs).particular
    lam = sol[:k]
    dim = len(points[0])
    p = tuple(sum((lam[i] * points[i][d] for i in range(k)), Fraction(0)) for d in range(dim))
    return p, lam


def closest_point_convex_hull(points: Iterable[Sequence]) -> tuple[Fraction, ...]:
    """Exact minimum-norm point of the convex hull (Wolfe's algorithm).

    The result ``p`` is checked against the optimality condition
    ``<p, q> >= <p, p>`` for every input ``q`` before it is returned.
    """
    pts = [tuple(q(x) for x in p) for p in points]
    if not pts:
        raise ValueError("empty point set")
    if len({len(p) for p in pts}) != 1:
        raise ValueError("points of unequal dimension")
    pts = list(dict.fromkeys(pts))
    start = min(range(len(pts)), key=lambda i: dot(pts[i], pts[i]))
    active = [start]
    coef = [Fraction(1)]
    x = pts[start]
    while True:
        xx = dot(x, x)
        j = min(range(len(pts)), key=lambda i: dot(x, pts[i]))
        if xx == 0 or dot(x, pts[j]) >= xx or j in active:
            break
        active.append(j)
        coef.append(Fraction(0))
        while True:
            y, lam = affine_min_norm([pts[i] for i in active])
            if all(v > 0 for v in lam):
                x, coef = y, list(lam)
                break
            theta = min(c / (c - l) for c, l in zip(coef, lam) if l <= 0)
            coef = [(1 - theta) * c + theta * l for c, l in zip(coef, lam)]
            x = tuple(sum((c * pts[i][d] for c, i in zip(coef, active)), Fraction(0)) for d in range(len(x)))
            keep = [n for n, c in enumerate(coef) if c > 0]
            active = [active[n] for n in keep]
            coef = [coef[n] for n in keep]
    xx = dot(x, x)
    bad = [p for p in pts if dot(x, p) < xx]
    if bad:
        raise ArithmeticError(f"optimality check failed at {bad[0]}")
    return x


def projected_weights(case_id: int) -> list[tuple[Fraction, ...]]:
    shape = rep_spec(case_id).shape
    return [project_to_tstar(raw_weight(c), shape) for c in coordinates(case_id)]


def is_minimal_vector(beta: Sequence[Fraction], case_id: int) -> bool:
    """Is ``beta`` the minimum-norm point of the weights on its far side?"""
    bb = dot(beta, beta)
    side = [w for w in projected_weights(case_id) if dot(w, beta) >= bb]
    return bool(side) and closest_point_convex_hull(side) == tuple(beta)


def _screen(args):
    """Float screening of one chunk; returns {rounded key: (min coef, subset)}."""
    import numpy as np

    weights, blocks, subsets = args
    w = np.asarray(weights, dtype=float)
    sub = np.asarray(subsets, dtype=np.int64)
    n, k = sub.shape
    pts = w[sub]
    if k > 1:
        diffs = pts[:, 1:, :] - pts[:, :1, :]
        keep = np.linalg.matrix_rank(diffs, tol=1e-8) == k - 1
        pts, sub = pts[keep], sub[keep]
    if len(sub) == 0:
        return {}
    gram = pts @ pts.transpose(0, 2, 1)
    border = np.zeros((len(sub), k + 1, k + 1))
    border[:, :k, :k] = gram
    border[:, :k, k] = 1.0
    border[:, k, :k] = 1.0
    rhs = np.zeros((len(sub), k + 1, 1))
    rhs[:, k, 0] = 1.0
    lam = np.linalg.solve(border, rhs)[:, :k, 0]
    ok = lam.min(axis=1) >= -1e-9
    lam, pts, sub = lam[ok], pts[ok], sub[ok]
    p = np.einsum("ni,nid->nd", lam, pts)
    nz = np.abs(p).max(axis=1) > 1e-9
    out = {}
    dom = np.concatenate([np.sort(p[:, a:b], axis=1) for a, b in blocks], axis=1)
    for row, coefs, s in zip(dom[nz], lam[nz], sub[nz]):
        key = tuple(np.round(row, 9) + 0.0)
        score = float(coefs.min())
        if key not in out or score > out[key][0]:
            out[key] = (score, tuple(int(i) for i in s))
    return out


def _chunks(n: int, k: int, size: int):
    buf = []
    for s in combinations(range(n), k):
        buf.append(s)
        if len(buf) == size:
            yield buf
            buf = []
    if buf:
        yield buf


def enumerate_candidates(spec: RepSpec, jobs: int = 1, chunk: int = 100_000) -> tuple[tuple[Fraction, ...], ...]:
    """Dominant minimum-norm points of all subsets of projected weights.

    Subsets of size up to dim t* + 1 are screened in floating point; every
    surviving candidate is then recomputed and checked exactly.
    """
    case_id = spec.case_id
    weights = projected_weights(case_id)
    scaled = [[float(x * 6) for x in w] for w in weights]
    dim_t = spec.shape.dimension - len(spec.shape.factor_sizes)
    blocks = [(b.start, b.stop) for b in spec.shape.blocks()]
    tasks = (
        (scaled, blocks, c) for k in range(1, dim_t + 2) for c in _chunks(len(weights), k, chunk)
    )
    merged: dict = {}

    def absorb(res):
        for key, (score, subset) in res.items():
            if key not in merged or score > merged[key][0]:
                merged[key] = (score, subset)

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for res in pool.map(_screen, tasks):
                absorb(res)
    else:
        for t in tasks:
            absorb(_screen(t))

    found = set()
    for _, subset in merged.values():
        pts = [weights[i] for i in subset]
        try:
            p, lam = affine_min_norm(pts)
        except InconsistentSystemError:
            continue
        if any(v < 0 for v in lam) or all(v == 0 for v in p):
            continue
        if not is_minimal_vector(p, case_id):
            continue
        found.add(dominant(p, case_id))
    return tuple(sorted(found))
