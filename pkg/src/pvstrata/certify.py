"""Emptiness certificates: elimination patterns plus a destabilizing 1-PS.

An empty stratum is certified by a list of elimination steps, each an
instance of one normal-form lemma for a semisimple subgroup of the Levi,
followed by an integer one-parameter subgroup orthogonal to the label
that has positive weight on every coordinate that was not eliminated.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .betaset import resolve_fixture_dir
from .exact import dot, matrix, nullspace
from .repspace import Coord, coord, coord_from_content, raw_weight, rep_spec
from .stratum import StratumData

STANDARD = "Standard"
TALL_MATRIX = "TallMatrix"
PAIR_2_M2 = "Pair2xM2"
PAIR_2_M32 = "Pair2xM32"
PAIR_3_M32 = "Pair3xM32"
WITT = "WittAlternating"
LEMMAS = (STANDARD, TALL_MATRIX, PAIR_2_M2, PAIR_2_M32, PAIR_3_M32, WITT)


class CertificateError(ValueError):
    """A certificate record is malformed."""


@dataclass(frozen=True)
class EliminationStep:
    """One application of a normal-form lemma.

    ``groups`` lists the acting special linear groups as (factor, indices);
    the order of the indices fixes the basis order used by the pattern.
    ``vector`` and ``matrix`` give the coordinates of the lemma's model
    space, and ``slot`` selects the Aff2 basis vector for the alternating
    lemma.
    """

    lemma: str
    groups: tuple[tuple[int, tuple[int, ...]], ...]
    zeroed: tuple[str, ...]
    vector: tuple[str, ...] = ()
    matrix: tuple[tuple[str, ...], ...] = ()
    slot: int | None = None
    mode: str | None = None

    def to_json(self) -> dict:
        out = {"lemma": self.lemma, "groups": [[f, list(s)] for f, s in self.groups]}
        if self.vector:
            out["vector"] = list(self.vector)
        if self.matrix:
            out["matrix"] = [list(r) for r in self.matrix]
        if self.slot is not None:
            out["slot"] = self.slot
        if self.mode is not None:
            out["mode"] = self.mode
        out["zeroed"] = list(self.zeroed)
        return out

    @classmethod
    def from_json(cls, rec: dict) -> "EliminationStep":
        return cls(
            lemma=rec["lemma"],
            groups=tuple((int(f), tuple(int(i) for i in s)) for f, s in rec["groups"]),
            zeroed=tuple(rec["zeroed"]),
            vector=tuple(rec.get("vector", ())),
            matrix=tuple(tuple(r) for r in rec.get("matrix", ())),
            slot=rec.get("slot"),
            mode=rec.get("mode"),
        )


@dataclass(frozen=True)
class EmptinessCertificate:
    case_id: int
    beta_index: int
    steps: tuple[EliminationStep, ...]
    lam: tuple[int, ...]
    residual_order: tuple[str, ...] = ()
    printed_weights: tuple[int, ...] = ()
    erratum: str | None = None

    def zeroed(self) -> set[str]:
        return {z for s in self.steps for z in s.zeroed}

    def to_json(self) -> dict:
        return {
            "index": self.beta_index,
            "steps": [s.to_json() for s in self.steps],
            "oneps": list(self.lam),
            "residual_order": list(self.residual_order),
            "printed_weights": list(self.printed_weights),
            **({"erratum": self.erratum} if self.erratum else {}),
        }


def load_certificates(case_id: int, fixtures: str | os.PathLike | None = None) -> dict[int, EmptinessCertificate]:
    path = resolve_fixture_dir(fixtures) / f"certificates_case{case_id}.json"
    out = {}
    for rec in json.loads(path.read_text()):
        try:
            out[rec["index"]] = EmptinessCertificate(
                case_id,
                rec["index"],
                tuple(EliminationStep.from_json(s) for s in rec["steps"]),
                tuple(int(v) for v in rec["oneps"]),
                tuple(rec.get("residual_order", ())),
                tuple(int(v) for v in rec.get("printed_weights", ())),
                rec.get("erratum"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CertificateError(f"case {case_id} certificate {rec.get('index')}: {exc}") from None
    return out


def weight_of(lam: Sequence[int], c: Coord) -> int:
    return sum(a * b for a, b in zip(lam, raw_weight(c)))


# --------------------------------------------------------- pattern checking


def _strip(case_id: int, c: Coord, factor: int, idx: int) -> dict | None:
    """Content of ``c`` with ``idx`` removed from ``factor``, or None."""
    content = {f: set(s) for f, s in c.content().items()}
    if idx not in content[factor]:
        return None
    content[factor].discard(idx)
    return {f: frozenset(s) for f, s in content.items()}


def line_base(case_id: int, coords: Sequence[Coord], factor: int, S: Sequence[int]) -> dict | None:
    """Common base if ``coords`` span a copy of the standard module of SL_S.

    The p-th coordinate must be the base with index S[p] added to the
    given factor, or, for three indices of an alternating factor, the base
    with the other two indices of S added (the dual module).  The base may
    not touch S in that factor.
    """
    if len(coords) != len(S):
        return None
    bases = [_strip(case_id, c, factor, s) for c, s in zip(coords, S)]
    if all(b is not None for b in bases) and all(b == bases[0] for b in bases):
        if not bases[0][factor] & set(S):
            return bases[0]
    if len(S) == 3:
        duals = []
        for c, s in zip(coords, S):
            b = {f: set(v) for f, v in c.content().items()}
            others = set(S) - {s}
            if not others <= b[factor]:
                return None
            b[factor] -= others
            duals.append({f: frozenset(v) for f, v in b.items()})
        if all(b == duals[0] for b in duals) and not duals[0][factor] & set(S):
            return duals[0]
    return None


def _grid_base(case_id, grid, g1, g2) -> dict | None:
    """Common base of a matrix whose rows follow group g1 and columns group g2."""
    (f1, S1), (f2, S2) = g1, g2
    base = None
    for p, row in enumerate(grid):
        for r, c in enumerate(row):
            b = _strip(case_id, c, f1, S1[p])
            b = _strip_content(b, f2, S2[r]) if b is not None else None
            if b is None or (base is not None and b != base):
                return None
            base = b
    if base is None or base[f1] & set(S1) or base[f2] & set(S2):
        return None
    return base


def _strip_content(content: dict, factor: int, idx: int) -> dict | None:
    if idx not in content[factor]:
        return None
    return {**content, factor: content[factor] - {idx}}


def witt_pattern(n: int, mode: str) -> set[tuple[int, int]]:
    """Zeroed positions (p < r, 0-based) of an n x n alternating matrix."""
    pairs = {(p, r) for p in range(n) for r in range(p + 1, n)}
    if mode == "full":
        keep = {(n - 2 * j, n - 2 * j + 1) for j in range(1, n // 2 + 1)}
        return pairs - keep
    if mode == "first-row" and n % 2 == 1:
        return {(0, r) for r in range(1, n)}
    raise CertificateError(f"unknown alternating mode {mode!r} for size {n}")


_GROUP_SIZES = {
    PAIR_2_M2: (2, 2),
    PAIR_2_M32: (3, 2),
    PAIR_3_M32: (3, 2),
}


def elimination_problems(step: EliminationStep, data: StratumData) -> list[str]:
    """Reasons the step does not apply to the stratum; empty if it does."""
    case_id = data.case_id
    shape = rep_spec(case_id).shape
    probs: list[str] = []
    if step.lemma not in LEMMAS:
        return [f"unknown lemma {step.lemma!r}"]
    for f, S in step.groups:
        if not 1 <= f <= len(shape.factor_sizes):
            return [f"no factor {f}"]
        if len(set(S)) != len(S) or len(S) < 2:
            probs.append(f"group on factor {f} needs at least two distinct indices, got {S}")
            continue
        try:
            blk = data.block_of(f, S[0])
        except KeyError:
            return [f"index {S[0]} outside factor {f}"]
        if not set(S) <= set(blk):
            probs.append(f"indices {S} of factor {f} are not inside one Levi block")
    if len(step.groups) == 2 and step.groups[0][0] == step.groups[1][0]:
        if set(step.groups[0][1]) & set(step.groups[1][1]):
            probs.append("the two groups overlap")
    if probs:
        return probs
    try:
        vec = [coord(case_id, s) for s in step.vector]
        grid = [[coord(case_id, s) for s in row] for row in step.matrix]
        zeroed = {coord(case_id, s) for s in step.zeroed}
    except KeyError as exc:
        return [str(exc)]
    z = set(data.z_coords)
    layout = set(vec) | {c for row in grid for c in row}
    if step.lemma == WITT:
        if step.slot is None or case_id != 2:
            return ["the alternating lemma needs Case 2 and a slot"]
        (f, S), = step.groups
        if f != 1:
            return ["the alternating lemma acts on the alternating factor"]
        n = len(S)
        cells = {}
        for p in range(n):
            for r in range(p + 1, n):
                c = coord_from_content(case_id, {1: {S[p], S[r]}, 2: {step.slot}})
                cells[(p, r)] = c
        layout = set(cells.values())
        try:
            pattern = {cells[pos] for pos in witt_pattern(n, step.mode or "full")}
        except CertificateError as exc:
            return [str(exc)]
    elif step.lemma == STANDARD:
        if len(step.groups) != 1 or step.matrix:
            return ["the standard lemma takes one group and one vector"]
        (f, S), = step.groups
        if line_base(case_id, vec, f, S) is None:
            probs.append(f"vector {step.vector} is not a standard line for factor {f} indices {S}")
        pattern = set(vec[:-1])
    elif step.lemma == TALL_MATRIX:
        if len(step.groups) != 1 or step.vector:
            return ["the tall-matrix lemma takes one group and one matrix"]
        (f, S), = step.groups
        n, m = len(grid), len(grid[0]) if grid else 0
        if not n > m > 0 or n != len(S) or any(len(r) != m for r in grid):
            return [f"matrix shape {n}x{m} does not fit {len(S)} indices"]
        cols = [[grid[p][r] for p in range(n)] for r in range(m)]
        bases = [line_base(case_id, col, f, S) for col in cols]
        if any(b is None for b in bases):
            probs.append("a column is not a standard line")
        elif len({tuple(sorted(b.items())) for b in bases}) != m:
            probs.append("columns repeat a base")
        pattern = {grid[p][r] for p in range(n - m) for r in range(m)}
    else:
        if len(step.groups) != 2:
            return [f"{step.lemma} takes two groups"]
        g1, g2 = step.groups
        sizes = _GROUP_SIZES[step.lemma]
        if (len(g1[1]), len(g2[1])) != sizes:
            return [f"{step.lemma} needs groups of sizes {sizes}"]
        if len(grid) != sizes[0] or any(len(r) != sizes[1] for r in grid):
            return [f"{step.lemma} needs a {sizes[0]}x{sizes[1]} matrix"]
        if _grid_base(case_id, grid, g1, g2) is None:
            probs.append("matrix rows and columns do not follow the two groups")
        vec_group = g2 if step.lemma == PAIR_2_M32 else g1
        if line_base(case_id, vec, vec_group[0], vec_group[1]) is None:
            probs.append("vector is not a standard line for its group")
        if step.lemma == PAIR_2_M2:
            pattern = {vec[0], grid[0][0]}
        elif step.lemma == PAIR_2_M32:
            pattern = {vec[0], grid[0][0], grid[0][1]}
        else:
            pattern = {vec[0], vec[1], grid[0][0]}
        if layout and len(layout) != len(vec) + sum(len(r) for r in grid):
            probs.append("vector and matrix share coordinates")
    if None in layout:
        probs.append("layout names an invalid coordinate")
        return probs
    off = sorted(layout - z)
    if off:
        probs.append(f"coordinates {off} are not in Z")
    if zeroed != pattern:
        probs.append(
            f"zeroed {sorted(zeroed)} differs from the lemma pattern {sorted(pattern)}"
        )
    return probs


def check_elimination_applicability(step: EliminationStep, data: StratumData) -> bool:
    return not elimination_problems(step, data)


# ---------------------------------------------------------- verification


@dataclass
class CertificateReport:
    case_id: int
    beta_index: int
    failures: list[str] = field(default_factory=list)
    weights: dict[str, int] = field(default_factory=dict)
    orthogonality: Fraction = Fraction(0)

    @property
    def ok(self) -> bool:
        return not self.failures

    def weight_list(self, order: Sequence[str]) -> list[int]:
        return [self.weights[s] for s in order]


def verify_certificate(cert: EmptinessCertificate, data: StratumData) -> CertificateReport:
    """Check the steps, the 1-PS and the residual weights, in that order."""
    rep = CertificateReport(cert.case_id, cert.beta_index)
    seen: set[str] = set()
    for n, step in enumerate(cert.steps, 1):
        for p in elimination_problems(step, data):
            rep.failures.append(f"step {n} ({step.lemma}): {p}")
        again = seen & set(step.zeroed)
        if again:
            rep.failures.append(f"step {n} ({step.lemma}): zeroes {sorted(again)} twice")
        seen |= set(step.zeroed)
    residual = [c for c in data.z_coords if c.label not in seen]
    failures, rep.weights, rep.orthogonality = oneps_problems(cert.lam, data, residual)
    rep.failures += failures
    return rep


def oneps_problems(lam: Sequence[int], data: StratumData, residual: Sequence[Coord]):
    """Block sums, orthogonality to beta and positivity on the residual.

    Returns (failures, weights by label, pairing with beta).
    """
    shape = rep_spec(data.case_id).shape
    if len(lam) != shape.dimension:
        return [f"1-PS has {len(lam)} entries, expected {shape.dimension}"], {}, Fraction(0)
    failures = []
    for f, blk in enumerate(shape.blocks(), 1):
        s = sum(lam[i] for i in blk)
        if s != 0:
            failures.append(f"1-PS block {f} sums to {s}")
    orth = dot(lam, data.beta.vector)
    if orth != 0:
        failures.append(f"1-PS pairs with beta to {orth}")
    weights = {}
    for c in residual:
        w = weight_of(lam, c)
        weights[c.label] = w
        if w <= 0:
            failures.append(f"weight of x{c.label} is {w}, not positive")
    return failures, weights, orth


def residual_coords(cert: EmptinessCertificate, data: StratumData) -> tuple[Coord, ...]:
    z = cert.zeroed()
    return tuple(c for c in data.z_coords if c.label not in z)


def sigma_certificate(cert: EmptinessCertificate, partner_index: int) -> EmptinessCertificate:
    """Transport a Case 1 certificate through the swap of the two GL3 factors."""
    from .repspace import sigma_swap

    def sw(label: str) -> str:
        return sigma_swap(coord(1, label)).label

    swap_factor = {1: 2, 2: 1, 3: 3}
    steps = tuple(
        EliminationStep(
            s.lemma,
            tuple((swap_factor[f], S) for f, S in s.groups),
            tuple(sw(z) for z in s.zeroed),
            tuple(sw(v) for v in s.vector),
            tuple(tuple(sw(v) for v in row) for row in s.matrix),
            s.slot,
            s.mode,
        )
        for s in cert.steps
    )
    return EmptinessCertificate(
        1,
        partner_index,
        steps,
        tuple(sigma_swap(cert.lam)),
        tuple(sw(v) for v in cert.residual_order),
        cert.printed_weights,
    )


# ------------------------------------------------------ linear feasibility


@dataclass(frozen=True)
class Infeasible:
    """Farkas witness: z >= 0, sum z = 1 and z^T A = 0 for the rows A of the system."""

    multipliers: tuple[Fraction, ...]
    rows: tuple[tuple[Fraction, ...], ...]

    def verify(self) -> bool:
        z = self.multipliers
        if any(v < 0 for v in z) or sum(z) != 1:
            return False
        if not self.rows:
            return False
        width = len(self.rows[0])
        return all(sum((zi * r[d] for zi, r in zip(z, self.rows)), Fraction(0)) == 0 for d in range(width))


def simplex_feasible(a_eq: Sequence[Sequence[Fraction]], b_eq: Sequence[Fraction]) -> tuple[Fraction, ...] | None:
    """A point of {x >= 0 : A x = b}, or None; exact phase-one simplex with Bland's rule."""
    m = len(a_eq)
    n = len(a_eq[0]) if m else 0
    tab = []
    for i, (r, b) in enumerate(zip(a_eq, b_eq)):
        r = [Fraction(v) for v in r]
        b = Fraction(b)
        if b < 0:
            r, b = [-v for v in r], -b
        tab.append(r + [Fraction(int(i == k)) for k in range(m)] + [b])
    basis = [n + i for i in range(m)]
    width = n + m
    # phase-one objective: minimize the sum of artificial variables
    cost = [Fraction(0)] * n + [Fraction(1)] * m + [Fraction(0)]
    for i in range(m):
        cost = [c - t for c, t in zip(cost, tab[i])]
    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            if tab[i][enter] > 0:
                ratio = tab[i][-1] / tab[i][enter]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            break  # unbounded direction cannot occur in phase one
        i = best[1]
        piv = tab[i][enter]
        tab[i] = [v / piv for v in tab[i]]
        for k in range(m):
            if k != i and tab[k][enter] != 0:
                f = tab[k][enter]
                tab[k] = [a - f * b for a, b in zip(tab[k], tab[i])]
        f = cost[enter]
        cost = [a - f * b for a, b in zip(cost, tab[i])]
        basis[i] = enter
    if -cost[-1] != 0:
        return None
    x = [Fraction(0)] * width
    for i, bv in enumerate(basis):
        x[bv] = tab[i][-1]
    return tuple(x[:n])


def orthogonal_torus_basis(data: StratumData) -> tuple[tuple[Fraction, ...], ...]:
    """Basis of the 1-PS directions with zero block sums orthogonal to beta."""
    shape = rep_spec(data.case_id).shape
    rows = []
    for blk in shape.blocks():
        rows.append([Fraction(int(i in blk)) for i in range(shape.dimension)])
    rows.append(list(data.beta.vector))
    return nullspace(matrix(rows))


def _primitive_int(v: Sequence[Fraction]) -> tuple[int, ...]:
    den = math.lcm(*(x.denominator for x in v))
    ints = [int(x * den) for x in v]
    g = math.gcd(*ints)
    return tuple(i // g for i in ints) if g else tuple(ints)


def find_oneps(data: StratumData, residual: Sequence[Coord]) -> tuple[int, ...] | Infeasible:
    """Primitive integer 1-PS with positive weight on every residual coordinate.

    Solves {y : (N^T w_j) . y >= 1} exactly, with N a basis of the
    admissible directions.  When infeasible, returns a verified Farkas
    witness instead.
    """
    basis = orthogonal_torus_basis(data)
    dim = len(basis)
    a_rows = tuple(
        tuple(dot(b, raw_weight(c)) for b in basis) for c in residual
    )
    if not basis:
        return Infeasible((), ())
    if not a_rows:
        return _primitive_int(basis[0])
    # y = y_plus - y_minus, a.y - s = 1
    r = len(a_rows)
    a_eq = [list(row) + [-v for v in row] + [Fraction(-int(i == k)) for k in range(r)] for i, row in enumerate(a_rows)]
    sol = simplex_feasible(a_eq, [Fraction(1)] * r)
    if sol is not None:
        y = [sol[d] - sol[dim + d] for d in range(dim)]
        c = [sum((y[d] * basis[d][e] for d in range(dim)), Fraction(0)) for e in range(len(basis[0]))]
        return _primitive_int(c)
    # Farkas system: z >= 0, A^T z = 0, sum z = 1
    a_eq = [[a_rows[i][d] for i in range(r)] for d in range(dim)] + [[Fraction(1)] * r]
    z = simplex_feasible(a_eq, [Fraction(0)] * dim + [Fraction(1)])
    if z is None:
        raise ArithmeticError("neither a 1-PS nor a Farkas witness was found")
    witness = Infeasible(tuple(z), a_rows)
    if not witness.verify():
        raise ArithmeticError("Farkas witness failed exact verification")
    return witness
