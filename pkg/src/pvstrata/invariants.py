"""Group actions, relative invariants, representatives and orbit classes."""
from __future__ import annotations

import json
import math
import os
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .betaset import EX2, load_catalog, resolve_fixture_dir
from .exact import (
    QMatrix,
    det,
    identity,
    matmul,
    matrix,
    pfaffian,
    q,
    shape as mshape,
    transpose,
)
from .repspace import coord, coordinates, point, rep_spec
from .stratum import StratumData, chi_value, derive_stratum, scalar_weight

GroupElement = tuple  # one square QMatrix per GL factor


class InvariantError(ValueError):
    """Malformed invariant expression or a failed invariant check."""


class EquivarianceError(AssertionError):
    """A counterexample to P(gx) = chi(g)^m P(x); carries the witness."""

    def __init__(self, message, g=None, x=None):
        super().__init__(message)
        self.g = g
        self.x = x


class NotSemistableError(ValueError):
    """The point is not semistable for the pencil classifier."""


# ------------------------------------------------------------------- actions


def group_identity(case_id: int) -> GroupElement:
    return tuple(identity(n) for n in rep_spec(case_id).shape.factor_sizes)


def group_mul(g: GroupElement, h: GroupElement) -> GroupElement:
    return tuple(matmul(a, b) for a, b in zip(g, h))


def slices(x: Sequence[Fraction]) -> tuple[QMatrix, QMatrix]:
    """Case 2 point as two 6x6 alternating matrices, one per Aff2 basis vector."""
    out = []
    for k in (1, 2):
        m = [[Fraction(0)] * 6 for _ in range(6)]
        for a, b in combinations(range(1, 7), 2):
            v = x[coord(2, f"{a}{b}{k}").serial - 1]
            m[a - 1][b - 1] = v
            m[b - 1][a - 1] = -v
        out.append(tuple(tuple(r) for r in m))
    return tuple(out)


def act(g: GroupElement, x: Sequence) -> tuple[Fraction, ...]:
    """Action of a group element on a point (18 or 30 coordinates)."""
    x = tuple(q(v) for v in x)
    if len(x) == 18:
        g1, g2, g3 = g
        t = {c.indices: x[c.serial - 1] for c in coordinates(1)}
        out = []
        for c in coordinates(1):
            i2, j2, k2 = c.indices
            s = Fraction(0)
            for (i, j, k), v in t.items():
                if v:
                    s += g1[i2 - 1][i - 1] * g2[j2 - 1][j - 1] * g3[k2 - 1][k - 1] * v
            out.append(s)
        return tuple(out)
    if len(x) == 30:
        g1, g2 = g
        moved = [matmul(matmul(g1, a), transpose(g1)) for a in slices(x)]
        out = []
        for c in coordinates(2):
            a, b, k = c.indices
            out.append(g2[k - 1][0] * moved[0][a - 1][b - 1] + g2[k - 1][1] * moved[1][a - 1][b - 1])
        return tuple(out)
    raise InvariantError(f"point of length {len(x)} belongs to neither case")


def unipotent_element(case_id: int, u: Mapping[str, object]) -> GroupElement:
    """n(u): identity plus entry (i, j), i > j, of factor f for each key ``u{f}{i}{j}``."""
    mats = [[list(r) for r in identity(n)] for n in rep_spec(case_id).shape.factor_sizes]
    for name, value in u.items():
        f, i, j = (int(ch) for ch in name.lstrip("u"))
        if i <= j:
            raise InvariantError(f"{name} is not below the diagonal")
        mats[f - 1][i - 1][j - 1] = q(value)
    return tuple(matrix(m) for m in mats)


# ------------------------------------------------------------- 2x2 machinery


def theta(a: QMatrix) -> QMatrix:
    """[[a, b], [c, d]] -> [[d, -c], [-b, a]]."""
    (a11, a12), (a21, a22) = a
    return matrix([[a22, -a21], [-a12, a11]])


# Signs attached to the omitted basis matrix E_ab in the Castling map.
_PHI_SIGNS = {(0, 0): 1, (0, 1): -1, (1, 0): 1, (1, 1): -1}


def castling_phi(h1: QMatrix, h2: QMatrix, h3: QMatrix) -> QMatrix:
    """h1 ^ h2 ^ h3 in Wedge3(M2), read as a 2x2 matrix.

    Entry (a, b) is the signed 3x3 minor of the 4x3 matrix of flattened
    slices with the row of E_ab removed; signs make the standard
    representative map to the identity.
    """
    cols = [[h[0][0], h[0][1], h[1][0], h[1][1]] for h in (h1, h2, h3)]
    flat = transpose(matrix(cols))
    out = [[Fraction(0)] * 2 for _ in range(2)]
    for a in range(2):
        for b in range(2):
            drop = 2 * a + b
            minor = tuple(r for n, r in enumerate(flat) if n != drop)
            out[a][b] = _PHI_SIGNS[(a, b)] * det(minor)
    return matrix(out)


# ----------------------------------------------------------- forms and wedges


def _form(obj) -> dict[tuple[int, ...], Fraction]:
    """Vector -> 1-form, alternating matrix -> 2-form, as {index tuple: coefficient}."""
    if obj and isinstance(obj[0], tuple):
        n = len(obj)
        return {(p, r): obj[p][r] for p in range(n) for r in range(p + 1, n) if obj[p][r]}
    return {(p,): v for p, v in enumerate(obj) if v}


def _wedge(f: dict, g: dict) -> dict:
    out: dict = {}
    for a, x in f.items():
        for b, y in g.items():
            if set(a) & set(b):
                continue
            merged = a + b
            inversions = sum(1 for s in range(len(merged)) for t in range(s + 1, len(merged)) if merged[s] > merged[t])
            key = tuple(sorted(merged))
            out[key] = out.get(key, Fraction(0)) + (-x * y if inversions % 2 else x * y)
    return out


def wedge_top_coefficient(forms: Sequence, n: int) -> Fraction:
    """Coefficient of e_1 ^ ... ^ e_n in the wedge of the given forms."""
    acc = {(): Fraction(1)}
    for f in forms:
        acc = _wedge(acc, _form(f))
    return acc.get(tuple(range(n)), Fraction(0))


def _size(obj) -> int:
    return len(obj)


# ----------------------------------------------------------- expression trees


def parse_sexpr(text: str):
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(tokens):
            raise InvariantError("unexpected end of expression")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while pos < len(tokens) and tokens[pos] != ")":
                items.append(read())
            if pos >= len(tokens):
                raise InvariantError("unbalanced parentheses")
            pos += 1
            return items
        if tok == ")":
            raise InvariantError("unexpected ')'")
        return tok

    tree = read()
    if pos != len(tokens):
        raise InvariantError("trailing tokens after expression")
    return tree


def _entry(case_id: int, tok: str, x) -> Fraction:
    if tok == "0":
        return Fraction(0)
    sign, label = (-1, tok[1:]) if tok.startswith("-") else (1, tok)
    try:
        return sign * x[coord(case_id, label).serial - 1]
    except KeyError:
        raise InvariantError(f"no coordinate {tok!r} in case {case_id}") from None


def _scalar(v, op):
    if not isinstance(v, Fraction):
        raise InvariantError(f"{op} expects a scalar argument")
    return v


def _square(v, op):
    if not (isinstance(v, tuple) and v and isinstance(v[0], tuple) and len(v) == len(v[0])):
        raise InvariantError(f"{op} expects a square matrix")
    return v


def evaluate(tree, case_id: int, x: Sequence[Fraction]):
    """Evaluate a parsed expression at the point ``x``."""
    if isinstance(tree, str):
        raise InvariantError(f"bare token {tree!r}")
    op, args = tree[0], tree[1:]
    if op == "coord":
        return _entry(case_id, args[0], x)
    if op == "matrix":
        rows = [[_entry(case_id, t, x) for t in row] for row in args]
        if len({len(r) for r in rows}) != 1:
            raise InvariantError("ragged matrix")
        return matrix(rows)
    if op == "vector":
        return tuple(_entry(case_id, t, x) for t in args)
    if op == "alt":
        if case_id != 2:
            raise InvariantError("alt is only meaningful in Case 2")
        idx = [int(t) for t in args[0]]
        k = args[1]
        n = len(idx)
        m = [[Fraction(0)] * n for _ in range(n)]
        for p in range(n):
            for r in range(p + 1, n):
                a, b = idx[p], idx[r]
                v = _entry(case_id, f"{min(a, b)}{max(a, b)}{k}", x)
                if a > b:
                    v = -v
                m[p][r], m[r][p] = v, -v
        return matrix(m)
    vals = [evaluate(a, case_id, x) if not isinstance(a, str) else a for a in args]
    if op == "det":
        return det(_square(vals[0], op))
    if op == "pf":
        return pfaffian(_square(vals[0], op))
    if op == "theta":
        return theta(vals[0])
    if op == "phi":
        return castling_phi(*vals)
    if op == "theta-sandwich":
        v1, a, v2 = vals
        t = theta(a)
        return sum((v1[i] * t[i][j] * v2[j] for i in range(2) for j in range(2)), Fraction(0))
    if op == "wedge-coeff":
        return wedge_top_coefficient(vals, _size(vals[0]))
    if op == "mul":
        out = Fraction(1)
        for v in vals:
            out *= _scalar(v, op)
        return out
    if op == "pow":
        return _scalar(vals[0], op) ** int(vals[1])
    if op in ("disc-det", "disc-pf"):
        f = det if op == "disc-det" else pfaffian
        a_, b_ = vals
        qa, qc = f(a_), f(b_)
        qb = f(tuple(tuple(s + t for s, t in zip(r1, r2)) for r1, r2 in zip(a_, b_))) - qa - qc
        return qb * qb - 4 * qa * qc
    raise InvariantError(f"unknown operator {op!r}")


def degree(tree) -> int:
    """Total degree of an expression in the coordinates."""
    op, args = tree[0], tree[1:]
    if op == "coord":
        return 1
    if op in ("matrix", "vector", "alt"):
        return 1
    if op == "det":
        inner = args[0]
        return degree(inner) * _rows(inner)
    if op == "pf":
        return degree(args[0]) * _rows(args[0]) // 2
    if op == "theta":
        return degree(args[0])
    if op == "phi":
        return 3 * degree(args[0])
    if op == "theta-sandwich":
        return sum(degree(a) for a in args)
    if op in ("wedge-coeff", "mul"):
        return sum(degree(a) for a in args)
    if op == "pow":
        return degree(args[0]) * int(args[1])
    if op in ("disc-det", "disc-pf"):
        d = degree(args[0]) * _rows(args[0])
        if op == "disc-pf":
            d //= 2
        return 2 * d
    raise InvariantError(f"unknown operator {op!r}")


def _rows(tree) -> int:
    op = tree[0]
    if op == "matrix":
        return len(tree) - 1
    if op == "alt":
        return len(tree[1])
    if op in ("theta", "phi"):
        return 2
    raise InvariantError(f"cannot size {op!r}")


# -------------------------------------------------------------- fixtures


@dataclass(frozen=True)
class InvariantSpec:
    case_id: int
    index: int
    expression: str
    power: Fraction
    representative: tuple[Fraction, ...]
    unipotent_steps: tuple[tuple[str, str], ...]
    orbit_set: str

    @property
    def tree(self):
        return parse_sexpr(self.expression)

    def __call__(self, x):
        return evaluate(self.tree, self.case_id, x)


def load_invariant_specs(case_id: int, fixtures: str | os.PathLike | None = None) -> dict[int, InvariantSpec]:
    path = resolve_fixture_dir(fixtures) / f"nonempty_case{case_id}.json"
    raw = json.loads(path.read_text())
    out = {}
    for rec in raw:
        try:
            out[rec["index"]] = InvariantSpec(
                case_id,
                rec["index"],
                rec["invariant"],
                Fraction(rec["power"]),
                point(case_id, rec["representative"]),
                tuple((s["u"], s["target"]) for s in rec.get("unipotent", [])),
                rec["orbit_set"],
            )
        except (KeyError, ValueError) as exc:
            raise InvariantError(f"case {case_id} record {rec.get('index')}: {exc}") from None
    return out


def eval_invariant(spec: InvariantSpec, x: Sequence) -> Fraction:
    if len(x) != len(coordinates(spec.case_id)):
        raise InvariantError(f"point of length {len(x)} does not belong to case {spec.case_id}")
    return spec(tuple(q(v) for v in x))


def homogeneity_power(spec: InvariantSpec, data: StratumData) -> Fraction:
    """The power m forced by the action of the primitive one-parameter subgroup.

    That subgroup lies in the determinant-one part of the Levi subgroup,
    scales P by t^(deg P * weight on Z) and the character by t^|lambda|^2.
    """
    lam = data.lambda_beta
    return Fraction(degree(spec.tree) * scalar_weight(data), sum(v * v for v in lam))


# ------------------------------------------------------------ random sampling


def _random_invertible(n: int, rng: random.Random, lo: int = -3, hi: int = 3) -> QMatrix:
    while True:
        m = matrix([[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)])
        if det(m) != 0:
            return m


def random_levi_element(data: StratumData, rng: random.Random, unimodular: bool = True) -> GroupElement:
    """Random block-diagonal element of the Levi subgroup.

    With ``unimodular`` each GL factor has determinant one (one row of one
    block is rescaled), which is the subgroup where the relative invariants
    transform by a power of the character.
    """
    factors = []
    for n, blocks in zip(rep_spec(data.case_id).shape.factor_sizes, data.levi_partition):
        m = [[Fraction(0)] * n for _ in range(n)]
        for blk in blocks:
            b = _random_invertible(len(blk), rng)
            for r, i in enumerate(blk):
                for c, j in enumerate(blk):
                    m[i - 1][j - 1] = b[r][c]
        if unimodular:
            d = det(matrix(m))
            row = blocks[rng.randrange(len(blocks))][0] - 1
            m[row] = [v / d for v in m[row]]
        factors.append(matrix(m))
    return tuple(factors)


def random_point_on(coords, rng: random.Random, case_id: int, lo: int = -5, hi: int = 5) -> tuple[Fraction, ...]:
    return point(case_id, {c.label: Fraction(rng.randint(lo, hi), rng.randint(1, 3)) for c in coords})


# ------------------------------------------------------------------ checks


@dataclass(frozen=True)
class EquivarianceReport:
    case_id: int
    index: int
    trials: int
    power: Fraction
    nonzero_trials: int


def check_equivariance(spec: InvariantSpec, data: StratumData, trials: int = 100, seed: int = 0) -> EquivarianceReport:
    """P(gx) = chi(g)^m P(x) on random unimodular Levi elements, exactly.

    With m = p/s the check is P(gx)^s = chi(g)^p P(x)^s.  Points are random
    on Z; the invariant depends only on Z coordinates.
    """
    rng = random.Random(f"{spec.case_id}:{spec.index}:{seed}")
    p, s = spec.power.numerator, spec.power.denominator
    nonzero = 0
    for _ in range(trials):
        g = random_levi_element(data, rng)
        x = random_point_on(data.z_coords, rng, spec.case_id)
        lhs = eval_invariant(spec, act(g, x))
        rhs_base = eval_invariant(spec, x)
        chi = chi_value(data, g)
        if lhs**s != chi**p * rhs_base**s:
            raise EquivarianceError(f"case {spec.case_id} stratum {spec.index}: P(gx) != chi(g)^{spec.power} P(x)", g, x)
        nonzero += rhs_base != 0
    return EquivarianceReport(spec.case_id, spec.index, trials, spec.power, nonzero)


@dataclass(frozen=True)
class RepresentativeReport:
    case_id: int
    index: int
    value: Fraction


def verify_representative(spec: InvariantSpec, data: StratumData) -> RepresentativeReport:
    """R(i) is supported on Z and the invariant does not vanish there."""
    zs = {c.serial for c in data.z_coords}
    outside = [c for c in coordinates(spec.case_id) if spec.representative[c.serial - 1] and c.serial not in zs]
    if outside:
        raise InvariantError(f"stratum {spec.index}: representative has support off Z at {outside}")
    value = eval_invariant(spec, spec.representative)
    if value == 0:
        raise InvariantError(f"stratum {spec.index}: invariant vanishes at the representative")
    return RepresentativeReport(spec.case_id, spec.index, value)


class ReductionError(ValueError):
    """No free unipotent parameter clears a W coordinate."""


def reduce_unipotent(spec: InvariantSpec, data: StratumData, y: Sequence) -> tuple[dict[str, Fraction], tuple[Fraction, ...]]:
    """Clear the W part of ``y`` = (R(i), w) by a unipotent element.

    Steps are taken in the fixture order; each step solves one affine
    equation in one parameter with the earlier parameters already fixed.
    Returns the parameters and the reduced point.
    """
    y = tuple(q(v) for v in y)
    zs = {c.serial - 1 for c in data.z_coords}
    if any(y[i] != spec.representative[i] for i in zs):
        raise ReductionError("the Z part of the point is not the representative")
    u: dict[str, Fraction] = {}
    for name, target in spec.unipotent_steps:
        t = coord(spec.case_id, target).serial - 1

        def value(val):
            return act(unipotent_element(spec.case_id, {**u, name: val}), y)[t]

        v0, v1, v2 = value(0), value(1), value(2)
        slope = v1 - v0
        if v2 - v0 != 2 * slope:
            raise ReductionError(f"{target} is not affine in {name}")
        if slope == 0:
            if v0 != 0:
                raise ReductionError(f"{name} does not move {target}")
            u[name] = Fraction(0)
            continue
        u[name] = -v0 / slope
    out = act(unipotent_element(spec.case_id, u), y)
    leftover = [c for c in data.w_coords if out[c.serial - 1] != 0]
    if leftover:
        raise ReductionError(f"W coordinates {leftover} remain nonzero")
    if any(out[i] != spec.representative[i] for i in zs):
        raise ReductionError("the Z part moved during the reduction")
    return u, out


# ------------------------------------------------------------ Ex2 classifier


@dataclass(frozen=True)
class OrbitDescriptor:
    kind: str
    square_class: int | None = None
    reduced: bool = True

    @property
    def algebra(self) -> str:
        if self.kind != "Ex2Class":
            return "single orbit"
        return "split Q x Q" if self.square_class == 1 else f"Q(sqrt {self.square_class})"


TRIAL_DIVISION_BOUND = 10**6


def squarefree_class(n: Fraction | int) -> tuple[int, bool]:
    """Square-free integer in the square class of a nonzero rational.

    Returns (class, fully_reduced).  Trial division stops at a bound; a
    leftover cofactor that is not a perfect square and not probably prime
    is flagged as possibly unreduced.
    """
    n = Fraction(n)
    if n == 0:
        raise ValueError("zero has no square class")
    m = n.numerator * n.denominator
    sign = -1 if m < 0 else 1
    m = abs(m)
    out = 1
    p = 2
    while p * p <= m and p <= TRIAL_DIVISION_BOUND:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e % 2:
            out *= p
        p += 1 if p == 2 else 2
    reduced = True
    if m > 1:
        r = math.isqrt(m)
        if r * r != m:
            out *= m
            reduced = m < TRIAL_DIVISION_BOUND**2 or _probable_prime(m)
    return sign * out, reduced


def _probable_prime(n: int) -> bool:
    if n < 4:
        return n > 1
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if a % n == 0:
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def ex2_class(spec: InvariantSpec, x: Sequence) -> OrbitDescriptor:
    """Square class of the pencil discriminant for the Ex2 strata."""
    if spec.orbit_set != EX2:
        raise InvariantError(f"stratum {spec.index} is not an Ex2 stratum")
    value = eval_invariant(spec, x)
    if value == 0:
        raise NotSemistableError("pencil discriminant vanishes: the point is not semistable")
    cls, reduced = squarefree_class(value)
    return OrbitDescriptor("Ex2Class", cls, reduced)


def ex2_point(case_id: int, d: int) -> tuple[Fraction, ...]:
    """Point whose pencil form is u^2 - d v^2 (discriminant class d)."""
    if case_id == 1:
        return point(1, {"221": 1, "331": 1, "232": 1, "322": d})
    return point(2, {"341": 1, "561": 1, "362": 1, "452": -d})


def load_stratum_data(case_id: int, fixtures=None) -> dict[int, StratumData]:
    cat = load_catalog(case_id, fixtures)
    return {e.beta.index: derive_stratum(e.beta) for e in cat.entries}
