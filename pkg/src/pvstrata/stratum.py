"""Stratum data derived from a label: Z and W coordinate sets, Levi blocks,
the primitive one-parameter subgroup and the indivisible character."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .betaset import Beta
from .exact import QMatrix, det, shape as mshape
from .repspace import Coord, coordinates, pairing, raw_weight, rep_spec


@dataclass(frozen=True)
class StratumData:
    beta: Beta
    z_coords: tuple[Coord, ...]
    w_coords: tuple[Coord, ...]
    levi_partition: tuple[tuple[tuple[int, ...], ...], ...]
    lambda_beta: tuple[int, ...]
    chi_exponents: tuple[tuple[int, ...], ...]

    @property
    def case_id(self) -> int:
        return self.beta.case_id

    @property
    def y_coords(self) -> tuple[Coord, ...]:
        return tuple(sorted(self.z_coords + self.w_coords))

    def levi_label(self) -> tuple[tuple[int, ...], ...]:
        """Cut positions per factor, e.g. ((1,), (1,), (1,)) for three [1] cuts."""
        return tuple(tuple(blk[-1] for blk in blocks[:-1]) for blocks in self.levi_partition)

    def block_of(self, factor: int, index: int) -> tuple[int, ...]:
        for blk in self.levi_partition[factor - 1]:
            if index in blk:
                return blk
        raise KeyError(index)

    def character_vector(self) -> tuple[int, ...]:
        """The character as a weight vector: each block exponent repeated over the block."""
        out = []
        for blocks, exps in zip(self.levi_partition, self.chi_exponents):
            for blk, e in zip(blocks, exps):
                out.extend([e] * len(blk))
        return tuple(out)


def _primitive(values: Sequence[Fraction]) -> tuple[int, ...]:
    den = math.lcm(*(v.denominator for v in values))
    ints = [int(v * den) for v in values]
    g = math.gcd(*ints)
    return tuple(i // g for i in ints)


def derive_stratum(beta: Beta) -> StratumData:
    vec = beta.vector
    spec = rep_spec(beta.case_id)
    bb = pairing(vec, vec)
    z, w = [], []
    for c in coordinates(beta.case_id):
        v = pairing(vec, raw_weight(c))
        if v == bb:
            z.append(c)
        elif v > bb:
            w.append(c)
    partition = []
    for blk in spec.shape.blocks():
        runs: list[list[int]] = []
        for pos, i in enumerate(blk, 1):
            if runs and vec[i] == vec[i - 1]:
                runs[-1].append(pos)
            else:
                runs.append([pos])
        partition.append(tuple(tuple(r) for r in runs))
    lam = _primitive(vec)
    exps = []
    for blk, runs in zip(spec.shape.blocks(), partition):
        exps.append(tuple(lam[blk.start + r[0] - 1] for r in runs))
    return StratumData(beta, tuple(z), tuple(w), tuple(partition), lam, tuple(exps))


def levi_blocks_of(g_factor: QMatrix, blocks: Sequence[Sequence[int]]) -> list[QMatrix]:
    """Diagonal blocks of a factor matrix; raises if off-block entries are nonzero."""
    n = mshape(g_factor)[0]
    where = {}
    for b, blk in enumerate(blocks):
        for i in blk:
            where[i] = b
    if sorted(where) != list(range(1, n + 1)):
        raise ValueError("block partition does not match the factor size")
    for i in range(n):
        for j in range(n):
            if where[i + 1] != where[j + 1] and g_factor[i][j] != 0:
                raise ValueError(f"entry ({i + 1},{j + 1}) lies outside the Levi blocks")
    return [tuple(tuple(g_factor[i - 1][j - 1] for j in blk) for i in blk) for blk in blocks]


def chi_value(data: StratumData, g: Sequence[QMatrix]) -> Fraction:
    """Product over Levi blocks of det(block) to the character exponent."""
    total = Fraction(1)
    for factor, blocks, exps in zip(g, data.levi_partition, data.chi_exponents):
        for blk, e in zip(levi_blocks_of(factor, blocks), exps):
            d = det(blk)
            if d == 0:
                raise ZeroDivisionError("singular Levi block")
            total *= d**e
    return total


def scalar_weight(data: StratumData) -> int:
    """The weight by which the primitive one-parameter subgroup acts on Z."""
    weights = {pairing(data.lambda_beta, raw_weight(c)) for c in data.z_coords}
    if len(weights) != 1:
        raise ArithmeticError(f"Z is not a single weight space: {sorted(weights)}")
    return int(weights.pop())
