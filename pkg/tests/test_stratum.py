from fractions import Fraction as F

import pytest

from pvstrata.certify import orthogonal_torus_basis, weight_of
from pvstrata.exact import identity, matrix
from pvstrata.repspace import coord, pairing
from pvstrata.stratum import chi_value, derive_stratum, scalar_weight


def labels(coords):
    return {c.label for c in coords}


def test_beta6(fx1):
    d = derive_stratum(fx1.catalog[6].beta)
    assert labels(d.z_coords) == {"221", "231", "321", "331", "122", "132", "212", "312"}
    assert labels(d.w_coords) == {"222", "232", "322", "332"}
    assert d.levi_label() == ((1,), (1,), (1,))
    assert d.lambda_beta == (-4, 2, 2, -4, 2, 2, -3, 3)


def test_beta49(fx1):
    d = derive_stratum(fx1.catalog[49].beta)
    assert labels(d.z_coords) == {"332"} and not d.w_coords
    assert d.levi_label() == ((2,), (2,), (1,))
    assert d.chi_exponents == ((-2, 4), (-2, 4), (-3, 3))


def test_case2_beta13(fx2):
    d = derive_stratum(fx2.catalog[13].beta)
    assert len(d.z_coords) == 14
    assert {"341", "262"} <= labels(d.z_coords)
    assert {"342", "562"} <= labels(d.w_coords)
    assert labels(d.z_coords) == set(fx2.tables[13]["z"])
    assert labels(d.w_coords) == set(fx2.tables[13]["w"])
    assert d.levi_label() == ((2,), (1,))


@pytest.mark.parametrize("case_id", [1, 2])
def test_structural_invariants(fixtures, case_id):
    for i, d in fixtures[case_id].data.items():
        b = d.beta.vector
        bb = pairing(b, b)
        assert not set(d.z_coords) & set(d.w_coords)
        # lambda acts on Z by one positive scalar
        ws = {weight_of(d.lambda_beta, c) for c in d.z_coords}
        assert ws == {scalar_weight(d)} and scalar_weight(d) > 0
        # lambda is the primitive integer direction of beta
        ratio = {F(l) / v for l, v in zip(d.lambda_beta, b) if v}
        assert len(ratio) == 1 and ratio.pop() > 0
        # Levi blocks are maximal runs of equal entries
        start = 0
        for n, blocks in zip((3, 3, 2) if case_id == 1 else (6, 2), d.levi_partition):
            vals = [[b[start + i - 1] for i in blk] for blk in blocks]
            assert all(len(set(v)) == 1 for v in vals)
            assert all(vals[k][0] != vals[k + 1][0] for k in range(len(vals) - 1))
            assert sum(len(blk) for blk in blocks) == n
            start += n
        # character vector is proportional to beta
        chi = d.character_vector()
        assert pairing(chi, b) ** 2 == pairing(chi, chi) * bb


def test_chi_identity(fx1):
    d = fx1.data[6]
    assert chi_value(d, (identity(3), identity(3), identity(2))) == 1


def test_chi_beta49_on_unimodular_torus(fx1):
    # t1 = t2 = t32 = 2 with each factor of determinant one; the displayed
    # character becomes (t1 t2 t32)^6
    d = fx1.data[49]
    g1 = matrix([[F(1, 2), 0, 0], [0, 1, 0], [0, 0, 2]])
    g3 = matrix([[F(1, 2), 0], [0, 2]])
    assert chi_value(d, (g1, g1, g3)) == 8**6


def test_chi_trivial_on_beta_orthogonal_torus(fixtures):
    for case_id in (1, 2):
        for i in (3, 20, 33):
            d = fixtures[case_id].data[i]
            for direction in orthogonal_torus_basis(d):
                den = 1
                for v in direction:
                    den = den * v.denominator
                for t in (2, 3):
                    g = []
                    for blk in ((range(0, 3), range(3, 6), range(6, 8)) if case_id == 1 else (range(0, 6), range(6, 8))):
                        n = len(blk)
                        g.append(matrix([[F(t) ** int(direction[blk[r]] * den) if r == c else 0 for c in range(n)] for r in range(n)]))
                    assert chi_value(d, tuple(g)) == 1


def test_chi_singular_block(fx1):
    d = fx1.data[6]
    with pytest.raises(ZeroDivisionError):
        chi_value(d, (matrix([[0, 0, 0], [0, 1, 0], [0, 0, 1]]), identity(3), identity(2)))
