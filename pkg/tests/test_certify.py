from dataclasses import replace
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from pvstrata.certify import (
    LEMMAS,
    STANDARD,
    WITT,
    EliminationStep,
    EmptinessCertificate,
    Infeasible,
    check_elimination_applicability,
    find_oneps,
    load_certificates,
    oneps_problems,
    orthogonal_torus_basis,
    residual_coords,
    simplex_feasible,
    verify_certificate,
    weight_of,
)
from pvstrata.exact import dot, matvec, solve_linear, matrix, InconsistentSystemError
from pvstrata.repspace import coord, raw_weight
from oracles import fourier_motzkin_feasible

LAM1 = (2, 2, -4, -5, -5, 10, -4, 4)
LAM10 = (-9, 9, 0, -2, 7, -5, -3, 3)


def test_weight_of_examples():
    assert weight_of(LAM1, coord(1, "331")) == 2
    assert weight_of(LAM1, coord(1, "232")) == 16
    assert weight_of((0,) * 8, coord(1, "121")) == 0


def test_beta10_certificate(fx1):
    cert = fx1.certificates[10]
    assert cert.lam == LAM10 and cert.zeroed() == {"131"}
    rep = verify_certificate(cert, fx1.data[10])
    assert rep.ok and rep.orthogonality == 0
    assert rep.weight_list(("231", "321", "122", "222", "312")) == [1, 4, 1, 19, 1]
    # the separately printed verification output lists the first two in swapped order
    assert sorted(rep.weights.values()) == sorted([4, 1, 1, 19, 1])


def test_beta46_certificate(fx1):
    cert = fx1.certificates[46]
    assert cert.lam == (0, 0, 0, 0, 0, 0, -1, 1) and cert.zeroed() == {"331"}
    rep = verify_certificate(cert, fx1.data[46])
    assert rep.ok and rep.weights == {"332": 1}
    # a multiple of beta itself is never an admissible 1-PS
    rep = verify_certificate(replace(cert, lam=(-1, -1, 2, -1, -1, 2, 0, 0)), fx1.data[46])
    assert rep.failures == ["1-PS pairs with beta to 4"]


def test_beta1_certificate_and_broken_block_sums(fx1):
    cert = fx1.certificates[1]
    rep = verify_certificate(cert, fx1.data[1])
    assert rep.ok and rep.weight_list(cert.residual_order) == [2, 1, 1, 16, 1, 1, 16]
    broken = replace(cert, lam=(3,) + LAM1[1:])
    rep = verify_certificate(broken, fx1.data[1])
    assert not rep.ok and any("block 1 sums to 1" in f for f in rep.failures)


def test_applicability_examples(fx1, fx2):
    step = EliminationStep(STANDARD, ((2, (1, 2, 3)),), ("311", "321"), ("311", "321", "331"))
    assert check_elimination_applicability(step, fx1.data[1])
    over = replace(step, zeroed=("311", "321", "331"))
    assert not check_elimination_applicability(over, fx1.data[1])
    witt = EliminationStep(WITT, ((1, (2, 3, 4, 5, 6)),), ("232", "242", "252", "262"), slot=2, mode="first-row")
    assert check_elimination_applicability(witt, fx2.data[32])
    assert not check_elimination_applicability(replace(witt, zeroed=("232", "242", "252")), fx2.data[32])


def test_step_outside_z_is_rejected(fx1):
    # x111 is not a coordinate of Z for stratum 1
    step = EliminationStep(STANDARD, ((1, (1, 2, 3)),), ("111", "211"), ("111", "211", "311"))
    assert not check_elimination_applicability(step, fx1.data[1])


def test_step_json_round_trip(fixtures):
    for fx in fixtures.values():
        for cert in fx.certificates.values():
            for s in cert.steps:
                assert s.lemma in LEMMAS
                assert EliminationStep.from_json(s.to_json()) == s


@pytest.mark.parametrize("case_id,count", [(1, 33), (2, 68)])
def test_all_certificates_verify(fixtures, case_id, count):
    fx = fixtures[case_id]
    assert len(fx.certificates) == count
    for i, cert in fx.certificates.items():
        rep = verify_certificate(cert, fx.data[i])
        assert rep.ok, (i, rep.failures)


def test_find_oneps_beta10(fx1):
    d = fx1.data[10]
    residual = [c for c in d.z_coords if c.label != "131"]
    lam = find_oneps(d, residual)
    assert not isinstance(lam, Infeasible)
    failures, weights, orth = oneps_problems(lam, d, residual)
    assert not failures and orth == 0 and min(weights.values()) >= 1
    assert not oneps_problems(LAM10, d, residual)[0]


def test_find_oneps_beta29_infeasible(fx1):
    res = find_oneps(fx1.data[29], fx1.data[29].z_coords)
    assert isinstance(res, Infeasible) and res.verify()


def test_find_oneps_empty_residual(fx1):
    d = fx1.data[10]
    lam = find_oneps(d, [])
    assert any(lam) and dot(lam, d.beta.vector) == 0
    assert all(v == int(v) for v in lam)


def test_farkas_witness_rejects_tampering():
    w = Infeasible((F(1, 2), F(1, 2)), ((F(1),), (F(-1),)))
    assert w.verify()
    assert not Infeasible((F(1, 3), F(2, 3)), w.rows).verify()
    assert not Infeasible((F(1), F(0)), w.rows).verify()


def test_simplex_small_systems():
    x = simplex_feasible([[1, 1]], [2])
    assert x is not None and x[0] + x[1] == 2 and min(x) >= 0
    assert simplex_feasible([[1, 1]], [-1]) is None
    assert simplex_feasible([[1, -1], [1, 1]], [0, 4]) == (2, 2)


@pytest.mark.parametrize("case_id", [1, 2])
def test_dichotomy_agrees_with_fourier_motzkin(fixtures, case_id):
    fx = fixtures[case_id]
    for i, d in fx.data.items():
        empty = i in fx.certificates
        residual = residual_coords(fx.certificates[i], d) if empty else d.z_coords
        basis = orthogonal_torus_basis(d)
        rows = [[dot(b, raw_weight(c)) for b in basis] for c in residual]
        expected = fourier_motzkin_feasible(rows, [1] * len(rows))
        found = find_oneps(d, residual)
        assert expected is empty
        assert (not isinstance(found, Infeasible)) is empty, i
        if isinstance(found, Infeasible):
            assert found.verify()


rows_strategy = st.integers(1, 3).flatmap(
    lambda n: st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=1, max_size=6)
)


@given(rows_strategy)
def test_phase_one_matches_fourier_motzkin(rows):
    # a.y >= 1 with y free, written as y+ - y- and surplus variables
    r, n = len(rows), len(rows[0])
    a_eq = [list(row) + [-v for v in row] + [-int(i == k) for k in range(r)] for i, row in enumerate(rows)]
    sol = simplex_feasible(a_eq, [1] * r)
    assert (sol is not None) == fourier_motzkin_feasible(rows, [1] * r)
    if sol is not None:
        y = [sol[d] - sol[n + d] for d in range(n)]
        assert all(sum(F(a) * b for a, b in zip(row, y)) >= 1 for row in rows)


@pytest.mark.parametrize("case_id", [1, 2])
def test_mutations_break_verification(fixtures, case_id):
    fx = fixtures[case_id]
    for i, cert in fx.certificates.items():
        d = fx.data[i]
        residual = residual_coords(cert, d)
        # orthogonality: push the 1-PS along lambda_beta, which keeps block sums
        pushed = tuple(a + b for a, b in zip(cert.lam, d.lambda_beta))
        failures = oneps_problems(pushed, d, residual)[0]
        assert failures and all("pairs with beta" in f for f in failures), i
        # positivity: move inside the admissible directions until one weight hits zero
        basis = orthogonal_torus_basis(d)
        for c in residual:
            coeffs = [dot(b, raw_weight(c)) for b in basis]
            k = next((n for n, v in enumerate(coeffs) if v), None)
            if k is None:
                continue
            shift = F(weight_of(cert.lam, c)) / coeffs[k]
            moved = tuple(a - shift * b for a, b in zip(cert.lam, basis[k]))
            failures = oneps_problems(moved, d, residual)[0]
            assert any(f"x{c.label} is 0" in f for f in failures), (i, c)
        # elimination: zero one more coordinate than the lemma allows
        if cert.steps:
            s = cert.steps[0]
            extra = next(c.label for c in d.z_coords if c.label not in s.zeroed)
            bad = replace(cert, steps=(replace(s, zeroed=s.zeroed + (extra,)),) + cert.steps[1:])
            assert not verify_certificate(bad, d).ok, i


def test_duplicate_zeroing_is_reported(fx1):
    cert = fx1.certificates[1]
    twice = replace(cert, steps=cert.steps + cert.steps)
    rep = verify_certificate(twice, fx1.data[1])
    assert any("twice" in f for f in rep.failures)


def test_load_certificates_from_missing_dir_uses_bundle(tmp_path):
    assert len(load_certificates(1, tmp_path / "nowhere")) == 33
