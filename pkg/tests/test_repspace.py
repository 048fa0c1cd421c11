from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from pvstrata.betaset import load_catalog
from pvstrata.repspace import (
    CASE1,
    CASE2,
    coord,
    coord_from_content,
    coordinates,
    enumerate_coordinates,
    pairing,
    point,
    project_to_tstar,
    raw_weight,
    rep_spec,
    sigma_swap,
)
from pvstrata.exact import ShapeError


def test_coordinate_counts_and_order():
    assert [c.serial for c in enumerate_coordinates(CASE1)] == list(range(1, 19))
    assert [c.serial for c in enumerate_coordinates(CASE2)] == list(range(1, 31))


def test_numbering_examples():
    assert coord(1, 15).label == "232"
    assert coord(2, 13).label == "451"
    assert coord(1, 1).label == "111"
    assert coord(1, 18).label == "332"
    assert coord(2, 1).label == "121" and coord(2, 30).label == "562"


def test_only_two_cases():
    with pytest.raises(ValueError):
        rep_spec(3)


def test_raw_weight_examples():
    assert raw_weight(coord(1, "331")) == (0, 0, 1, 0, 0, 1, 1, 0)
    assert raw_weight(coord(2, "562")) == (0, 0, 0, 0, 1, 1, 0, 1)
    assert raw_weight(coord(1, "111")) == (1, 0, 0, 1, 0, 0, 1, 0)


def test_projection_examples():
    third, half = F(1, 3), F(1, 2)
    assert project_to_tstar((1, 0, 0, 1, 0, 0, 1, 0), CASE1.shape) == (
        2 * third, -third, -third, 2 * third, -third, -third, half, -half)
    assert project_to_tstar((0, 0, 0, 0, 1, 1, 0, 1), CASE2.shape) == (
        -third, -third, -third, -third, 2 * third, 2 * third, -half, half)
    beta6 = tuple(F(v, 66) for v in (-4, 2, 2, -4, 2, 2, -3, 3))
    assert project_to_tstar(beta6, CASE1.shape) == beta6


def test_projection_length_mismatch():
    with pytest.raises(ShapeError):
        project_to_tstar((1, 2), CASE1.shape)


def test_pairing_examples():
    beta1 = tuple(F(v, 42) for v in (-2, -2, 4, 0, 0, 0, -3, 3))
    assert pairing(beta1, (2, 2, -4, -5, -5, 10, -4, 4)) == 0
    beta6 = tuple(F(v, 66) for v in (-4, 2, 2, -4, 2, 2, -3, 3))
    # (16+4+4+16+4+4+9+9) / 66^2
    assert pairing(beta6, beta6) == F(1, 66)
    assert pairing(beta6, (0,) * 8) == 0


def test_pairing_length_mismatch():
    with pytest.raises(ShapeError):
        pairing((1, 2), (1, 2, 3))


@pytest.mark.parametrize("case_id", [1, 2])
def test_pairing_ignores_projection_for_catalog(case_id):
    shape = rep_spec(case_id).shape
    for e in load_catalog(case_id).entries:
        b = e.beta.vector
        for c in coordinates(case_id):
            w = raw_weight(c)
            assert pairing(b, w) == pairing(b, project_to_tstar(w, shape))


def test_sigma_examples():
    beta4 = tuple(F(v, 6) for v in (-2, 1, 1, 0, 0, 0, 0, 0))
    beta5 = tuple(F(v, 6) for v in (0, 0, 0, -2, 1, 1, 0, 0))
    assert sigma_swap(beta4) == beta5
    beta1 = load_catalog(1)[1].beta.vector
    assert sigma_swap(sigma_swap(beta1)) == beta1
    assert sigma_swap(coord(1, "231")) == coord(1, "321")


def test_sigma_rejects_case2():
    with pytest.raises(ValueError):
        sigma_swap(coord(2, "121"))
    with pytest.raises(ValueError):
        sigma_swap((0,) * 8, case_id=2)
    with pytest.raises(ValueError):
        sigma_swap((0,) * 30)


def test_sigma_is_weight_preserving_bijection():
    images = {sigma_swap(c) for c in coordinates(1)}
    assert len(images) == 18
    for c in coordinates(1):
        assert raw_weight(sigma_swap(c)) == sigma_swap(raw_weight(c))
        assert sigma_swap(sigma_swap(c)) == c


@given(st.lists(st.integers(-9, 9), min_size=18, max_size=18))
def test_sigma_on_points_matches_coordinates(vals):
    x = tuple(F(v) for v in vals)
    y = sigma_swap(x)
    for c in coordinates(1):
        assert y[sigma_swap(c).serial - 1] == x[c.serial - 1]
    assert sigma_swap(y) == x


@given(st.sampled_from([1, 2]).flatmap(lambda c: st.tuples(st.just(c), st.sampled_from(coordinates(c)))))
def test_serial_label_content_round_trip(pair):
    case_id, c = pair
    assert coord(case_id, c.serial) == c
    assert coord(case_id, c.label) == c
    assert coord(case_id, "x" + c.label) == c
    assert coord_from_content(case_id, c.content()) == c


def test_case2_indices_increasing():
    assert all(c.indices[0] < c.indices[1] for c in coordinates(2))


def test_bad_lookup():
    with pytest.raises(KeyError):
        coord(1, 19)
    with pytest.raises(KeyError):
        coord(2, "211")


def test_point_builder():
    x = point(1, {"232": "3/2"})
    assert x[14] == F(3, 2) and sum(1 for v in x if v) == 1
