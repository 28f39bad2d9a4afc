import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fastretrial.stability import (
    check_stability,
    full_load_success_prob,
    max_stable_n1,
    min_stable_l1,
    objective_grad,
    optimal_l1,
    optimal_z,
)

from oracles import argmax_objective, brute_max_n1, brute_min_l1

# (19/20)**29 in exact rational arithmetic
FULL_LOAD_30_20 = 0.22593554099256585


def test_full_load_examples():
    assert full_load_success_prob(1, 7) == 1.0
    assert full_load_success_prob(5, 1) == 0.0
    assert full_load_success_prob(30, 20) == pytest.approx(FULL_LOAD_30_20, abs=1e-12)
    assert abs(full_load_success_prob(30, 20) - 0.2259) < 1e-4
    with pytest.raises(ValueError):
        full_load_success_prob(0, 3)
    with pytest.raises(ValueError):
        full_load_success_prob(3, 0)


@given(n1=st.integers(2, 200), l1=st.integers(1, 500))
def test_full_load_monotone(n1, l1):
    p = full_load_success_prob(n1, l1)
    assert 0 <= p <= 1
    assert full_load_success_prob(n1, l1 + 1) > p
    if l1 >= 2:
        assert full_load_success_prob(n1 + 1, l1) < p


def test_check_stability_examples():
    rep = check_stability([0.2] * 30, 20)
    assert rep.stable
    assert rep.margin == pytest.approx(FULL_LOAD_30_20 - 0.2, abs=1e-12)
    assert abs(rep.margin - 0.0259) < 1e-4
    assert not check_stability([0.23] * 30, 20).stable
    assert check_stability([0.999], 4).stable
    scalar = check_stability(0.2, 20, n1=30)
    assert scalar.stable and scalar.margin == pytest.approx(rep.margin, abs=1e-15)
    with pytest.raises(ValueError):
        check_stability(0.2, 20)


def test_boundary_is_unstable():
    # mean rate exactly equal to the full-load success
    rep = check_stability([0.5, 0.5], 2)
    assert rep.margin == 0 and not rep.stable


def test_max_stable_n1_examples():
    assert max_stable_n1(1.0, 5)[1] == 1.0
    exact, approx = max_stable_n1(0.2, 20)
    assert approx == pytest.approx(1 + 20 * math.log(5), abs=1e-12)
    assert abs(approx - 33.19) < 0.01
    assert exact == 32 == brute_max_n1(0.2, 20)
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            max_stable_n1(bad, 20)
    with pytest.raises(ValueError):
        max_stable_n1(0.2, 1)


@given(lam=st.floats(0.01, 0.99), l1=st.integers(2, 60))
def test_max_stable_n1_consistency(lam, l1):
    exact, approx = max_stable_n1(lam, l1)
    assert exact <= approx
    assert exact == brute_max_n1(lam, l1)
    if exact >= 1:
        assert check_stability(lam, l1, exact).stable
    assert not check_stability(lam, l1, exact + 1).stable


def test_min_stable_l1_examples():
    assert min_stable_l1(0.7, 1) == 1
    assert min_stable_l1(0.2, 30) == 19 == brute_min_l1(0.2, 30)
    assert check_stability(0.2, 19, 30).stable
    assert not check_stability(0.2, 18, 30).stable
    assert min_stable_l1([0.1, 0.3], 2) == min_stable_l1(0.2, 2)
    with pytest.raises(ValueError):
        min_stable_l1(1.0, 5)


@given(lam=st.floats(0.001, 0.95), n1=st.integers(1, 80))
def test_min_stable_l1_is_flip_point(lam, n1):
    l1 = min_stable_l1(lam, n1)
    assert l1 == brute_min_l1(lam, n1)
    assert check_stability(lam, l1, n1).stable
    if l1 > 1:
        assert not check_stability(lam, l1 - 1, n1).stable


def test_optimal_z_examples():
    assert optimal_z(0.0, 30) == 0.0
    z = optimal_z(6.0, 30)
    assert z == pytest.approx(0.2 ** (1 / 29), abs=1e-15)
    assert abs(z - 0.9460) < 1e-4
    assert abs(optimal_l1(6.0, 30) - 18.52) < 0.01
    with pytest.raises(ValueError):
        optimal_z(30.0, 30)
    with pytest.raises(ValueError):
        optimal_z(1.0, 1)


@pytest.mark.parametrize("n1", [2, 5, 30, 77])
@pytest.mark.parametrize("frac", [0.02, 0.3, 0.9])
def test_optimal_z_matches_golden_section(n1, frac):
    assert optimal_z(frac * n1, n1) == pytest.approx(argmax_objective(frac * n1, n1), abs=1e-8)


@given(rate=st.floats(0.01, 0.99), n1=st.integers(2, 100))
def test_optimal_z_tightens_stability(rate, n1):
    l1_star = optimal_l1(rate * n1, n1)
    # continuous pool size: full-load success equals the mean rate
    assert (1 - 1 / l1_star) ** (n1 - 1) == pytest.approx(rate, abs=1e-10)


@given(rate=st.floats(0.0, 0.99), n1=st.integers(2, 60))
def test_gradient_changes_sign_once(rate, n1):
    grid = np.linspace(1e-6, 1 - 1e-6, 500)
    g = np.array([objective_grad(z, rate * n1, n1) for z in grid])
    assert np.all(np.diff(g) <= 0)
    assert np.count_nonzero(np.diff(np.sign(g)) != 0) <= 1
