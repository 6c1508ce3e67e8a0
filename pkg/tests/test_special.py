import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netoutage.errors import ParameterError
from netoutage.special import APERY, CATALAN, TABLE, dirichlet_beta, epstein_zeta, lattice_sum, zeta


@pytest.mark.parametrize("s", [1.5, 2.0, 2.5, 3.0, 4.0, 7.5])
def test_zeta_matches_mpmath(s):
    assert zeta(s) == pytest.approx(float(mpmath.zeta(s)), rel=1e-13)


@pytest.mark.parametrize("s", [1.0, 1.5, 2.0, 3.0, 5.0])
def test_dirichlet_beta_matches_mpmath(s):
    ref = float(mpmath.dirichlet(s, [0, 1, 0, -1]))
    assert dirichlet_beta(s) == pytest.approx(ref, rel=1e-13)


def test_named_constants():
    assert CATALAN == pytest.approx(0.915965594177219015, rel=1e-14)
    assert APERY == pytest.approx(1.202056903159594285, rel=1e-14)
    assert dirichlet_beta(3.0) == pytest.approx(math.pi**3 / 32, rel=1e-14)


def test_one_dimensional_sum_is_twice_zeta():
    for a in (2.0, 3.0, 4.0, 6.0):
        assert epstein_zeta(1, a) == pytest.approx(2 * zeta(a), rel=1e-12)
    assert epstein_zeta(1, 4.0) == pytest.approx(math.pi**4 / 45, abs=1e-10)


@given(st.floats(2.2, 8.0))
@settings(max_examples=15, deadline=None)
def test_square_lattice_factorisation(alpha):
    # sum over Z^2 \ 0 of |x|^-alpha = 4 zeta(alpha/2) beta(alpha/2)
    s = alpha / 2
    ref = 4 * float(mpmath.zeta(s)) * float(mpmath.dirichlet(s, [0, 1, 0, -1]))
    assert epstein_zeta(2, alpha) == pytest.approx(ref, rel=1e-9)


def test_cubic_lattice_value():
    # reference value of the simple-cubic lattice sum at alpha = 4
    assert epstein_zeta(3, 4.0) == pytest.approx(16.532315959761669, rel=1e-10)


def test_sum_requires_alpha_above_dimension():
    for d in (1, 2, 3):
        with pytest.raises(ParameterError):
            epstein_zeta(d, float(d))


def test_lattice_sum_of_compact_function():
    # only the 4 nearest and 4 diagonal neighbours fall inside r < 1.5
    val = lattice_sum(lambda r: np.where(r < 1.5, 1.0, 0.0), 2, tail=lambda r2: 0.0)
    assert val == pytest.approx(8.0)


def test_table_caches_values():
    a = TABLE.epstein(2, 4.0)
    assert TABLE.epstein(2, 4.0) is a
    assert TABLE.catalan == CATALAN
