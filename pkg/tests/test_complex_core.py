import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from passive_bounds.complex_core import StolzParams, branch_arg, branch_log, branch_sqrt, in_stolz
from passive_bounds.errors import DomainError

from oracles import log_upper, sqrt_upper

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize("z, expected", [(4, 2), (-4, 2j), (1j, cmath.exp(1j * math.pi / 4))])
def test_sqrt_hand_values(z, expected):
    assert branch_sqrt(z) == pytest.approx(expected, abs=1e-15)
    assert branch_sqrt(z) == pytest.approx(sqrt_upper(z), abs=1e-15)


def test_sqrt_positive_axis_exact():
    x = np.array([0.0, 1e-300, 2.0, 9.0, 1e300])
    assert np.array_equal(branch_sqrt(x + 0j), np.sqrt(x) + 0j)


def test_sqrt_negative_zero_imag_stays_on_upper_side():
    assert branch_sqrt(complex(4.0, -0.0)) == 2.0


@pytest.mark.parametrize("z, expected", [
    (-1, 1j * math.pi),
    (1j, 0.5j * math.pi),
    (math.e * cmath.exp(1.5j * math.pi), 1 + 1.5j * math.pi),
])
def test_log_hand_values(z, expected):
    assert branch_log(z) == pytest.approx(expected, abs=1e-14)


def test_log_zero_raises():
    with pytest.raises(DomainError):
        branch_log(0.0)


def test_arg_range_and_positive_axis():
    z = np.array([1, 1j, -1, -1j, 1 - 1e-300j, complex(1, -0.0)])
    a = branch_arg(z)
    # 2 pi - 1e-300 rounds to 2 pi
    assert np.all((a >= 0) & (a <= 2 * math.pi))
    assert a[0] == 0 and a[-1] == 0 and a[3] == pytest.approx(1.5 * math.pi)


@pytest.mark.parametrize("z, theta, expected", [
    (1j, math.pi / 4, True),
    (1 + 0j, math.pi / 4, False),
    (-1 + 1j, math.pi / 4, True),
])
def test_in_stolz(z, theta, expected):
    assert in_stolz(z, StolzParams(theta)) is expected


def test_stolz_param_domain():
    with pytest.raises(DomainError):
        StolzParams(0.0)
    with pytest.raises(DomainError):
        StolzParams(math.pi / 2)


@given(finite, finite)
def test_sqrt_squares_back(x, y):
    z = complex(x, y)
    s = branch_sqrt(z)
    assert abs(s * s - z) <= 8 * np.finfo(float).eps * max(abs(z), 1e-300)


@given(finite, finite)
def test_sqrt_matches_polar_oracle(x, y):
    z = complex(x, y)
    assert branch_sqrt(z) == pytest.approx(sqrt_upper(z), rel=1e-13, abs=1e-300)


@given(finite, st.floats(1e-9, 1e6))
def test_minus_z_quadrant(x, y):
    # z in C+ => sqrt(-z) in the left half-plane
    s = branch_sqrt(-complex(x, y))
    assert s.real < 0 or (s.real == 0 and s.imag > 0)


@given(st.floats(1e-6, 1e6))
def test_continuity_from_above(x):
    for d in (1e-4, 1e-8, 1e-12):
        assert abs(branch_sqrt(complex(x, d * x)) - branch_sqrt(x)) <= 2 * d * math.sqrt(x) + 1e-15


@given(finite.filter(lambda v: v != 0), finite)
def test_log_matches_oracle(x, y):
    z = complex(x, y)
    assert branch_log(z) == pytest.approx(log_upper(z), rel=1e-13, abs=1e-13)
