import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from passive_bounds.bounds import (
    cloaking_envelope,
    kk_real_part,
    lossy_level_set_bound,
    lossy_max_bound,
    scalar_response,
    tensor_transparency_check,
    transparency_bound,
)
from passive_bounds.dispersion import FrequencyBand, GeneralizedLorentzLossless, LossyDrude, LossyLorentz, constant
from passive_bounds.errors import DomainError, PreconditionError
from passive_bounds.quasistatic.responses import ConstantTensor, PolarizabilityResponse, ScalarProjection, SharpDrudeTensor


# ---- Kramers-Kronig --------------------------------------------------------------------------------

def test_kk_lorentz_interior_sample():
    f = LossyLorentz(1.0, ((1.0, 4.0, 0.2),))
    w = np.geomspace(1e-2, 1e2, 2000)
    im = f.eval(w + 0j).imag
    om = w[200:1800:40]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        re = kk_real_part(w, im, 1.0, om)
    ref = f.eval(om + 0j).real
    assert np.max(np.abs(re - ref) / (1 + np.abs(ref))) < 1e-3


def test_kk_zero_loss_returns_f_inf():
    w = np.linspace(0.1, 10, 200)
    assert np.allclose(kk_real_part(w, np.zeros_like(w), 1.7, [0.5, 3.0]), 1.7, atol=1e-14)


def test_kk_loss_away_from_omega_is_ordinary_integral():
    w = np.linspace(0.1, 12.0, 4000)
    bump = lambda t: np.where((t > 5) & (t < 7), np.sin(np.pi * (t - 5) / 2) ** 2, 0.0)
    om = 1.0
    ref = 1.0 + 2 / math.pi * quad(lambda t: t * bump(t) / (t * t - om * om), 5, 7, epsabs=1e-13)[0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        got = kk_real_part(w, bump(w), 1.0, om)
    assert got == pytest.approx(ref, abs=1e-5)


def test_kk_tail_bound_reported():
    f = LossyLorentz(1.0, ((1.0, 4.0, 0.2),))
    w = np.geomspace(1e-2, 5.0, 400)
    with pytest.warns(RuntimeWarning):
        _, tail = kk_real_part(w, f.eval(w + 0j).imag, 1.0, 1.0, full_output=True)
    assert tail > 1e-6


def test_kk_domain_errors():
    w = np.linspace(1, 2, 50)
    with pytest.raises(DomainError):
        kk_real_part(w, np.ones_like(w), 1.0, 3.0)
    im = np.where(w < 1.5, 0.0, 1.0)
    with pytest.raises(DomainError):
        kk_real_part(w, im, 1.0, w[np.searchsorted(w, 1.5)] - 1e-3)


# ---- transparency ----------------------------------------------------------------------------------

def test_transparency_drude_equality():
    rep = transparency_bound(LossyDrude(1.0, 1.0, 0.0), FrequencyBand(1.1, 2.0))
    assert rep.passed
    assert abs(rep.slack) < 1e-9
    child = rep.children[0]
    assert child.extras["max_abs_dv_minus_f_inf"] < 1e-10


def test_transparency_lorentz_strict():
    rep = transparency_bound(GeneralizedLorentzLossless(1.0, ((1.0, 0.25),)), FrequencyBand(1.0, 2.0))
    assert rep.passed and rep.slack > 0 and rep.children[0].slack > 0


def test_transparency_constant_is_flat():
    rep = transparency_bound(constant(2.0), FrequencyBand(1.0, 2.0))
    assert rep.lhs == 0 and rep.rhs == 0 and rep.passed


def test_transparency_refuses_lossy_or_pole():
    with pytest.raises(PreconditionError):
        transparency_bound(LossyDrude(1.0, 1.0, 0.1), FrequencyBand(1.0, 2.0))
    with pytest.raises(PreconditionError):
        transparency_bound(GeneralizedLorentzLossless(1.0, ((1.0, 2.25),)), FrequencyBand(1.0, 2.0))


@given(st.floats(0.1, 3.0), st.floats(0.0, 0.8), st.floats(6.5, 20.0))
def test_transparency_holds_for_poles_outside(a, xi1, xi2):
    f = GeneralizedLorentzLossless(1.0, ((a, xi1), (a, xi2)))
    rep = transparency_bound(f, FrequencyBand(1.0, 2.5), n_grid=256)
    assert rep.passed


# ---- lossy bounds ----------------------------------------------------------------------------------

def test_level_set_hand_value():
    rep = lossy_level_set_bound(LossyDrude(1.0, 1.0, 0.0), FrequencyBand.from_x(0.5, 1.5), 0.4)
    assert rep.lhs == pytest.approx(0.8, abs=1e-12)
    assert rep.rhs == pytest.approx(1.6) and rep.passed


def test_level_set_whole_band():
    band = FrequencyBand.from_x(0.5, 1.5)
    rep = lossy_level_set_bound(LossyDrude(1.0, 1.0, 0.0), band, 1.0)
    assert rep.lhs == pytest.approx(band.x_plus - band.x_minus)
    assert rep.extras["whole_band"] and rep.passed


def test_level_set_shrinks():
    f = LossyDrude(1.0, 1.0, 0.1)
    band = FrequencyBand(0.5, 1.5)
    vals = [lossy_level_set_bound(f, band, d).lhs for d in (0.5, 0.2, 0.05)]
    # loss keeps |v| away from zero, so small Delta gives an empty set
    assert vals[0] > vals[1] > vals[2] == 0.0


def test_max_bounds_constant():
    r_v, r_vt = lossy_max_bound(constant(2.0), FrequencyBand(1.0, 2.0))
    assert r_v.rhs == pytest.approx(8.0) and r_v.lhs == pytest.approx(1.5)
    assert r_vt.rhs == pytest.approx(4.0) and r_vt.lhs == pytest.approx(1.0)


def test_max_bounds_lossy_drude():
    for rep in lossy_max_bound(LossyDrude(1.0, 1.0, 0.1), FrequencyBand(0.9, 1.1)):
        assert rep.passed and rep.slack > 0


def test_max_bounds_sharp_model_witnesses_at_edges():
    w0 = 1.0
    f = ScalarProjection(SharpDrudeTensor(np.eye(3), w0), [0, 0, 1])
    band = FrequencyBand(0.8, 1.2)
    r_v, r_vt = lossy_max_bound(f, band)
    assert r_v.passed and r_vt.passed
    assert r_v.witnesses[0][0] in (pytest.approx(0.8), pytest.approx(1.2))


# ---- cloaking --------------------------------------------------------------------------------------

class _Zero(PolarizabilityResponse):
    """Claimed perfect broadband cloak: alpha = 0 on the band, alpha_inf = I."""

    alpha_inf = np.eye(3)

    def eval(self, omega):
        return np.zeros((3, 3), dtype=complex)


def test_envelope_sharp_drude_equality():
    resp = SharpDrudeTensor(np.diag([1.0, 2.0, 3.0]), 1.3)
    rep, curve = cloaking_envelope(resp, [1, 0, 0], FrequencyBand(0.8, 2.0), 1.3)
    assert rep.passed
    assert abs(rep.slack) < 1e-8
    assert rep.children[0].passed


def test_envelope_constant_alpha():
    rep, _ = cloaking_envelope(ConstantTensor(np.eye(3)), [0, 0, 1], FrequencyBand(0.5, 2.0), 1.0)
    # above w0 the envelope holds strictly; below it f = f_inf cannot be negative
    assert rep.extras["upper_side_slack"] > 0
    assert rep.extras["lower_side_slack"] < 0 and not rep.passed


def test_envelope_zero_response_fails_everywhere_but_w0():
    band = FrequencyBand(0.5, 2.0)
    rep, curve = cloaking_envelope(_Zero(), [0, 0, 1], band, 1.0, n_grid=101)
    assert not rep.passed
    for w, f, lo, hi in curve:
        if w != 1.0:
            assert f < lo or f > hi
    assert rep.children[0].passed is False


@pytest.mark.parametrize("i", [0, 1, 2])
def test_envelope_axis_matches_tensor_diagonal(i):
    ainf = np.diag([1.0, 2.0, 3.0])
    resp = SharpDrudeTensor(ainf, 1.0, alpha_w0=np.diag([0.0, 0.5, 0.0]))
    e = np.zeros(3)
    e[i] = 1.0
    rep, _ = cloaking_envelope(resp, e, FrequencyBand(0.6, 1.8), 1.0)
    # only the entry with alpha(w0) != 0 along e breaks the cloaked envelope
    assert rep.passed is (i != 1)


def test_tensor_check_sharp_model():
    rep = tensor_transparency_check(SharpDrudeTensor(np.diag([1.0, 2.0, 3.0]), 1.0), FrequencyBand(0.5, 3.0))
    assert abs(rep.extras["min_eigenvalue"]) <= 1e-10
    assert rep.passed


def test_scalar_response_hermitian_form():
    A = np.array([[1, 2j, 0], [0, 1, 0], [0, 0, 1]], dtype=complex)
    E = np.array([1, 1j, 0])
    assert scalar_response(A, E) == pytest.approx(np.conj(E) @ A @ E)


def test_envelope_complex_e0_asymmetric_warns():
    A = np.eye(3, dtype=complex)
    A[0, 1] = 0.1j
    with pytest.warns(RuntimeWarning):
        rep, _ = cloaking_envelope(ConstantTensor(A), [1, 1j, 0], FrequencyBand(1.0, 2.0), 0.5)
    assert rep.children == []
