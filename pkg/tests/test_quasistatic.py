import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from passive_bounds.dispersion import FrequencyBand, LossyDrude, check_passivity
from passive_bounds.errors import BracketError, ConfigError, DomainError, GridTooCoarseError
from passive_bounds.herglotz import herglotz_v
from passive_bounds.quasistatic import (
    CoatedSphereResponse,
    Region,
    ScalarProjection,
    SceneSpec,
    Shell,
    Sphere,
    coated_sphere_alpha,
    depolarization_factors,
    design_cloak_frequency,
    ellipsoid_alpha,
    load_scene,
    scene_from_dict,
    sphere_alpha_inf,
)

from oracles import coated_sphere_linear_solve, depolarization_elliprd, sphere_cm

E0_FIXTURES = [
    [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1],
    [1, 1j, 0], [0.3, -2.0, 0.5 + 0.5j],
]

eps_re = st.floats(0.2, 10.0)
eps_im = st.floats(0.0, 5.0)


def test_sphere_closed_form():
    assert np.allclose(sphere_alpha_inf(1.0, 2.0, 1.0), math.pi * np.eye(3), rtol=0, atol=1e-14)
    assert np.allclose(sphere_alpha_inf(2.0, 4.0, 1.0), 16 * math.pi * np.eye(3), rtol=1e-15)


def test_sphere_vanishes_at_matched_index():
    a = sphere_alpha_inf(1.0, 1.0 + 1e-9, 1.0)
    assert a[0, 0] == pytest.approx(4 * math.pi * 1e-9 / 3, rel=1e-6)
    with pytest.raises(DomainError):
        sphere_alpha_inf(1.0, 1.0, 1.0)


@given(st.floats(0.05, 0.95), eps_re, eps_im, eps_re, eps_im, st.floats(0.5, 4.0))
def test_coated_sphere_matches_interface_solve(q, r1, i1, r2, i2, e0):
    e1, e2 = complex(r1, i1), complex(r2, i2)
    ref = coated_sphere_linear_solve(q, 1.0, e1, e2, e0)
    got = coated_sphere_alpha(q, 1.0, e1, e2, e0, 1.0)
    assert abs(got - ref) <= 1e-9 * max(1.0, abs(ref))


def test_coated_sphere_limits():
    assert coated_sphere_alpha(0.0, 1.0, 5.0, 2.0, 1.0, 1.0) == pytest.approx(sphere_cm(1.0, 2.0, 1.0), rel=1e-15)
    assert coated_sphere_alpha(0.5, 1.0, 2.0, 2.0, 1.0, 1.0) == pytest.approx(math.pi, rel=1e-15)


def test_coated_sphere_dispersive_shell():
    shell = LossyDrude(1.0, 1.0, 0.1)
    w = 1.3 + 0.0j
    got = coated_sphere_alpha(0.5, 1.0, 3.0, shell, 1.0, w)
    assert got == pytest.approx(coated_sphere_linear_solve(0.5, 1.0, 3.0, complex(shell.eval(w)), 1.0), rel=1e-12)


def test_depolarization_sphere_and_spheroid():
    assert np.allclose(depolarization_factors([1, 1, 1]), 1 / 3, atol=1e-13)
    assert np.allclose(depolarization_factors([1, 1, 2]), depolarization_elliprd([1, 1, 2]), atol=1e-12)


def test_depolarization_needle():
    L = depolarization_factors([1, 1, 1000])
    assert L[2] < 1e-4
    assert L[0] == pytest.approx(0.5, abs=1e-4)


def test_depolarization_extreme_aspect_warns():
    with pytest.warns(RuntimeWarning, match="aspect ratio"):
        depolarization_factors([1, 1, 2e4])


@given(st.tuples(*[st.floats(0.05, 20.0)] * 3))
def test_depolarization_properties(ax):
    L = depolarization_factors(ax)
    assert abs(L.sum() - 1) < 1e-10
    assert np.allclose(L, depolarization_elliprd(ax), atol=1e-10)
    # longer axis, smaller factor
    order = np.argsort(ax)
    assert np.all(np.diff(L[order]) <= 1e-12)


def test_ellipsoid_alpha_matches_sphere():
    assert np.allclose(ellipsoid_alpha([1, 1, 1], 2.0, 1.0), sphere_alpha_inf(1.0, 2.0, 1.0), rtol=1e-12)


def test_ellipsoid_alpha_spheroid():
    ax = [1.0, 1.0, 2.0]
    L = depolarization_elliprd(ax)
    ref = 4 * math.pi * 2 / 3 * 1.0 / (1 + L)
    assert np.allclose(np.diag(ellipsoid_alpha(ax, 2.0, 1.0)), ref, rtol=1e-12)


# ---- cloak design ----------------------------------------------------------------------------------

def _default_cloak(gamma=0.0):
    return dict(a=0.5, b=1.0, eps_core=3.0, shell=LossyDrude(1.0, 1.0, gamma), eps0=1.0)


def test_design_cloak_frequency_zero():
    c = _default_cloak()
    w0 = design_cloak_frequency(c["a"], c["b"], c["eps_core"], c["shell"], c["eps0"], (2.0, 3.5))
    resp = CoatedSphereResponse(c["a"], c["b"], c["eps_core"], c["shell"], c["eps0"])
    assert 2.0 < w0 < 3.5
    assert abs(resp.scalar(w0)) / abs(resp.alpha_inf[0, 0]) < 1e-10


def test_design_cloak_bracket_without_root():
    c = _default_cloak()
    with pytest.raises(BracketError):
        design_cloak_frequency(c["a"], c["b"], c["eps_core"], c["shell"], c["eps0"], (3.0, 3.5))


def test_small_loss_cloak_is_imperfect():
    c = _default_cloak(1e-3)
    resp = CoatedSphereResponse(c["a"], c["b"], c["eps_core"], c["shell"], c["eps0"])
    w = np.linspace(2.0, 3.5, 3001)
    ratio = np.array([abs(resp.scalar(x)) for x in w]) / resp.alpha_inf[0, 0]
    assert 0 < ratio.min() < 1e-2


@given(st.floats(0.1, 5.0), st.floats(1e-3, 3.0), st.floats(0.1, 0.9))
def test_coated_sphere_v_is_herglotz(re, im, q):
    resp = CoatedSphereResponse(q, 1.0, 3.0, LossyDrude(1.0, 1.0, 0.2), 1.0)
    f = ScalarProjection(resp, [0, 0, 1])
    assert herglotz_v(f, complex(re, im)).imag >= -1e-12


@pytest.mark.parametrize("E0", E0_FIXTURES)
def test_coated_sphere_passive_for_any_field(E0):
    resp = CoatedSphereResponse(0.5, 1.0, 3.0, LossyDrude(1.0, 1.0, 0.1), 1.0)
    rep = check_passivity(ScalarProjection(resp, E0), FrequencyBand(0.2, 4.0), n_samples=200)
    assert rep.passed


# ---- scenes ----------------------------------------------------------------------------------------

def test_scene_from_dict_and_toml(tmp_path):
    d = {"box": 2.0, "grid": 32, "background_eps": 1.0,
         "regions": [{"shape": {"type": "shell", "a": 0.25, "b": 0.5},
                      "material": {"type": "drude", "f_inf": 1.0, "omega_p": 1.0, "gamma": 0.0}},
                     {"shape": {"type": "sphere", "radius": 0.25}, "material": 3.0}]}
    scene = scene_from_dict(d)
    assert isinstance(scene.regions[0].shape, Shell) and scene.regions[1].material == 3.0
    p = tmp_path / "scene.toml"
    p.write_text(
        "[scene]\nbox = 2.0\ngrid = 32\n"
        "[[scene.regions]]\nshape = {type = \"sphere\", radius = 0.5}\nmaterial = 2.0\n"
    )
    s2 = load_scene(p)
    assert s2.grid_n == 32 and s2.regions[0].shape.radius == 0.5


def test_scene_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        scene_from_dict({"grid": 32})
    with pytest.raises(ConfigError):
        scene_from_dict({"box": 1.0, "grid": 32, "regions": [{"shape": {"type": "cube"}, "material": 2.0}]})
    with pytest.raises(ConfigError):
        load_scene(tmp_path / "missing.toml")


def test_scene_refuses_coarse_grid():
    scene = SceneSpec(2.0, 16, 1.0, (Region(Shell((0, 0, 0), 0.9, 1.0), 2.0),))
    with pytest.raises(GridTooCoarseError):
        scene.check_resolution()
    SceneSpec(2.0, 64, 1.0, (Region(Sphere((0, 0, 0), 0.5), 2.0),)).check_resolution()


def test_scene_region_must_fit():
    with pytest.raises(DomainError):
        SceneSpec(1.0, 32, 1.0, (Region(Sphere((0, 0, 0), 0.8), 2.0),))
