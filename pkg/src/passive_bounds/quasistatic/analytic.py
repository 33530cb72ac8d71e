"""Closed-form quasi-static polarizabilities: sphere, coated sphere, ellipsoid."""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from ..errors import BracketError, DomainError, PoleError

POLE_REL_TOL = 1e-14


def _eps_at(eps, omega):
    """Permittivity value: a model is evaluated at ``omega``, a number is returned as is."""
    if hasattr(eps, "eval"):
        return complex(eps.eval(complex(omega)))
    return complex(eps)


def sphere_alpha_inf(R, eps, eps0):
    """``4 pi R^3 eps0 (eps - eps0) / (eps + 2 eps0) * I`` for a homogeneous sphere.

    Raises
    ------
    DomainError
        ``R <= 0``, ``eps0 <= 0`` or ``eps <= eps0``.
    """
    if not (R > 0 and eps0 > 0):
        raise DomainError("R and eps0 must be positive")
    if not eps > eps0:
        raise DomainError(f"inclusion must be denser than the background (eps={eps}, eps0={eps0})")
    return 4.0 * math.pi * R**3 * eps0 * (eps - eps0) / (eps + 2.0 * eps0) * np.eye(3)


def coated_sphere_terms(a, b, eps_core, eps_shell, eps0):
    """Numerator and denominator of the exterior dipole coefficient ``D / (E0 b^3)``.

    With ``q = (a/b)^3`` the coefficient is ``N / M`` where::

        N = (e2 - e0)(e1 + 2 e2) + (e1 - e2)(e0 + 2 e2) q
        M = (e2 + 2 e0)(e1 + 2 e2) + 2 (e2 - e0)(e1 - e2) q

    All permittivities are complex numbers here.
    """
    q = (a / b) ** 3
    e1, e2, e0 = eps_core, eps_shell, eps0
    num = (e2 - e0) * (e1 + 2 * e2) + (e1 - e2) * (e0 + 2 * e2) * q
    den = (e2 + 2 * e0) * (e1 + 2 * e2) + 2 * (e2 - e0) * (e1 - e2) * q
    scale = abs((e2 + 2 * e0) * (e1 + 2 * e2)) + abs(2 * (e2 - e0) * (e1 - e2) * q)
    return num, den, scale


def coated_sphere_alpha(a, b, eps_core, eps_shell, eps0, omega):
    """Scalar polarizability of a core ``r < a`` inside a shell ``a < r < b``.

    Parameters
    ----------
    a, b : float
        Core and outer radii, ``0 <= a < b`` (``a = 0`` is a plain sphere of
        shell material).
    eps_core : float or DispersionModel
    eps_shell : float or DispersionModel
    eps0 : float
        Background permittivity.
    omega : complex
        Frequency in the closed upper half-plane.

    Returns
    -------
    complex
        ``alpha`` such that the tensor is ``alpha * I``.

    Raises
    ------
    PoleError
        Resonance denominator below ``1e-14`` relative to its terms.
    """
    if not (0 <= a < b):
        raise DomainError("radii must satisfy 0 <= a < b")
    if not eps0 > 0:
        raise DomainError("eps0 must be positive")
    e1 = _eps_at(eps_core, omega)
    e2 = _eps_at(eps_shell, omega)
    num, den, scale = coated_sphere_terms(a, b, e1, e2, complex(eps0))
    if abs(den) < POLE_REL_TOL * scale:
        raise PoleError(f"coated-sphere resonance at omega = {omega}")
    return 4.0 * math.pi * eps0 * b**3 * num / den


def depolarization_factors(semiaxes):
    """Depolarization factors ``L_i = (a1 a2 a3 / 2) int_0^inf ds / ((s + a_i^2) R(s))``.

    ``R(s) = sqrt((s + a1^2)(s + a2^2)(s + a3^2))``. Aspect ratios above
    ``1e4`` trigger an accuracy warning.
    """
    ax = np.asarray(semiaxes, dtype=float)
    if ax.shape != (3,) or np.any(ax <= 0):
        raise DomainError("semiaxes must be three positive lengths")
    if ax.max() / ax.min() > 1e4:
        warnings.warn("ellipsoid aspect ratio above 1e4; depolarization factors may be inaccurate",
                      RuntimeWarning, stacklevel=2)
    scale = ax.max()
    a = ax / scale
    prod = a[0] * a[1] * a[2]
    # s = exp(u) above s0 spreads the peaks at s ~ a_i^2 evenly for thin shapes
    s0 = 1e-3 * float(np.min(a)) ** 2
    knots = np.unique(np.log(np.concatenate([[s0], a**2, [1e3]])))
    out = []
    for i in range(3):
        def g(s, i=i):
            r = math.sqrt((s + a[0] ** 2) * (s + a[1] ** 2) * (s + a[2] ** 2))
            return 1.0 / ((s + a[i] ** 2) * r)
        gu = lambda u, g=g: g(math.exp(u)) * math.exp(u)
        val = quad(g, 0.0, s0, epsabs=0.0, epsrel=1e-13)[0]
        val += sum(quad(gu, lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)[0] for lo, hi in zip(knots[:-1], knots[1:]))
        val += quad(g, 1e3, math.inf, epsabs=0.0, epsrel=1e-13, limit=200)[0]
        out.append(0.5 * prod * val)
    return np.array(out)


def ellipsoid_alpha(semiaxes, eps, eps0):
    """Diagonal polarizability ``V eps0 (eps - eps0) / (eps0 + L_i (eps - eps0))``.

    ``V = 4 pi a1 a2 a3 / 3``.
    """
    if not eps0 > 0:
        raise DomainError("eps0 must be positive")
    if not eps > eps0:
        raise DomainError(f"inclusion must be denser than the background (eps={eps}, eps0={eps0})")
    L = depolarization_factors(semiaxes)
    vol = 4.0 / 3.0 * math.pi * float(np.prod(semiaxes))
    return np.diag(vol * eps0 * (eps - eps0) / (eps0 + L * (eps - eps0)))


def design_cloak_frequency(a, b, eps_core, shell_model, eps0, bracket, rtol=1e-12):
    """Frequency where the coated-sphere polarizability vanishes.

    Brent's method (bisection with secant/inverse-quadratic steps) on the
    real part of the numerator ``N(omega)`` over ``bracket``.

    Raises
    ------
    BracketError
        ``Re N`` has no sign change across ``bracket``.
    """
    lo, hi = map(float, bracket)
    if not (0 < lo < hi):
        raise DomainError("bracket must satisfy 0 < lo < hi")

    def num(w):
        e1 = _eps_at(eps_core, w)
        e2 = _eps_at(shell_model, w)
        return coated_sphere_terms(a, b, e1, e2, complex(eps0))[0].real

    n_lo, n_hi = num(lo), num(hi)
    if n_lo == 0.0:
        return lo
    if n_hi == 0.0:
        return hi
    if (n_lo > 0) == (n_hi > 0):
        raise BracketError(f"no sign change of the polarizability numerator on [{lo}, {hi}]")
    return brentq(num, lo, hi, xtol=1e-300, rtol=max(rtol, 4 * np.finfo(float).eps), maxiter=500)
