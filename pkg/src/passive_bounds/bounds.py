"""Band-limited inequalities for passive responses, evaluated as BoundReports.

Covered checks:

* transparency window: ``w0^2 (f(w0) - f_inf) <= w^2 (f(w) - f_inf)`` for
  ``w0 <= w`` and ``v'(x) >= f_inf``,
* lossy level set: ``|{x : |v(x)| < Delta}| <= 4 Delta / f_inf``,
* lossy maxima: ``(w+^2 - w-^2) f_inf / 4 <= max |w^2 f|`` and
  ``(w+ - w-) f_inf / 2 <= max |w f|``,
* cloaking envelope around a frequency where the scalar response vanishes,
  with the matrix form on the 3x3 polarizability.

Kramers-Kronig reconstruction of ``Re f`` from sampled ``Im f`` lives here as
well since it is the route by which the transparency inequality extends to
responses that are lossy outside the band.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .dispersion import FrequencyBand
from .errors import DomainError, PreconditionError
from .herglotz import herglotz_v
from .reports import BoundReport

TRANSPARENCY_IM_TOL = 1e-10
PSD_REL_TOL = 1e-10
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


# --------------------------------------------------------------------------
# Kramers-Kronig
# --------------------------------------------------------------------------

def _kk_spline(omega_grid, im_values):
    w = np.asarray(omega_grid, dtype=float)
    im = np.asarray(im_values, dtype=float)
    if w.ndim != 1 or w.shape != im.shape or w.size < 4:
        raise DomainError("omega_grid and im_values must be 1-d of equal length >= 4")
    if w[0] <= 0 or np.any(np.diff(w) <= 0):
        raise DomainError("omega_grid must be positive and strictly increasing")
    return w, im, CubicSpline(w, w * im, bc_type="not-a-knot")


def _discontinuous_at(w, im, omega):
    """True when the sample step touching ``omega`` is a jump rather than smooth variation."""
    i = int(np.clip(np.searchsorted(w, omega) - 1, 0, w.size - 2))
    d = np.abs(np.diff(im))
    scale = np.max(np.abs(im)) if np.any(im) else 0.0
    for j in (i - 1, i, i + 1):
        if j < 1 or j >= d.size - 1:
            continue
        neigh = max(d[j - 1], d[j + 1])
        if d[j] > 1e-8 * scale and d[j] > 50.0 * neigh:
            return True
    return False


def _kk_single(w, im, spl, f_inf, omega):
    W = w[-1]
    h = 2.0 * np.diff(w)[min(int(np.searchsorted(w, omega)), w.size - 2)]
    u0, du0, d2u0, d3u0 = (float(spl(omega, k)) for k in range(4))

    def reg(t):
        t = np.asarray(t, dtype=float)
        near = np.abs(t - omega) < h
        tt = np.where(near, omega + 2 * h, t)
        out = (spl(tt) - u0) / (tt * tt - omega * omega)
        # cubic Taylor patch inside the excision window; exact on the spline piece holding omega
        d = t - omega
        taylor = (du0 + d2u0 * d / 2.0 + d3u0 * d * d / 6.0) / (t + omega)
        return np.where(near, taylor, out)

    edges = np.unique(np.concatenate([w, [omega - h, omega + h]]))
    edges = edges[(edges >= w[0]) & (edges <= W)]
    a, b = edges[:-1], edges[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    t = mid[:, None] + half[:, None] * _GL_X[None, :]
    body = math.fsum((half[:, None] * _GL_W[None, :] * reg(t)).ravel())
    # [0, w0]: u falls linearly to zero at the origin
    w0 = w[0]
    tl = 0.5 * w0 * (_GL_X + 1.0)
    ul = spl(w0) * tl / w0
    low = 0.5 * w0 * float(np.sum(_GL_W * (ul - u0) / (tl * tl - omega * omega)))
    patch = u0 / (2.0 * omega) * math.log((W - omega) / (W + omega))
    value = f_inf + (2.0 / math.pi) * (body + low + patch)
    # tail beyond W for Im f ~ C / w^3, i.e. w Im f ~ C / w^2
    c = abs(spl(W)) * W * W
    tail = (2.0 / math.pi) * c / (W * (W * W - omega * omega))
    return value, tail


def kk_real_part(omega_grid, im_values, f_inf, omega, tail_tol=1e-6, full_output=False):
    """Real part from sampled imaginary part through the Kramers-Kronig integral.

    ``Re f(w) = f_inf + (2/pi) PV int_0^inf w' Im f(w') / (w'^2 - w^2) dw'``

    Parameters
    ----------
    omega_grid, im_values : array_like
        Samples of ``Im f`` on a strictly increasing positive grid; ``w' Im f``
        is interpolated by a cubic spline and taken to fall linearly to zero
        below the first sample.
    f_inf : float
    omega : float or array_like
        Evaluation frequencies, strictly inside the grid.
    tail_tol : float
        A warning is issued when the truncation bound exceeds this value.
    full_output : bool
        Also return the truncation bound per frequency.

    Returns
    -------
    value : float or ndarray
    tail_bound : float or ndarray, only with ``full_output``

    Raises
    ------
    DomainError
        ``omega`` outside the grid interior, or ``Im f`` jumps at ``omega``.

    Notes
    -----
    The principal value is taken by subtracting ``w Im f(w)`` from the
    numerator and adding back ``(w Im f(w) / 2w) ln((W - w)/(W + w))``. Inside
    ``|w' - w| < 2 * spacing`` the regularized integrand uses the spline's
    Taylor expansion.
    """
    w, im, spl = _kk_spline(omega_grid, im_values)
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(om <= w[0]) or np.any(om >= w[-1]):
        raise DomainError("omega must lie strictly inside the sampled grid")
    vals = np.empty(om.shape)
    tails = np.empty(om.shape)
    for k, o in enumerate(om):
        if _discontinuous_at(w, im, o):
            raise DomainError(f"Im f is discontinuous at omega = {o}; principal value is not defined")
        vals[k], tails[k] = _kk_single(w, im, spl, f_inf, o)
    if np.max(tails) > tail_tol:
        warnings.warn(f"Kramers-Kronig tail bound {np.max(tails):.3g} exceeds {tail_tol:.3g}",
                      RuntimeWarning, stacklevel=2)
    if np.ndim(omega) == 0:
        return (vals[0], tails[0]) if full_output else float(vals[0])
    return (vals, tails) if full_output else vals


# --------------------------------------------------------------------------
# transparency window
# --------------------------------------------------------------------------

def _real_eval(f, omega):
    return np.asarray(f.eval(np.asarray(omega, dtype=float) + 0j))


def verify_transparency(f, band, n_samples=1024, tol=TRANSPARENCY_IM_TOL):
    """Raise :class:`PreconditionError` unless ``max |Im f| <= tol`` on ``band``."""
    w = np.linspace(band.omega_minus, band.omega_plus, n_samples)
    poles = [p for p in getattr(f, "real_poles", tuple)() if band.omega_minus <= p <= band.omega_plus]
    if poles or (hasattr(f, "near_pole") and np.any(f.near_pole(w + 0j))):
        raise PreconditionError("band contains a real pole of the model")
    im = np.abs(np.imag(_real_eval(f, w)))
    k = int(np.argmax(im))
    if im[k] > tol:
        raise PreconditionError(
            f"band is not a transparency window: max |Im f| = {im[k]:.3e} at omega = {w[k]!r}"
        )
    return float(im[k])


def v_derivative_on_band(f, band, n_grid=1024):
    """Central-difference ``v'(x)`` on a uniform grid of the squared band.

    End points use second-order one-sided differences.
    """
    x = np.linspace(band.x_minus, band.x_plus, n_grid)
    v = np.real(herglotz_v(f, x + 0j))
    return x, np.gradient(v, x, edge_order=2)


def transparency_bound(f, band: FrequencyBand, n_grid=1024, tol=1e-9):
    """Two-point and derivative forms of the transparency-window inequality.

    The parent report holds the worst grid pair ``w0 < w`` of
    ``g(w) = w^2 (f(w) - f_inf)``: ``lhs = g(w0)``, ``rhs = g(w)``. A child
    report holds ``lhs = f_inf``, ``rhs = min v'(x)``.

    Raises
    ------
    PreconditionError
        ``max |Im f| > 1e-10`` on the band or a pole inside it.
    """
    max_im = verify_transparency(f, band)
    w = np.linspace(band.omega_minus, band.omega_plus, n_grid)
    g = w * w * (np.real(_real_eval(f, w)) - f.f_inf)
    # best partner for each j is the running max over strictly earlier points
    arg_run = np.zeros(g.size, dtype=int)
    for j in range(1, g.size):
        arg_run[j] = j if g[j] > g[arg_run[j - 1]] else arg_run[j - 1]
    prev = arg_run[:-1]
    gap = g[1:] - g[prev]
    j = int(np.argmin(gap)) + 1
    i = int(prev[j - 1])
    x, dv = v_derivative_on_band(f, band, n_grid)
    kd = int(np.argmin(dv))
    deriv = BoundReport(
        name="transparency_derivative",
        band=band,
        lhs=f.f_inf,
        rhs=float(dv[kd]),
        tol=tol,
        witnesses=[(math.sqrt(x[kd]), float(dv[kd]))],
        notes="f_inf <= v'(x) by central differences on the squared band",
        extras={"max_abs_dv_minus_f_inf": float(np.max(np.abs(dv - f.f_inf)))},
    )
    return BoundReport(
        name="transparency",
        band=band,
        lhs=float(g[i]),
        rhs=float(g[j]),
        tol=tol,
        witnesses=[(float(w[i]), float(g[i])), (float(w[j]), float(g[j]))],
        notes="w0^2 (f(w0) - f_inf) <= w^2 (f(w) - f_inf) for all grid pairs w0 <= w",
        extras={"max_abs_im": max_im, "n_grid": n_grid},
        children=[deriv],
    )


# --------------------------------------------------------------------------
# lossy bounds
# --------------------------------------------------------------------------

def lossy_level_set_bound(f, band: FrequencyBand, Delta, n_grid=4096, tol=1e-9):
    """Length of ``{x in [x-, x+] : |v(x)| < Delta}`` against ``4 Delta / f_inf``.

    Crossings of ``|v| = Delta`` located on the grid are polished with Brent's
    method before the length is summed.
    """
    if not Delta > 0:
        raise DomainError("Delta must be positive")
    x = np.linspace(band.x_minus, band.x_plus, n_grid)
    absv = lambda t: float(abs(herglotz_v(f, complex(t)))) - Delta
    g = np.abs(herglotz_v(f, x + 0j)) - Delta
    s = np.sign(g)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    cuts = [brentq(absv, x[i], x[i + 1], xtol=1e-15) for i in idx]
    pts = np.concatenate([[x[0]], cuts, [x[-1]]])
    length = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi > lo and absv(0.5 * (lo + hi)) < 0:
            length += hi - lo
    rhs = 4.0 * Delta / f.f_inf
    full = bool(np.all(g < 0))
    notes = "|{x : |v(x)| < Delta}| <= 4 Delta / f_inf"
    if full:
        notes += "; |v| < Delta on the whole band, so the length is x+ - x-"
    return BoundReport(
        name="lossy_level_set",
        band=band,
        lhs=length,
        rhs=rhs,
        tol=tol,
        witnesses=[(math.sqrt(c), Delta) for c in cuts],
        notes=notes,
        extras={"Delta": Delta, "crossings_x": [float(c) for c in cuts], "whole_band": full},
    )


def _band_max(fun, lo, hi, n_grid):
    """Max of ``fun`` on ``[lo, hi]``: grid then ternary search in the bracketing cells."""
    w = np.linspace(lo, hi, n_grid)
    vals = fun(w)
    k = int(np.argmax(vals))  # first index: ties go to lower omega
    a, b = w[max(k - 1, 0)], w[min(k + 1, w.size - 1)]
    for _ in range(100):
        if b - a <= 1e-13 * max(1.0, abs(b)):
            break
        m1 = a + (b - a) / 3.0
        m2 = b - (b - a) / 3.0
        f1, f2 = fun(np.array([m1, m2]))
        if f1 >= f2:
            b = m2
        else:
            a = m1
    wr = 0.5 * (a + b)
    vr = float(fun(np.array([wr]))[0])
    if vr > vals[k]:
        return wr, vr
    return float(w[k]), float(vals[k])


def lossy_max_bound(f, band: FrequencyBand, n_grid=2048, tol=1e-9):
    """Lower bounds on ``max |w^2 f(w)|`` and ``max |w f(w)|`` over the band.

    Returns
    -------
    (BoundReport, BoundReport)
        ``(w+^2 - w-^2) f_inf / 4 <= max |w^2 f|`` and
        ``(w+ - w-) f_inf / 2 <= max |w f|``.
    """
    lo, hi = band.omega_minus, band.omega_plus
    w2, m2 = _band_max(lambda w: np.abs(w * w * _real_eval(f, w)), lo, hi, n_grid)
    w1, m1 = _band_max(lambda w: np.abs(w * _real_eval(f, w)), lo, hi, n_grid)
    r_v = BoundReport(
        name="lossy_max_v",
        band=band,
        lhs=0.25 * (hi * hi - lo * lo) * f.f_inf,
        rhs=m2,
        tol=tol,
        witnesses=[(w2, m2)],
        notes="(w+^2 - w-^2) f_inf / 4 <= max |w^2 f(w)|",
    )
    r_vt = BoundReport(
        name="lossy_max_vtilde",
        band=band,
        lhs=0.5 * (hi - lo) * f.f_inf,
        rhs=m1,
        tol=tol,
        witnesses=[(w1, m1)],
        notes="(w+ - w-) f_inf / 2 <= max |w f(w)|",
    )
    return r_v, r_vt


# --------------------------------------------------------------------------
# cloaking
# --------------------------------------------------------------------------

def _alpha_stack(resp, omegas):
    return np.array([np.asarray(resp.eval(complex(o)), dtype=complex) for o in omegas])


def scalar_response(alpha, E0):
    """``f = alpha E0 . conj(E0) = E0^H alpha E0`` for stacked 3x3 tensors."""
    E0 = np.asarray(E0, dtype=complex)
    return np.einsum("i,...ij,j->...", np.conj(E0), alpha, E0)


def tensor_transparency_check(resp, band, n_grid=64, rel_tol=PSD_REL_TOL):
    """Smallest eigenvalue over grid pairs of the Hermitian part of
    ``w^2 (alpha(w) - alpha_inf) - w0^2 (alpha(w0) - alpha_inf)`` with ``w0 <= w``.

    Eigenvalues are compared against ``-rel_tol * ||M||`` (spectral norm, at
    least 1).
    """
    w = np.linspace(band.omega_minus, band.omega_plus, n_grid)
    A = _alpha_stack(resp, w)
    ainf = np.asarray(resp.alpha_inf, dtype=complex)
    G = (w * w)[:, None, None] * (A - ainf[None])
    worst = (math.inf, 0, 0, 0.0)
    max_abs = 0.0
    for i in range(n_grid):
        D = G[i:] - G[i][None]
        H = 0.5 * (D + np.conj(np.swapaxes(D, -1, -2)))
        ev = np.linalg.eigvalsh(H)
        norms = np.maximum(np.max(np.abs(ev), axis=1), 1.0)
        max_abs = max(max_abs, float(np.max(np.abs(ev))))
        scaled = ev[:, 0] / norms
        k = int(np.argmin(scaled))
        if scaled[k] < worst[0]:
            worst = (float(scaled[k]), i, i + k, float(ev[k, 0]))
    s, i, j, lam = worst
    return BoundReport(
        name="tensor_transparency",
        band=band,
        lhs=0.0,
        rhs=s,
        tol=rel_tol,
        witnesses=[(float(w[i]), lam), (float(w[j]), lam)],
        notes="min eigenvalue / max(1, ||M||) of w^2 (alpha(w) - alpha_inf) - w0^2 (alpha(w0) - alpha_inf)",
        extras={"min_eigenvalue": lam, "max_abs_eigenvalue": max_abs, "n_grid": n_grid},
    )


def cloaking_envelope(alpha_resp, E0, band: FrequencyBand, omega0, n_grid=512, tol=1e-8,
                      tensor_grid=64):
    """Check the scalar response against the envelope forced by ``f(w0) = 0``.

    For ``w >= w0``: ``f(w) >= f_inf (w^2 - w0^2) / w^2``; for ``w <= w0``:
    ``f(w) <= -f_inf (w0^2 - w^2) / w^2``. The matrix form is attached as a
    child report.

    Returns
    -------
    report : BoundReport
    curve : list of tuple
        Rows ``(omega, value, envelope_lo, envelope_hi)``; unbounded sides
        are ``-inf`` / ``inf``.

    Raises
    ------
    PreconditionError
        ``Im f`` is not zero on the band (relative to ``f_inf``).
    """
    E0 = np.asarray(E0, dtype=complex)
    if E0.shape != (3,) or not np.any(E0):
        raise DomainError("E0 must be a non-zero 3-vector")
    if not omega0 > 0:
        raise DomainError("omega0 must be positive")
    ainf = np.asarray(alpha_resp.alpha_inf, dtype=complex)
    f_inf = float(np.real(scalar_response(ainf, E0)))
    if not f_inf > 0:
        raise PreconditionError("alpha_inf E0 . conj(E0) must be positive")
    w = np.linspace(band.omega_minus, band.omega_plus, n_grid)
    A = _alpha_stack(alpha_resp, w)
    fv = scalar_response(A, E0)
    max_im = float(np.max(np.abs(fv.imag)))
    if max_im > TRANSPARENCY_IM_TOL * max(1.0, f_inf):
        raise PreconditionError(f"band is not a transparency window for this E0: max |Im f| = {max_im:.3e}")
    f = fv.real
    upper = w >= omega0
    lo = np.where(upper, f_inf * (w * w - omega0**2) / (w * w), -np.inf)
    hi = np.where(upper, np.inf, -f_inf * (omega0**2 - w * w) / (w * w))
    # at w0 itself both sides apply
    at0 = w == omega0
    hi = np.where(at0, 0.0, hi)
    slack = np.minimum(f - lo, hi - f)
    k = int(np.argmin(slack))
    if upper[k] and not at0[k]:
        lhs, rhs = float(lo[k]), float(f[k])
    elif at0[k]:
        lhs, rhs = (float(lo[k]), float(f[k])) if f[k] - lo[k] <= hi[k] - f[k] else (float(f[k]), float(hi[k]))
    else:
        lhs, rhs = float(f[k]), float(hi[k])
    notes = []
    asym = float(np.max(np.abs(A - np.swapaxes(A, -1, -2)))) / max(1e-300, float(np.max(np.abs(A))))
    children = []
    if asym > 1e-10 and np.any(E0.imag != 0):
        warnings.warn("non-symmetric polarizability with complex E0: the matrix inequality does not "
                      "imply the scalar envelope", RuntimeWarning, stacklevel=2)
        notes.append("reciprocity not satisfied and E0 complex; matrix check skipped")
    else:
        children.append(tensor_transparency_check(alpha_resp, band, tensor_grid))
    f0 = None
    try:
        f0 = float(np.real(scalar_response(np.asarray(alpha_resp.eval(complex(omega0))), E0)))
    except DomainError:
        notes.append("response not evaluable at omega0")
    if f0 is not None and abs(f0) > 1e-8 * f_inf:
        notes.append(f"f(omega0) = {f0!r} is not zero; envelope assumes a cloak at omega0")
    up_slack = float(np.min((f - lo)[upper])) if np.any(upper) else math.inf
    low_slack = float(np.min((hi - f)[~upper | at0])) if np.any(~upper | at0) else math.inf
    report = BoundReport(
        name="cloaking_envelope",
        band=band,
        lhs=lhs,
        rhs=rhs,
        tol=tol,
        witnesses=[(float(w[k]), float(f[k]))],
        notes="; ".join(notes),
        extras={"omega0": omega0, "f_inf": f_inf, "f_omega0": f0, "upper_side_slack": up_slack,
                "lower_side_slack": low_slack, "max_abs_im": max_im},
        children=children,
    )
    curve = list(zip(w.tolist(), f.tolist(), lo.tolist(), hi.tolist()))
    return report, curve
