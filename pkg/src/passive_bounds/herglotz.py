"""Stieltjes and Herglotz transforms of passive responses, measure-composed
functions, band-limited sum rules and Stieltjes inversion.

For a passive response ``f`` the chain is::

    u(z)  = f(sqrt(-z))        Stieltjes on C \\ R-
    v(z)  = z * f(sqrt(z))     Herglotz, linear coefficient f_inf
    vt(z) = z * f(z)           Herglotz, odd symmetry
    v_m   = h_m o v            h_m(z) = int dm(xi) / (xi - z)

The boundary limit ``(1/pi) int_{x-}^{x+} Im v_m(x + i y) dx`` as ``y -> 0+``
is bounded by ``1/f_inf - m({0}) / f(0)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .complex_core import branch_log, branch_sqrt
from .dispersion import FrequencyBand
from .errors import DomainError, ExtrapolationError, SingularEvaluationError
from .quadrature import gauss_kronrod, graded_points, richardson
from .reports import SumRuleReport

DEFAULT_Y_SEQ = tuple(10.0 ** -k for k in range(1, 7))
ATOM_AT_ZERO = 1e-12
_IM_CLAMP = 1e-13


# --------------------------------------------------------------------------
# measures
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Density:
    """Non-negative density on ``[lo, hi]``.

    Exactly one of ``func`` (vectorized callable), ``samples`` (pair of
    arrays ``(xi, rho)`` interpolated linearly) or ``constant`` is set.
    """

    lo: float
    hi: float
    func: Optional[Callable] = None
    samples: Optional[tuple] = None
    constant: Optional[float] = None

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError("density interval must satisfy lo < hi")
        given = sum(x is not None for x in (self.func, self.samples, self.constant))
        if given != 1:
            raise DomainError("exactly one of func, samples, constant must be given")
        if self.constant is not None and self.constant < 0:
            raise DomainError("density must be non-negative")
        if self.samples is not None:
            xs, rho = (np.asarray(v, dtype=float) for v in self.samples)
            if xs.ndim != 1 or xs.shape != rho.shape or xs.size < 2 or np.any(np.diff(xs) <= 0):
                raise DomainError("sampled density needs increasing abscissae and matching values")
            if np.any(rho < 0):
                raise DomainError("density must be non-negative")
            object.__setattr__(self, "samples", (xs, rho))

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        inside = (xi >= self.lo) & (xi <= self.hi)
        if self.constant is not None:
            val = np.full(xi.shape, self.constant)
        elif self.samples is not None:
            val = np.interp(xi, *self.samples)
        else:
            val = np.asarray(self.func(xi), dtype=float)
        return np.where(inside, val, 0.0)

    def mass(self):
        if self.constant is not None:
            return self.constant * (self.hi - self.lo)
        return float(gauss_kronrod(self, self._breaks(), abstol=1e-13, reltol=1e-12).value)

    def _breaks(self):
        pts = [self.lo, self.hi]
        if self.samples is not None:
            xs = self.samples[0]
            pts.extend(xs[(xs > self.lo) & (xs < self.hi)])
        return np.unique(pts)


@dataclass(frozen=True, eq=False)
class Measure:
    """Positive measure made of point masses plus an optional interval density."""

    atoms: tuple = ()
    density: Optional[Density] = None

    def __post_init__(self):
        atoms = tuple((float(x), float(w)) for x, w in self.atoms)
        for x, w in atoms:
            if not (math.isfinite(x) and w > 0):
                raise DomainError(f"atom ({x}, {w}) needs finite position and positive mass")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def dirac(cls, xi=0.0, mass=1.0):
        return cls(((xi, mass),))

    @classmethod
    def uniform(cls, delta):
        """Normalized uniform measure on ``[-delta, delta]``."""
        if not delta > 0:
            raise DomainError("delta must be positive")
        return cls((), Density(-delta, delta, constant=0.5 / delta))

    def total_mass(self):
        return math.fsum(w for _, w in self.atoms) + (self.density.mass() if self.density else 0.0)

    def mass_at_zero(self):
        return math.fsum(w for x, w in self.atoms if abs(x) < ATOM_AT_ZERO)

    def support_bounds(self):
        pts = [x for x, _ in self.atoms]
        if self.density is not None:
            pts += [self.density.lo, self.density.hi]
        return (min(pts), max(pts)) if pts else (0.0, 0.0)

    def in_M_delta(self, delta, tol=1e-10):
        lo, hi = self.support_bounds()
        return lo >= -delta - tol and hi <= delta + tol and abs(self.total_mass() - 1.0) <= tol

    def on_support(self, x):
        """Mask of real points lying on the closed support."""
        x = np.asarray(x, dtype=float)
        mask = np.zeros(x.shape, dtype=bool)
        for xi, _ in self.atoms:
            mask |= x == xi
        if self.density is not None:
            mask |= (x >= self.density.lo) & (x <= self.density.hi)
        return mask

    def describe(self):
        parts = [f"dirac(xi={x!r}, mass={w!r})" for x, w in self.atoms]
        d = self.density
        if d is not None:
            if d.constant is not None:
                parts.append(f"uniform(lo={d.lo!r}, hi={d.hi!r}, rho={d.constant!r})")
            else:
                parts.append(f"density(lo={d.lo!r}, hi={d.hi!r})")
        return " + ".join(parts) if parts else "zero"


@dataclass(frozen=True)
class HerglotzTriple:
    """Representation data ``h(z) = alpha z + beta + int (1/(xi - z) - xi/(1 + xi^2)) dm``.

    ``gamma_shift`` is ``int xi/(1 + xi^2) dm`` when finite, so that
    ``h(z) = alpha z + (beta - gamma_shift) + h_m(z)``.
    """

    alpha: float
    beta: float
    measure: Measure
    gamma_shift: Optional[float] = None

    def __post_init__(self):
        if self.alpha < 0:
            raise DomainError("alpha must be non-negative")

    def eval(self, z):
        if self.gamma_shift is None:
            raise DomainError("evaluation needs gamma_shift for this measure")
        return self.alpha * np.asarray(z) + (self.beta - self.gamma_shift) + h_measure(self.measure, z)


# --------------------------------------------------------------------------
# transforms of f
# --------------------------------------------------------------------------

def _wrap(out, z):
    return out[()] if np.ndim(z) == 0 else out


def stieltjes_u(f, z):
    """``u(z) = f(sqrt(-z))``; defined off the closed negative real axis."""
    zc = np.asarray(z, dtype=complex)
    if np.any((zc.imag == 0) & (zc.real < 0)):
        raise DomainError("stieltjes_u is not defined on the negative real axis")
    return _wrap(np.asarray(f.eval(branch_sqrt(-zc))), z)


def herglotz_v(f, z):
    """``v(z) = z f(sqrt(z))``; real ``z > 0`` is read as the limit from above."""
    zc = np.asarray(z, dtype=complex)
    return _wrap(zc * f.eval(branch_sqrt(zc)), z)


def herglotz_vtilde(f, z):
    """``vt(z) = z f(z)`` on the closed upper half-plane."""
    zc = np.asarray(z, dtype=complex)
    return _wrap(zc * f.eval(zc), z)


def _clamp_upper(z):
    zc = np.asarray(z, dtype=complex)
    tiny = _IM_CLAMP * (1.0 + np.abs(zc))
    if np.any(zc.imag < -tiny):
        raise DomainError("h_measure is defined on the closed upper half-plane")
    return np.where(zc.imag < 0, zc.real + 0j, zc)


def _density_transform(d: Density, z):
    """``int rho(xi) / (xi - z) dxi`` for each entry of ``z`` (upper half-plane or real)."""
    if d.constant is not None:
        w = (z - d.hi) / (z - d.lo)
        # w stays in the closed upper half-plane; rounding must not push it across the cut
        w = np.where(w.imag < 0, w.real + 0j, w)
        return d.constant * branch_log(w)
    out = np.empty(z.shape, dtype=complex)
    base = d._breaks()
    for idx, zz in np.ndenumerate(z):
        x, y = zz.real, zz.imag
        if y > 0:
            pts = np.append(base, graded_points(x, y, d.lo, d.hi)) if d.lo < x < d.hi else base
            res = gauss_kronrod(lambda t: d(t) / (t - zz), pts, abstol=1e-13, reltol=1e-11)
            out[idx] = res.value
        else:
            # principal value plus i*pi*rho(x) by subtraction of the local value
            r0 = float(d(x))
            pts = np.append(base, x)
            g = lambda t: np.where(t == x, 0.0, (d(t) - r0) / np.where(t == x, 1.0, t - x))
            pv = gauss_kronrod(g, pts, abstol=1e-13, reltol=1e-11).value
            pv += r0 * math.log((d.hi - x) / (x - d.lo))
            out[idx] = pv + 1j * math.pi * r0
    return out


def h_measure(m: Measure, z):
    """``h_m(z) = int dm(xi) / (xi - z)`` on the closed upper half-plane.

    Real ``z`` is allowed off the support of ``m``; for a density it is also
    allowed in the open interior, where the limit from above is returned.

    Raises
    ------
    SingularEvaluationError
        Real ``z`` on an atom or at an endpoint of the density interval.
    """
    zc = _clamp_upper(z)
    real = zc.imag == 0
    for xi, _ in m.atoms:
        if np.any(real & (zc.real == xi)):
            raise SingularEvaluationError(f"real evaluation point on the atom at {xi}")
    d = m.density
    if d is not None and np.any(real & ((zc.real == d.lo) | (zc.real == d.hi))):
        raise SingularEvaluationError("real evaluation point at an endpoint of the density support")
    out = np.zeros(zc.shape, dtype=complex)
    for xi, w in m.atoms:
        out += w / (xi - zc)
    if d is not None:
        out += _density_transform(d, zc)
    return _wrap(out, z)


def compose_vm(m: Measure, f, z):
    """``v_m(z) = h_m(v(z))`` with ``v(z) = z f(sqrt(z))``.

    Raises
    ------
    SingularEvaluationError
        Real ``z`` where ``v(z)`` lands on the support of ``m``; take the
        boundary limit through :func:`sum_rule_integral` instead.
    """
    w = np.asarray(herglotz_v(f, z), dtype=complex)
    zc = np.asarray(z, dtype=complex)
    if np.any(zc.imag == 0):
        hit = (zc.imag == 0) & (np.abs(w.imag) <= _IM_CLAMP * (1 + np.abs(w))) & m.on_support(w.real)
        if np.any(hit):
            raise SingularEvaluationError(
                "v(z) lies on the support of m for real z; use the y -> 0+ limit path (sum_rule_integral)"
            )
    return _wrap(np.asarray(h_measure(m, w)), z)


# --------------------------------------------------------------------------
# boundary limits
# --------------------------------------------------------------------------

def _extrapolate(y_seq, vals):
    ex = richardson(np.asarray(y_seq), np.asarray(vals))
    if ex.non_monotone:
        warnings.warn("per-y values are non-monotone; extrapolation may be unreliable", RuntimeWarning, stacklevel=3)
    return ex


def _check_y_seq(y_seq):
    y = np.asarray(y_seq, dtype=float)
    if y.ndim != 1 or y.size < 2 or np.any(y <= 0) or np.any(np.diff(y) >= 0):
        raise DomainError("y_seq must be a strictly decreasing sequence of positive values (length >= 2)")
    return y


def _crossings(x, g, fun):
    """Roots of ``fun`` bracketed by sign changes of the samples ``g`` on ``x``."""
    s = np.sign(g)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    roots = [brentq(fun, x[i], x[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps) for i in idx]
    roots += list(x[s == 0])
    return roots


class _AxisCache:
    """Real-axis samples of ``Re v`` on the squared band, shared across measures."""

    def __init__(self, f, band, n=2049):
        self.f = f
        self.band = band
        self.x = np.linspace(band.x_minus, band.x_plus, n)
        self.rev = np.real(herglotz_v(f, self.x + 0j))

    def re_v(self, x):
        return float(np.real(herglotz_v(self.f, complex(x))))

    def levels(self, m: Measure):
        lv = [xi for xi, _ in m.atoms]
        if m.density is not None:
            lv += [m.density.lo, m.density.hi]
        return lv

    def breakpoints(self, m: Measure):
        pts = []
        for c in self.levels(m):
            pts += _crossings(self.x, self.rev - c, lambda t, c=c: self.re_v(t) - c)
        return sorted(pts)


def _band_integral(f, m, band, y, crossings, quad_tol, seed=None):
    lo, hi = band.x_minus, band.x_plus
    pts = [np.array([lo, hi])]
    for c in crossings:
        pts.append(graded_points(c, y, lo, hi))
    if seed is not None:
        pts.append(seed)
    brk = np.unique(np.concatenate(pts))

    def integrand(x):
        return np.imag(h_measure(m, herglotz_v(f, x + 1j * y)))

    res = gauss_kronrod(integrand, brk, abstol=quad_tol, reltol=quad_tol)
    return res.value / math.pi, res


def sum_rule_integral(f, m: Measure, band: FrequencyBand, y_seq=DEFAULT_Y_SEQ, quad_tol=1e-10,
                      tol=1e-6, _axis=None):
    """Boundary limit of ``(1/pi) int_{x-}^{x+} Im v_m(x + i y) dx`` and its bound.

    Parameters
    ----------
    f : DispersionModel
    m : Measure
    band : FrequencyBand
        Frequency band; the integral runs over the squared band.
    y_seq : sequence of float
        Strictly decreasing offsets; the limit is taken by Richardson
        extrapolation over them.
    quad_tol : float
        Absolute and relative tolerance of each band quadrature.
    tol : float
        Pass criterion ``integral <= 1/f_inf - m({0})/f(0) + tol``.

    Returns
    -------
    SumRuleReport
    """
    y = _check_y_seq(y_seq)
    axis = _axis if _axis is not None else _AxisCache(f, band)
    crossings = axis.breakpoints(m)
    vals, n_evals = [], 0
    seed = None
    for yk in y:
        val, res = _band_integral(f, m, band, yk, crossings, quad_tol, seed)
        vals.append(val)
        n_evals += res.n_evals
        seed = res.panels[:, 0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        ex = richardson(y, vals)
    m0 = m.mass_at_zero()
    f0 = f.static_value()
    b = 0.0 if m0 == 0.0 else m0 / f0
    return SumRuleReport(
        band=band,
        measure_desc=m.describe(),
        integral_value=ex.value,
        a_minus1=1.0 / f.f_inf,
        b_minus1=b,
        tol=tol,
        y_sequence_used=list(map(float, y)),
        per_y_values=vals,
        extrapolation_error_estimate=ex.error,
        non_monotone=ex.non_monotone,
        extras={"detected_order": ex.order, "n_evals": n_evals, "crossings": crossings},
    )


def dirac_sup_scan(f, band: FrequencyBand, Delta, n_grid=512, y_seq=DEFAULT_Y_SEQ, quad_tol=1e-10,
                   refine_tol=1e-9, tie=1e-9):
    """Maximize the Dirac sum-rule value over ``xi in [-Delta, Delta]``.

    A grid scan is refined by golden-section search on the cells adjacent
    to the best grid point. Near-ties (within ``tie``) go to the smaller
    ``|xi|``; the default sits above the extrapolation noise of a plateau.

    Returns
    -------
    (xi_star, value) : tuple of float
    """
    if not Delta > 0:
        raise DomainError("Delta must be positive")
    if n_grid < 3:
        raise DomainError("n_grid must be >= 3")
    axis = _AxisCache(f, band)
    cache = {}

    def value(xi):
        xi = float(xi)
        if xi not in cache:
            cache[xi] = sum_rule_integral(f, Measure.dirac(xi), band, y_seq, quad_tol, _axis=axis).integral_value
        return cache[xi]

    grid = np.linspace(-Delta, Delta, int(n_grid))
    vals = np.array([value(x) for x in grid])
    best = _argbest(grid, vals, tie)
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid.size - 1)]
    xr = _golden_max(value, lo, hi, refine_tol * Delta)
    cands = np.array([grid[best], xr])
    cvals = np.array([value(c) for c in cands])
    k = _argbest(cands, cvals, tie)
    return float(cands[k]), float(cvals[k])


def _argbest(xs, vals, tie):
    top = np.max(vals)
    near = np.flatnonzero(vals >= top - tie)
    return int(near[np.argmin(np.abs(xs[near]))])


def _golden_max(fun, a, b, xtol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while abs(b - a) > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return c if fc >= fd else d


def extract_measure_mass(h, interval, y_seq=DEFAULT_Y_SEQ, quad_tol=1e-10, n_init=64):
    """Stieltjes inversion: ``(m([a,b]) + m((a,b))) / 2`` from ``Im h`` near the axis.

    Parameters
    ----------
    h : callable
        Vectorized Herglotz evaluator on the upper half-plane.
    interval : (float, float)
    y_seq : sequence of float
        Strictly decreasing offsets. The adaptive mesh of each level seeds the
        next so that peaks of width ``~y`` are tracked as they sharpen.

    Returns
    -------
    float
    """
    a, b = map(float, interval)
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise DomainError("interval must be finite with a < b")
    y = _check_y_seq(y_seq)
    seed = np.linspace(a, b, n_init + 1)
    vals = []
    for yk in y:
        res = gauss_kronrod(lambda x: np.imag(h(x + 1j * yk)), seed, abstol=quad_tol, reltol=quad_tol)
        vals.append(res.value / math.pi)
        seed = np.append(res.panels[:, 0], b)
    return _extrapolate(y, vals).value


def herglotz_coefficients(h, y_seq=None):
    """``alpha = lim h(iy)/(iy)`` and ``beta = Re h(i)``.

    ``alpha`` is extrapolated in ``1/y`` from ``Im h(iy) / y`` on a geometric
    grid ``y = 1e2 .. 1e8``.

    Raises
    ------
    ExtrapolationError
        When the samples do not settle (e.g. ``h`` grows faster than linearly).
    """
    ys = np.asarray(y_seq if y_seq is not None else 10.0 ** np.arange(2, 9), dtype=float)
    g = np.array([np.imag(complex(h(1j * yy))) / yy for yy in ys])
    if not np.all(np.isfinite(g)):
        raise ExtrapolationError("h(iy)/y is not finite on the sample grid")
    ex = richardson(1.0 / ys, g)
    scale = 1.0 + abs(ex.value)
    if ex.error > 1e-6 * scale or abs(g[-1] - ex.value) > 1e-3 * scale:
        raise ExtrapolationError(
            f"h(iy)/(iy) does not converge: last samples {g[-3:].tolist()}, estimate error {ex.error:.3g}"
        )
    beta = float(np.real(complex(h(1j))))
    return float(ex.value), beta
