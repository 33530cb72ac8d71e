"""Frequency-domain response models satisfying causality, symmetry and passivity.

A model is a function ``f(z)`` on the closed upper half-plane that is
analytic in the open half-plane, tends to ``f_inf > 0`` at infinity, obeys
``f(-conj z) = conj f(z)`` and has ``Im f(omega) >= 0`` for ``omega > 0``.
"""

from __future__ import annotations

import csv
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, LoadError, PassivityLoadError, PoleError, UnsupportedDomainError
from .reports import BoundReport

DEFAULT_TOL = 1e-9
POLE_GUARD = 1e-8


@dataclass(frozen=True)
class FrequencyBand:
    """Band ``[omega_minus, omega_plus]`` and its squared image ``[x_minus, x_plus]``."""

    omega_minus: float
    omega_plus: float

    def __post_init__(self):
        if not (0.0 < self.omega_minus < self.omega_plus) or not math.isfinite(self.omega_plus):
            raise DomainError(
                f"band needs 0 < omega_minus < omega_plus, got [{self.omega_minus}, {self.omega_plus}]"
            )

    @classmethod
    def from_x(cls, x_minus, x_plus):
        return cls(math.sqrt(x_minus), math.sqrt(x_plus))

    @property
    def x_minus(self):
        return self.omega_minus**2

    @property
    def x_plus(self):
        return self.omega_plus**2

    def contains(self, omega):
        return self.omega_minus <= omega <= self.omega_plus

    def to_dict(self):
        return {
            "omega_minus": self.omega_minus,
            "omega_plus": self.omega_plus,
            "x_minus": self.x_minus,
            "x_plus": self.x_plus,
        }


def _prepare(z):
    zc = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(zc)):
        raise DomainError("frequency must be finite")
    if np.any(zc.imag < 0):
        raise DomainError("models are defined on the closed upper half-plane only")
    return zc


def _out(val, z):
    return val[()] if np.ndim(z) == 0 else val


class DispersionModel(ABC):
    """Base class: subclasses provide ``_eval`` on a complex array."""

    f_inf: float

    def eval(self, z):
        zc = _prepare(z)
        mask = self.near_pole(zc)
        if np.any(mask):
            bad = zc[mask].ravel()[0]
            raise PoleError(f"evaluation at {bad} is within the exclusion zone of a real pole")
        return _out(self._eval(zc), z)

    __call__ = eval

    @abstractmethod
    def _eval(self, z: np.ndarray) -> np.ndarray: ...

    def real_poles(self):
        """Non-negative real frequencies where the model is singular."""
        return ()

    def near_pole(self, z):
        z = np.asarray(z, dtype=complex)
        mask = np.zeros(z.shape, dtype=bool)
        for p in self.real_poles():
            guard = POLE_GUARD * (1.0 + abs(p))
            mask |= np.abs(z - p) < guard
            mask |= np.abs(z + p) < guard
        return mask

    def static_value(self):
        """``f(0)``; ``inf`` when the model has a pole at zero."""
        if any(p == 0.0 for p in self.real_poles()):
            return math.inf
        return float(np.real(self.eval(0.0)))

    @property
    def lossless(self) -> bool:
        return False

    def describe(self) -> str:
        return repr(self)


@dataclass(frozen=True)
class LossyDrude(DispersionModel):
    """``f(z) = f_inf * (1 - omega_p**2 / (z**2 + i*gamma*z))``."""

    f_inf: float
    omega_p: float
    gamma: float = 0.0

    def __post_init__(self):
        if not self.f_inf > 0:
            raise DomainError("f_inf must be positive")
        if self.gamma < 0:
            raise DomainError("gamma must be non-negative")

    def _eval(self, z):
        return self.f_inf * (1.0 - self.omega_p**2 / (z * (z + 1j * self.gamma)))

    def real_poles(self):
        return (0.0,)

    @property
    def lossless(self):
        return self.gamma == 0.0


@dataclass(frozen=True)
class LossyLorentz(DispersionModel):
    """``f(z) = f_inf - sum A_n / (z**2 - xi_n + i*gamma_n*z)``; terms are ``(A, xi, gamma)``."""

    f_inf: float
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(tuple(float(v) for v in t) for t in self.terms))
        if not self.f_inf > 0:
            raise DomainError("f_inf must be positive")
        for a, xi, g in self.terms:
            if a <= 0 or xi < 0 or g < 0:
                raise DomainError(f"invalid Lorentz term (A={a}, xi={xi}, gamma={g})")

    def _eval(self, z):
        out = np.full(z.shape, self.f_inf, dtype=complex)
        for a, xi, g in self.terms:
            out -= a / (z * z - xi + 1j * g * z)
        return out

    def real_poles(self):
        return tuple(math.sqrt(xi) for a, xi, g in self.terms if g == 0.0 or xi == 0.0)

    @property
    def lossless(self):
        return all(g == 0.0 for _, _, g in self.terms)


@dataclass(frozen=True)
class GeneralizedLorentzLossless(DispersionModel):
    """``f(z) = f_inf - sum A_n / (z**2 - xi_n)`` with ``A_n > 0``, ``xi_n >= 0``."""

    f_inf: float
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(tuple(float(v) for v in t) for t in self.terms))
        if not self.f_inf > 0:
            raise DomainError("f_inf must be positive")
        for a, xi in self.terms:
            if a <= 0 or xi < 0:
                raise DomainError(f"invalid lossless Lorentz term (A={a}, xi={xi})")

    def _eval(self, z):
        out = np.full(z.shape, self.f_inf, dtype=complex)
        for a, xi in self.terms:
            out -= a / (z * z - xi)
        return out

    def real_poles(self):
        return tuple(math.sqrt(xi) for _, xi in self.terms)

    @property
    def lossless(self):
        return True


def constant(c) -> GeneralizedLorentzLossless:
    """Frequency-independent response ``f = c``."""
    return GeneralizedLorentzLossless(float(c), ())


@dataclass(frozen=True, eq=False)
class Tabulated(DispersionModel):
    """Real-axis samples interpolated with a shape-preserving cubic.

    Negative frequencies are served by ``f(-w) = conj f(w)`` unless the grid
    itself extends below zero, in which case the stored samples are used.
    """

    grid: np.ndarray
    values: np.ndarray
    f_inf: float

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise DomainError("grid and values must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(grid) <= 0):
            raise DomainError("grid must be strictly increasing")
        if not self.f_inf > 0:
            raise DomainError("f_inf must be positive")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_re", PchipInterpolator(grid, values.real, extrapolate=False))
        object.__setattr__(self, "_im", PchipInterpolator(grid, values.imag, extrapolate=False))

    def _eval(self, z):
        if np.any(z.imag > 0):
            raise UnsupportedDomainError("tabulated models are available on the real axis only")
        w = z.real
        reflect = (w < 0) & (self.grid[0] >= 0)
        wq = np.where(reflect, -w, w)
        if np.any(wq < self.grid[0]) or np.any(wq > self.grid[-1]):
            raise DomainError(f"frequency outside tabulated range [{self.grid[0]}, {self.grid[-1]}]")
        out = self._re(wq) + 1j * self._im(wq)
        return np.where(reflect, np.conj(out), out)

    def static_value(self):
        if self.grid[0] > 0:
            return float(self.values[0].real)
        return float(np.real(self.eval(0.0)))

    def describe(self):
        return f"Tabulated({self.grid.size} knots on [{self.grid[0]}, {self.grid[-1]}], f_inf={self.f_inf})"


def eval(model, z):
    """Evaluate ``model`` at ``z`` in the closed upper half-plane."""
    return model.eval(z)


def _band_samples(model, band, n_samples):
    w = np.linspace(band.omega_minus, band.omega_plus, int(n_samples))
    if isinstance(model, Tabulated):
        knots = model.grid[(model.grid >= band.omega_minus) & (model.grid <= band.omega_plus)]
        w = np.union1d(w, knots)
    return w


def check_passivity(model, band, n_samples=1024, tol=DEFAULT_TOL):
    """Minimum of ``Im f`` over samples of ``band``; passes iff it is ``>= -tol``."""
    if n_samples < 2:
        raise DomainError("n_samples must be >= 2")
    w = _band_samples(model, band, n_samples)
    poles = np.asarray(model.near_pole(w + 0j), dtype=bool) if hasattr(model, "near_pole") else np.zeros(w.shape, bool)
    wk = w[~poles]
    im = np.imag(model.eval(wk + 0j)) if wk.size else np.array([])
    notes = []
    if poles.any():
        notes.append("skipped samples at lossless poles: " + ", ".join(repr(float(x)) for x in w[poles]))
    if im.size == 0:
        return BoundReport("passivity", band, 0.0, math.nan, tol, [], "; ".join(notes + ["no usable samples"]))
    k = int(np.argmin(im))
    bad = wk[im < -tol]
    if bad.size:
        notes.append("Im f < 0 at omega = " + ", ".join(repr(float(x)) for x in bad[:20]))
    return BoundReport(
        name="passivity",
        band=band,
        lhs=0.0,
        rhs=float(im[k]),
        tol=tol,
        witnesses=[(float(wk[k]), float(im[k]))] + [(float(x), float(v)) for x, v in zip(bad[:20], im[im < -tol][:20])],
        notes="; ".join(notes),
        extras={"n_samples": int(w.size), "skipped_poles": [float(x) for x in w[poles]]},
    )


def check_symmetry(model, samples, tol=DEFAULT_TOL):
    """Max of ``|f(-conj z) - conj f(z)|`` over ``samples`` in the closed upper half-plane."""
    z = np.atleast_1d(np.asarray(samples, dtype=complex))
    dev = np.abs(model.eval(-np.conj(z)) - np.conj(model.eval(z)))
    k = int(np.argmax(dev))
    band = None
    pos = np.abs(z.real[z.real > 0])
    if pos.size >= 2 and pos.min() < pos.max():
        band = FrequencyBand(float(pos.min()), float(pos.max()))
    return BoundReport(
        name="symmetry",
        band=band,
        lhs=float(dev[k]),
        rhs=0.0,
        tol=tol,
        witnesses=[(float(abs(z[k])), complex(z[k]))],
        notes=f"max |f(-conj z) - conj f(z)| at z = {complex(z[k])}",
    )


def load_tabulated(path, strict=True, tol=DEFAULT_TOL):
    """Read ``omega,re_f,im_f`` CSV with an optional ``# f_inf=<value>`` comment line.

    With ``strict`` a sample with ``Im f < -tol`` raises :class:`PassivityLoadError`.
    Without ``f_inf`` in the header the last real part is used.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise LoadError(f"cannot read {path}: {exc}") from exc
    f_inf = None
    rows = []
    header = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.replace(" ", "").startswith("f_inf="):
                try:
                    f_inf = float(body.split("=", 1)[1])
                except ValueError as exc:
                    raise LoadError(f"bad f_inf value: {body}", row=lineno) from exc
            continue
        if header is None:
            header = [h.strip() for h in next(csv.reader([line]))]
            missing = {"omega", "re_f", "im_f"} - set(header)
            if missing:
                raise LoadError(f"missing columns: {sorted(missing)}", row=lineno)
            continue
        cells = next(csv.reader([line]))
        if len(cells) != len(header):
            raise LoadError(f"expected {len(header)} columns, got {len(cells)}", row=lineno)
        rec = dict(zip(header, cells))
        try:
            w, re_f, im_f = float(rec["omega"]), float(rec["re_f"]), float(rec["im_f"])
        except ValueError as exc:
            raise LoadError(f"non-numeric entry: {line}", row=lineno) from exc
        if not (math.isfinite(w) and math.isfinite(re_f) and math.isfinite(im_f)):
            raise LoadError("non-finite entry", row=lineno)
        if w <= 0:
            raise LoadError(f"omega must be positive, got {w}", row=lineno, omega=w)
        if rows and w <= rows[-1][1]:
            raise LoadError(f"omega not strictly increasing at {w}", row=lineno, omega=w)
        if strict and im_f < -tol:
            raise PassivityLoadError(f"Im f = {im_f} < 0 at omega = {w}", row=lineno, omega=w)
        rows.append((lineno, w, re_f, im_f))
    if header is None:
        raise LoadError("missing header line omega,re_f,im_f")
    if len(rows) < 2:
        raise LoadError("need at least two samples")
    grid = np.array([r[1] for r in rows])
    vals = np.array([r[2] + 1j * r[3] for r in rows])
    if f_inf is None:
        f_inf = float(vals[-1].real)
    if not f_inf > 0:
        raise LoadError(f"f_inf must be positive, got {f_inf}")
    return Tabulated(grid, vals, f_inf)


MODEL_TYPES = ("drude", "lorentz", "lorentz_lossless", "constant", "tabulated")


def model_from_dict(spec, base_dir=None):
    """Build a model from a config table.

    Recognized ``type`` values: ``drude`` (``f_inf``, ``omega_p``, ``gamma``),
    ``lorentz`` (``f_inf``, ``terms = [[A, xi, gamma], ...]``),
    ``lorentz_lossless`` (``f_inf``, ``terms = [[A, xi], ...]``),
    ``constant`` (``value``) and ``tabulated`` (``path``, relative to
    ``base_dir``). A bare number is a constant.
    """
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return constant(float(spec))
    if not isinstance(spec, dict) or "type" not in spec:
        raise DomainError(f"model spec must be a number or a table with 'type', got {spec!r}")
    kind = spec["type"]
    try:
        if kind == "drude":
            return LossyDrude(float(spec.get("f_inf", 1.0)), float(spec["omega_p"]), float(spec.get("gamma", 0.0)))
        if kind == "lorentz":
            return LossyLorentz(float(spec.get("f_inf", 1.0)), tuple(tuple(t) for t in spec["terms"]))
        if kind == "lorentz_lossless":
            return GeneralizedLorentzLossless(float(spec.get("f_inf", 1.0)), tuple(tuple(t) for t in spec["terms"]))
        if kind == "constant":
            return constant(float(spec["value"]))
        if kind == "tabulated":
            p = Path(spec["path"])
            if base_dir is not None and not p.is_absolute():
                p = Path(base_dir) / p
            return load_tabulated(p, strict=bool(spec.get("strict", True)))
    except KeyError as exc:
        raise DomainError(f"model type {kind!r} is missing key {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"bad parameters for model type {kind!r}: {exc}") from exc
    raise DomainError(f"unknown model type {kind!r}; expected one of {MODEL_TYPES}")
