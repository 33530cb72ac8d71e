"""Polarizability tensors as functions of frequency, and their scalar projections."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from ..dispersion import DispersionModel
from ..errors import DomainError
from .analytic import coated_sphere_alpha


class PolarizabilityResponse(ABC):
    """3x3 complex ``alpha(omega)`` on the closed upper half-plane with real limit ``alpha_inf``."""

    alpha_inf: np.ndarray

    @abstractmethod
    def eval(self, omega) -> np.ndarray: ...

    def near_pole(self, omega):
        return np.zeros(np.shape(omega), dtype=bool)


@dataclass(frozen=True, eq=False)
class ConstantTensor(PolarizabilityResponse):
    """Frequency-independent ``alpha``."""

    alpha: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=complex).reshape(3, 3))

    @property
    def alpha_inf(self):
        return self.alpha.real.copy()

    def eval(self, omega):
        return self.alpha.copy()


@dataclass(frozen=True, eq=False)
class SharpDrudeTensor(PolarizabilityResponse):
    """``alpha(w) = alpha_inf - w0^2 (alpha_inf - alpha_w0) / w^2``.

    With ``alpha_w0 = 0`` this is ``alpha_inf (1 - w0^2 / w^2)``, the response
    that meets the transparency bound with equality.
    """

    alpha_inf: np.ndarray
    omega0: float
    alpha_w0: np.ndarray | None = None

    def __post_init__(self):
        ai = np.asarray(self.alpha_inf, dtype=float).reshape(3, 3)
        object.__setattr__(self, "alpha_inf", ai)
        a0 = np.zeros((3, 3)) if self.alpha_w0 is None else np.asarray(self.alpha_w0, dtype=complex).reshape(3, 3)
        object.__setattr__(self, "alpha_w0", a0)
        if not self.omega0 > 0:
            raise DomainError("omega0 must be positive")

    def eval(self, omega):
        w = complex(omega)
        if w == 0:
            raise DomainError("sharp Drude tensor has a pole at omega = 0")
        return self.alpha_inf - self.omega0**2 * (self.alpha_inf - self.alpha_w0) / (w * w)


@dataclass(frozen=True, eq=False)
class CoatedSphereResponse(PolarizabilityResponse):
    """Coated sphere ``alpha(w) I`` from the closed-form dipole coefficient."""

    a: float
    b: float
    eps_core: object
    eps_shell: object
    eps0: float = 1.0

    def scalar(self, omega):
        return coated_sphere_alpha(self.a, self.b, self.eps_core, self.eps_shell, self.eps0, omega)

    def eval(self, omega):
        return self.scalar(omega) * np.eye(3, dtype=complex)

    @property
    def alpha_inf(self):
        e1 = getattr(self.eps_core, "f_inf", self.eps_core)
        e2 = getattr(self.eps_shell, "f_inf", self.eps_shell)
        return np.real(coated_sphere_alpha(self.a, self.b, float(e1), float(e2), self.eps0, 0.0)) * np.eye(3)


class ScalarProjection(DispersionModel):
    """``f(w) = E0^H alpha(w) E0`` as a dispersion model with ``f_inf = E0^H alpha_inf E0``."""

    def __init__(self, response: PolarizabilityResponse, E0):
        E0 = np.asarray(E0, dtype=complex)
        if E0.shape != (3,) or not np.any(E0):
            raise DomainError("E0 must be a non-zero 3-vector")
        self.response = response
        self.E0 = E0
        self.f_inf = float(np.real(np.conj(E0) @ np.asarray(response.alpha_inf) @ E0))
        if not self.f_inf > 0:
            raise DomainError("projected alpha_inf must be positive")

    def _eval(self, z):
        out = np.empty(z.shape, dtype=complex)
        for idx, zz in np.ndenumerate(z):
            out[idx] = np.conj(self.E0) @ self.response.eval(complex(zz)) @ self.E0
        return out

    def near_pole(self, z):
        return np.asarray(self.response.near_pole(z), dtype=bool)

    def static_value(self):
        try:
            return float(np.real(self.eval(0.0)))
        except DomainError:
            return math.inf

    def describe(self):
        return f"ScalarProjection({type(self.response).__name__}, E0={self.E0.tolist()})"
