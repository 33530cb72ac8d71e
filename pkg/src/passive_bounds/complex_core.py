"""Complex square root and logarithm with the branch cut on the positive real axis.

Both functions take ``arg z`` in ``[0, 2*pi)``: points strictly off the
positive real axis get ``arg`` in ``(0, 2*pi)``, and points on the positive
real axis are assigned the limit from the upper half-plane (``arg = 0``).
A negative zero imaginary part is treated as ``+0`` so that real inputs are
always read as boundary values from above.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class StolzParams:
    """Opening of the Stolz sector ``theta <= arg z <= pi - theta``."""

    theta: float

    def __post_init__(self):
        if not (0.0 < self.theta < 0.5 * np.pi):
            raise DomainError(f"theta must lie in (0, pi/2), got {self.theta}")


def _as_complex(z):
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise DomainError("complex argument must be finite")
    return z


def branch_arg(z):
    """Argument of ``z`` in ``[0, 2*pi)``, zero on the positive real axis."""
    z = _as_complex(z)
    # -0.0 imaginary parts are read as +0.0 (limit from above)
    zz = z.real + 1j * np.where(z.imag == 0.0, 0.0, z.imag)
    a = np.angle(zz)
    return np.where(a < 0.0, a + TWO_PI, a)


def _wrap(out, z):
    return out[()] if np.ndim(z) == 0 else out


def branch_sqrt(z):
    """Square root with cut on ``R+``; the result lies in the closed upper half-plane.

    ``branch_sqrt(x) = |x|**0.5`` for ``x >= 0`` and ``branch_sqrt(0) = 0``.
    """
    zc = _as_complex(z)
    r = np.sqrt(np.abs(zc))
    a = branch_arg(zc)
    out = r * np.exp(0.5j * a)
    # exact values on the real axis
    on_pos = (zc.imag == 0.0) & (zc.real >= 0.0)
    on_neg = (zc.imag == 0.0) & (zc.real < 0.0)
    out = np.where(on_pos, r + 0j, out)
    out = np.where(on_neg, 1j * r, out)
    return _wrap(out, z)


def branch_log(z):
    """Logarithm with the same cut as :func:`branch_sqrt`.

    The imaginary part lies in ``[0, 2*pi)``; it is ``pi`` on the negative
    real axis and ``0`` on the positive real axis (limit from above).
    """
    zc = _as_complex(z)
    if np.any(zc == 0):
        raise DomainError("branch_log is undefined at z = 0")
    out = np.log(np.abs(zc)) + 1j * branch_arg(zc)
    return _wrap(out, z)


def in_stolz(z, p):
    """True iff ``p.theta <= arg z <= pi - p.theta``.

    Lower half-plane points are never inside the sector.
    """
    zc = _as_complex(z)
    if np.any(zc == 0):
        raise DomainError("arg is undefined at z = 0")
    a = branch_arg(zc)
    slack = 8.0 * np.finfo(float).eps * np.pi
    inside = (a >= p.theta - slack) & (a <= np.pi - p.theta + slack)
    return _wrap(np.asarray(inside), z) if np.ndim(z) else bool(inside)
