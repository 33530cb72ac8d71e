"""Cell-centred finite-volume solver for the quasi-static scattered potential.

Solves ``div(eps grad V_s) = div((eps - eps0) E0)`` in a cubic box with
``V_s = 0`` on the boundary, then extracts the induced dipole from the
volume integral of ``(eps - eps0) E`` and the monopole from the flux of
``-eps0 dV_s/dn`` through a closed cell surface.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pyamg
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, bicgstab, cg

from ..errors import QualityError, SolverError
from .scene import SceneSpec, cell_membership, region_fractions, shell_radius_for_flux

DEFAULT_DELTA = 1e-6
SOLVER_RTOL = 1e-10
MONOPOLE_TOL = 1e-2
SMOOTHING = ("subpixel", "staircase")


@dataclass
class PotentialGrid:
    """Scattered potential at cell centres plus the face data needed downstream."""

    scene: SceneSpec
    omega: complex
    E0: np.ndarray
    Vs: np.ndarray
    eps_faces: tuple
    delta: float
    residuals: list = field(default_factory=list)
    smoothing: str = "subpixel"

    @property
    def h(self):
        return self.scene.h

    def total_potential(self):
        """``V = -E0 . x + V_s`` at cell centres."""
        c = self.scene.centers()
        X, Y, Z = np.meshgrid(c, c, c, indexing="ij")
        return -(self.E0[0] * X + self.E0[1] * Y + self.E0[2] * Z) + self.Vs


@dataclass
class DipoleResult:
    p: np.ndarray
    Q: complex
    alpha_column: np.ndarray
    monopole_ratio: float = 0.0


# --------------------------------------------------------------------------
# permittivity on faces
# --------------------------------------------------------------------------

def _region_eps(scene, omega, delta):
    """Per-region permittivity; lossless dispersive materials get ``+ i delta eps0``."""
    vals, used = [], 0.0
    for reg in scene.regions:
        e = reg.eps(omega)
        if reg.dispersive and e.imag == 0.0:
            e = e + 1j * delta * scene.background_eps
            used = delta
        vals.append(e)
    return vals, used


def _face_points(scene, axis):
    c = scene.centers()
    f = 0.5 * (c[:-1] + c[1:])
    axes = [c, c, c]
    axes[axis] = f
    return np.meshgrid(*axes, indexing="ij")


def face_permittivity(scene: SceneSpec, omega, smoothing="subpixel", delta=DEFAULT_DELTA):
    """Permittivity tensor rows on the interior faces normal to x, y and z.

    ``staircase`` takes the harmonic mean of the two cell-centre values and
    has no off-diagonal part. ``subpixel`` blends region volume fractions
    over the dual cell of each face into ``<eps> I + (1/<1/eps> - <eps>) n n^T``,
    with ``n`` the normal of the region cut most evenly by that cell.

    Returns
    -------
    faces : tuple of ndarray
        ``faces[d][e]`` is ``K_de`` on the faces normal to axis ``d``; shapes
        ``(3, n-1, n, n)``, ``(3, n, n-1, n)``, ``(3, n, n, n-1)``.
    delta_used : float
    """
    if smoothing not in SMOOTHING:
        raise ValueError(f"smoothing must be one of {SMOOTHING}")
    eb = complex(scene.background_eps)
    eps_r, used = _region_eps(scene, omega, delta)
    faces = []
    if smoothing == "staircase":
        owner = cell_membership(scene)
        table = np.array([eb] + eps_r, dtype=complex)
        cell = table[owner + 1]
        for ax in range(3):
            lo = np.take(cell, np.arange(scene.grid_n - 1), axis=ax)
            hi = np.take(cell, np.arange(1, scene.grid_n), axis=ax)
            K = np.zeros((3,) + lo.shape, dtype=complex)
            K[ax] = 2.0 * lo * hi / (lo + hi)
            faces.append(K)
        return tuple(faces), used
    for ax in range(3):
        X, Y, Z = _face_points(scene, ax)
        fr = region_fractions(scene, X, Y, Z)
        tot = np.zeros(X.shape)
        for phi, _ in fr:
            tot += phi
        # overlapping ramps near touching interfaces can sum past one
        norm = np.maximum(tot, 1.0)
        mean = (1.0 - tot / norm) * eb
        inv = (1.0 - tot / norm) / eb
        best = np.zeros(X.shape)
        nvec = np.zeros((3,) + X.shape)
        for (phi, nrm), e in zip(fr, eps_r):
            w = phi / norm
            mean = mean + w * e
            inv = inv + w / e
            mix = phi * (1.0 - phi)
            take = mix > best
            for k in range(3):
                nvec[k] = np.where(take, nrm[k], nvec[k])
            best = np.where(take, mix, best)
        jump = 1.0 / inv - mean
        K = np.empty((3,) + X.shape, dtype=complex)
        for k in range(3):
            K[k] = jump * nvec[ax] * nvec[k]
        K[ax] += mean
        faces.append(K)
    return tuple(faces), used


# --------------------------------------------------------------------------
# linear system
# --------------------------------------------------------------------------

def _index(n):
    return np.arange(n**3).reshape(n, n, n)


def _face_cells(n, ax):
    """Integer coordinates of the low cell of every face normal to ``ax``."""
    shape = [n, n, n]
    shape[ax] = n - 1
    return np.indices(shape)


def _flat(coords, n):
    return (coords[0] * n + coords[1]) * n + coords[2]


def _transverse_stencil(n, ax, e):
    """Cells and signs of the four-point transverse difference on faces normal to ``ax``.

    Cells outside the box are dropped, which matches ``V_s = 0`` there.
    """
    lo = _face_cells(n, ax)
    hi = lo.copy()
    hi[ax] += 1
    out = []
    for base in (lo, hi):
        for sgn in (1, -1):
            c = base.copy()
            c[e] += sgn
            ok = (c[e] >= 0) & (c[e] < n)
            out.append((np.where(ok, _flat(np.clip(c, 0, n - 1), n), 0), ok, float(sgn)))
    return _flat(lo, n), _flat(hi, n), out


def _assemble(scene, faces, cross=True, modulus=False):
    n, h = scene.grid_n, scene.h
    eb = complex(scene.background_eps)
    idx = _index(n)
    diag = np.zeros((n, n, n), dtype=complex)
    rows, cols, vals = [], [], []
    for ax, K in enumerate(faces):
        c = (np.abs(K[ax]) if modulus else K[ax]) * h
        lo = np.take(idx, np.arange(n - 1), axis=ax).ravel()
        hi = np.take(idx, np.arange(1, n), axis=ax).ravel()
        cf = c.ravel()
        rows += [lo, hi]
        cols += [hi, lo]
        vals += [-cf, -cf]
        sl_lo = [slice(None)] * 3
        sl_hi = [slice(None)] * 3
        sl_lo[ax] = slice(0, n - 1)
        sl_hi[ax] = slice(1, n)
        diag[tuple(sl_lo)] += c
        diag[tuple(sl_hi)] += c
        # Dirichlet V_s = 0 half a cell beyond the first and last cell centres
        for end in (0, n - 1):
            sl = [slice(None)] * 3
            sl[ax] = end
            diag[tuple(sl)] += 2.0 * eb * h
        if not cross:
            continue
        for e in range(3):
            if e == ax or not np.any(K[e]):
                continue
            T = K[e] * h / 4.0
            live = T != 0
            flo, fhi, stencil = _transverse_stencil(n, ax, e)
            for cell, ok, sgn in stencil:
                m = live & ok
                t = sgn * T[m]
                rows += [flo[m], fhi[m]]
                cols += [cell[m], cell[m]]
                vals += [-t, t]
    rows.append(idx.ravel())
    cols.append(idx.ravel())
    vals.append(diag.ravel())
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n**3, n**3))
    A.sum_duplicates()
    A.sort_indices()
    if not np.any(A.data.imag):
        # pyamg kernels need contiguous data; ``A.real`` is a strided view
        A = sp.csr_matrix((np.ascontiguousarray(A.data.real), A.indices, A.indptr), shape=A.shape)
    return A


def _rhs(scene, faces, E0):
    n, h = scene.grid_n, scene.h
    eb = complex(scene.background_eps)
    b = np.zeros((n, n, n), dtype=complex)
    for ax, K in enumerate(faces):
        s = sum(K[e] * E0[e] for e in range(3)) - eb * E0[ax]
        s = s * h * h
        sl_lo = [slice(None)] * 3
        sl_hi = [slice(None)] * 3
        sl_lo[ax] = slice(0, n - 1)
        sl_hi[ax] = slice(1, n)
        b[tuple(sl_lo)] -= s
        b[tuple(sl_hi)] += s
    return b.ravel()


def _has_cross(faces):
    return any(np.any(K[e]) for ax, K in enumerate(faces) for e in range(3) if e != ax)


class _System:
    """Matrix and algebraic-multigrid preconditioner shared by all right-hand sides."""

    def __init__(self, scene, faces):
        self.scene = scene
        self.faces = faces
        self.A = _assemble(scene, faces)
        self.complex = np.iscomplexobj(self.A.data)
        self.symmetric = not self.complex and not _has_cross(faces)
        # SPD surrogate: normal couplings with |K_dd| drive the multigrid hierarchy
        P = self.A if self.symmetric else _assemble(scene, faces, cross=False, modulus=True)
        self.ml = pyamg.smoothed_aggregation_solver(P, symmetry="symmetric", max_coarse=500)
        Mr = self.ml.aspreconditioner(cycle="V")
        n = self.A.shape[0]
        if self.complex:
            self.M = LinearOperator((n, n), matvec=lambda x: Mr @ x.real + 1j * (Mr @ x.imag), dtype=complex)
        else:
            self.M = Mr

    def solve(self, b, rtol=SOLVER_RTOL, maxiter=2000):
        bnorm = np.linalg.norm(b)
        if bnorm == 0.0:
            return np.zeros_like(b), [0.0]
        if not self.complex:
            if np.any(b.imag):
                xr, hr = self.solve(b.real.copy(), rtol, maxiter)
                xi, hi = self.solve(b.imag.copy(), rtol, maxiter)
                return xr + 1j * xi, hr + hi
            b = b.real.copy()
        history = []

        def cb(xk):
            history.append(float(np.linalg.norm(b - self.A @ xk) / bnorm))

        # scipy's stopping test is on the unpreconditioned residual
        solver = cg if self.symmetric else bicgstab
        x, info = solver(self.A, b, rtol=rtol * 0.5, atol=0.0, maxiter=maxiter, M=self.M, callback=cb)
        res = float(np.linalg.norm(b - self.A @ x) / bnorm)
        history.append(res)
        if info != 0 or res > rtol:
            raise SolverError(f"Krylov solve stopped at relative residual {res:.3e} (info={info})", history)
        return x, history


def fd_solve_potential(scene: SceneSpec, E0, omega, smoothing="subpixel", delta=DEFAULT_DELTA, _system=None):
    """Scattered potential for applied field ``E0`` at frequency ``omega``.

    Parameters
    ----------
    scene : SceneSpec
    E0 : array_like, shape (3,)
        Real applied field.
    omega : complex
        Frequency at which dispersive materials are evaluated.
    smoothing : {"subpixel", "staircase"}
    delta : float
        Loss offset ``i delta eps0`` added to lossless dispersive materials.

    Returns
    -------
    PotentialGrid

    Raises
    ------
    GridTooCoarseError
        Fewer than three cells across the thinnest feature.
    SolverError
        Krylov iteration did not reach relative residual ``1e-10``.
    """
    scene.check_resolution()
    E0 = np.asarray(E0, dtype=float)
    if _system is None:
        faces, used = face_permittivity(scene, omega, smoothing, delta)
        system = _System(scene, faces)
    else:
        system, used = _system
    x, hist = system.solve(_rhs(scene, system.faces, E0))
    n = scene.grid_n
    return PotentialGrid(scene, complex(omega), E0, x.reshape(n, n, n), system.faces, used, hist, smoothing)


def extract_dipole(pot: PotentialGrid, monopole_tol=MONOPOLE_TOL, check=True):
    """Dipole ``p = int (eps - eps0) E dy`` and monopole ``Q = eps0 oint -dV_s/dn``.

    ``E`` on each face is ``E0 . n - (V_s(nb) - V_s(P)) / h``, weighted by
    the dual-cell volume ``h^3``. ``Q`` is the discrete flux through the
    boundary of the cell set ``|x| < R`` with ``R`` halfway between the
    device and the box.

    Raises
    ------
    QualityError
        ``|Q| R / ||p|| > monopole_tol``.
    """
    scene, h, V = pot.scene, pot.h, pot.Vs
    n = scene.grid_n
    eb = complex(scene.background_eps)
    Vp = np.pad(V, 1)
    grad = []
    for e in range(3):
        up = [slice(1, -1)] * 3
        dn = [slice(1, -1)] * 3
        up[e] = slice(2, None)
        dn[e] = slice(0, -2)
        grad.append((Vp[tuple(up)] - Vp[tuple(dn)]) / (2.0 * h))
    p = np.zeros(3, dtype=complex)
    for ax, K in enumerate(pot.eps_faces):
        lo_sl = np.arange(n - 1)
        hi_sl = np.arange(1, n)
        acc = 0.0
        for e in range(3):
            if e == ax:
                E = pot.E0[ax] - (np.take(V, hi_sl, axis=ax) - np.take(V, lo_sl, axis=ax)) / h
                acc = acc + (K[e] - eb) * E
            elif np.any(K[e]):
                g = 0.5 * (np.take(grad[e], lo_sl, axis=ax) + np.take(grad[e], hi_sl, axis=ax))
                acc = acc + K[e] * (pot.E0[e] - g)
        p[ax] = np.sum(acc) * h**3
    R = shell_radius_for_flux(scene)
    c = scene.centers()
    X, Y, Z = np.meshgrid(c, c, c, indexing="ij")
    inside = X**2 + Y**2 + Z**2 < R * R
    Q = 0.0 + 0.0j
    for ax in range(3):
        s_lo = np.take(inside, np.arange(n - 1), axis=ax)
        s_hi = np.take(inside, np.arange(1, n), axis=ax)
        lo = np.take(V, np.arange(n - 1), axis=ax)
        hi = np.take(V, np.arange(1, n), axis=ax)
        out_hi = s_lo & ~s_hi
        out_lo = ~s_lo & s_hi
        Q += -eb * h * (np.sum((hi - lo)[out_hi]) + np.sum((lo - hi)[out_lo]))
    pn = float(np.linalg.norm(p))
    ratio = abs(Q) * R / pn if pn > 0 else (0.0 if abs(Q) == 0 else math.inf)
    if check and ratio > monopole_tol:
        raise QualityError(f"monopole |Q| R / ||p|| = {ratio:.3e} exceeds {monopole_tol:.1e}")
    e_norm = float(np.linalg.norm(pot.E0))
    col = p / e_norm if e_norm > 0 else p
    return DipoleResult(p, complex(Q), col, ratio)


def assemble_alpha(scene: SceneSpec, omega, smoothing="subpixel", delta=DEFAULT_DELTA, full_output=False):
    """3x3 polarizability from solves with ``E0 = e1, e2, e3``.

    The matrix and its multigrid hierarchy are built once and shared by
    the three right-hand sides.

    Returns
    -------
    alpha : ndarray, shape (3, 3)
    diagnostics : dict, only with ``full_output``
        ``symmetry_deviation = ||alpha - alpha^T|| / ||alpha||``,
        ``monopole_ratios``, ``delta``, ``iterations``.
    """
    scene.check_resolution()
    faces, used = face_permittivity(scene, omega, smoothing, delta)
    system = _System(scene, faces)
    alpha = np.zeros((3, 3), dtype=complex)
    ratios, iters = [], []
    for j in range(3):
        e = np.zeros(3)
        e[j] = 1.0
        pot = fd_solve_potential(scene, e, omega, smoothing, delta, _system=(system, used))
        d = extract_dipole(pot)
        alpha[:, j] = d.alpha_column
        ratios.append(d.monopole_ratio)
        iters.append(len(pot.residuals))
    nrm = np.linalg.norm(alpha)
    sym = float(np.linalg.norm(alpha - alpha.T) / nrm) if nrm > 0 else 0.0
    if not full_output:
        return alpha
    return alpha, {"symmetry_deviation": sym, "monopole_ratios": ratios, "delta": used, "iterations": iters}


def export_grid(path, array, scene: SceneSpec, units="V", name="potential"):
    """Write ``array`` as little-endian float64 to ``<path>.bin`` with a JSON sidecar.

    Complex arrays are stored as two consecutive blocks (real, imaginary).
    """
    path = Path(path)
    arr = np.asarray(array)
    comps = ["re", "im"] if np.iscomplexobj(arr) else ["re"]
    data = np.stack([arr.real, arr.imag]) if len(comps) == 2 else arr.real[None]
    bin_path = path.with_suffix(".bin")
    data.astype("<f8").tofile(bin_path)
    L = scene.box_half_width
    meta = {
        "name": name,
        "file": bin_path.name,
        "dtype": "<f8",
        "order": "C",
        "components": comps,
        "dims": list(arr.shape),
        "spacing": [scene.h] * 3,
        "origin": [-L + 0.5 * scene.h] * 3,
        "units": {"value": units, "length": "m"},
    }
    side = path.with_suffix(".json")
    side.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return bin_path, side
