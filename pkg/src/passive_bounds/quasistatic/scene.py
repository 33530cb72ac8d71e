"""Scene description for the finite-volume solver and its config-file loader."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..dispersion import model_from_dict
from ..errors import ConfigError, DomainError, GridTooCoarseError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

MIN_GRID = 16
MIN_FEATURE_CELLS = 3


@dataclass(frozen=True)
class Sphere:
    center: tuple
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("sphere radius must be positive")

    def signed_distance(self, x, y, z):
        c = self.center
        r = np.sqrt((x - c[0]) ** 2 + (y - c[1]) ** 2 + (z - c[2]) ** 2)
        return r - self.radius

    def extent(self):
        return float(np.linalg.norm(self.center)) + self.radius

    def min_feature(self):
        return self.radius


@dataclass(frozen=True)
class Shell:
    center: tuple
    a: float
    b: float

    def __post_init__(self):
        if not (0 < self.a < self.b):
            raise DomainError("shell radii must satisfy 0 < a < b")

    def signed_distance(self, x, y, z):
        c = self.center
        r = np.sqrt((x - c[0]) ** 2 + (y - c[1]) ** 2 + (z - c[2]) ** 2)
        return np.maximum(self.a - r, r - self.b)

    def extent(self):
        return float(np.linalg.norm(self.center)) + self.b

    def min_feature(self):
        return self.b - self.a


@dataclass(frozen=True)
class Ellipsoid:
    center: tuple
    semiaxes: tuple

    def __post_init__(self):
        if len(self.semiaxes) != 3 or min(self.semiaxes) <= 0:
            raise DomainError("ellipsoid needs three positive semiaxes")

    def signed_distance(self, x, y, z):
        c, s = self.center, self.semiaxes
        u = [(x - c[0]) / s[0], (y - c[1]) / s[1], (z - c[2]) / s[2]]
        q = u[0] ** 2 + u[1] ** 2 + u[2] ** 2
        grad = np.sqrt((u[0] / s[0]) ** 2 + (u[1] / s[1]) ** 2 + (u[2] / s[2]) ** 2)
        # first-order distance (q - 1) / |grad q|, exact on the surface
        return (q - 1.0) / (2.0 * np.maximum(grad, 1e-300))

    def extent(self):
        return float(np.linalg.norm(self.center)) + max(self.semiaxes)

    def min_feature(self):
        return min(self.semiaxes)


@dataclass(frozen=True)
class Region:
    shape: object
    material: object  # DispersionModel or real constant

    def eps(self, omega):
        if hasattr(self.material, "eval"):
            return complex(self.material.eval(complex(omega)))
        return complex(self.material)

    @property
    def dispersive(self):
        return hasattr(self.material, "eval")


@dataclass(frozen=True)
class SceneSpec:
    """Cubic box ``[-box_half_width, box_half_width]^3`` with ``grid_n`` cells per axis.

    Regions must fit inside half the box and must not overlap; on a cell
    where two regions meet the later one wins.
    """

    box_half_width: float
    grid_n: int
    background_eps: float = 1.0
    regions: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        if not self.box_half_width > 0:
            raise DomainError("box_half_width must be positive")
        if int(self.grid_n) != self.grid_n or self.grid_n < MIN_GRID:
            raise DomainError(f"grid_n must be an integer >= {MIN_GRID}")
        if not self.background_eps > 0:
            raise DomainError("background_eps must be positive")
        for reg in self.regions:
            if reg.shape.extent() > 0.5 * self.box_half_width + 1e-12:
                raise DomainError("regions must stay within half the box half-width of the centre")

    @property
    def h(self):
        return 2.0 * self.box_half_width / self.grid_n

    def centers(self):
        n, L = self.grid_n, self.box_half_width
        return -L + (np.arange(n) + 0.5) * self.h

    def device_radius(self):
        return max((r.shape.extent() for r in self.regions), default=0.0)

    def check_resolution(self):
        """Refuse grids with fewer than three cells across the thinnest feature."""
        for reg in self.regions:
            cells = reg.shape.min_feature() / self.h
            if cells < MIN_FEATURE_CELLS:
                raise GridTooCoarseError(
                    f"{type(reg.shape).__name__} feature of {reg.shape.min_feature()!r} spans "
                    f"{cells:.2f} cells (< {MIN_FEATURE_CELLS}); increase grid_n"
                )

    def with_grid(self, n):
        return SceneSpec(self.box_half_width, n, self.background_eps, self.regions)


def _shape_from_dict(d):
    if not isinstance(d, dict) or "type" not in d:
        raise ConfigError(f"shape must be a table with 'type', got {d!r}")
    center = tuple(float(v) for v in d.get("center", (0.0, 0.0, 0.0)))
    if len(center) != 3:
        raise ConfigError("shape center must have three components")
    kind = d["type"]
    try:
        if kind == "sphere":
            return Sphere(center, float(d["radius"]))
        if kind == "shell":
            return Shell(center, float(d["a"]), float(d["b"]))
        if kind == "ellipsoid":
            return Ellipsoid(center, tuple(float(v) for v in d["semiaxes"]))
    except KeyError as exc:
        raise ConfigError(f"shape {kind!r} is missing key {exc.args[0]!r}") from exc
    raise ConfigError(f"unknown shape type {kind!r}")


def scene_from_dict(d, base_dir=None):
    """Build a scene from keys ``box``, ``grid``, ``background_eps`` and ``regions``.

    Each region is a table with ``shape`` (``{type = "sphere"|"shell"|"ellipsoid", ...}``)
    and ``material`` (number or model table).
    """
    try:
        regions = []
        for i, r in enumerate(d.get("regions", [])):
            if "shape" not in r or "material" not in r:
                raise ConfigError(f"regions[{i}] needs 'shape' and 'material'")
            mat = r["material"]
            mat = float(mat) if isinstance(mat, (int, float)) else model_from_dict(mat, base_dir)
            regions.append(Region(_shape_from_dict(r["shape"]), mat))
        return SceneSpec(float(d["box"]), int(d["grid"]), float(d.get("background_eps", 1.0)), tuple(regions))
    except KeyError as exc:
        raise ConfigError(f"scene is missing key {exc.args[0]!r}") from exc
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def load_scene(path):
    """Read a TOML scene file; see :func:`scene_from_dict` for the key set."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read scene {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return scene_from_dict(data.get("scene", data), base_dir=path.parent)


def region_fractions(scene, x, y, z, supersample=4):
    """Smoothed volume fraction and outward normal of every region at the given points.

    A cube of side ``w`` cut by a plane at signed distance ``d`` is
    approximated by the linear ramp ``clip(1/2 - d / w', 0, 1)`` with
    ``w' = w (|n1| + |n2| + |n3|)``, the width of the cube along the normal.
    Points within ``h`` of an interface average the ramp over
    ``supersample^3`` sub-cubes so curved interfaces keep their volume.
    """
    h = scene.h
    out = []
    off = (np.arange(supersample) + 0.5) / supersample - 0.5
    for reg in scene.regions:
        sd = reg.shape.signed_distance
        d = sd(x, y, z)
        step = 1e-6 * h
        g = [sd(x + step, y, z) - sd(x - step, y, z),
             sd(x, y + step, z) - sd(x, y - step, z),
             sd(x, y, z + step) - sd(x, y, z - step)]
        gn = np.sqrt(g[0] ** 2 + g[1] ** 2 + g[2] ** 2)
        gn = np.where(gn > 0, gn, 1.0)
        n = tuple(gi / gn for gi in g)
        width = np.abs(n[0]) + np.abs(n[1]) + np.abs(n[2])
        phi = np.clip(0.5 - d / (h * width), 0.0, 1.0)
        near = np.abs(d) < h
        if supersample > 1 and np.any(near):
            xs, ys, zs, wn = x[near], y[near], z[near], width[near] * h / supersample
            acc = np.zeros(xs.shape)
            for a in off:
                for b in off:
                    for c in off:
                        acc += np.clip(0.5 - sd(xs + a * h, ys + b * h, zs + c * h) / wn, 0.0, 1.0)
            phi[near] = acc / supersample**3
        out.append((phi, n))
    return out


def cell_membership(scene):
    """Index of the owning region per cell centre (``-1`` for background)."""
    c = scene.centers()
    X, Y, Z = np.meshgrid(c, c, c, indexing="ij")
    owner = np.full(X.shape, -1, dtype=np.int32)
    for k, reg in enumerate(scene.regions):
        owner[reg.shape.signed_distance(X, Y, Z) < 0] = k
    return owner


def shell_radius_for_flux(scene):
    """Radius of the closed cell surface used for the monopole flux."""
    return 0.5 * (scene.device_radius() + scene.box_half_width)

