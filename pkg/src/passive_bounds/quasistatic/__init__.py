"""Quasi-static polarizability: closed forms, response adapters and a finite-volume solver."""

from .analytic import (
    coated_sphere_alpha,
    depolarization_factors,
    design_cloak_frequency,
    ellipsoid_alpha,
    sphere_alpha_inf,
)
from .fd import (
    DipoleResult,
    PotentialGrid,
    assemble_alpha,
    export_grid,
    extract_dipole,
    fd_solve_potential,
)
from .responses import (
    CoatedSphereResponse,
    ConstantTensor,
    PolarizabilityResponse,
    ScalarProjection,
    SharpDrudeTensor,
)
from .scene import Ellipsoid, Region, SceneSpec, Shell, Sphere, load_scene, scene_from_dict

__all__ = [
    "CoatedSphereResponse", "ConstantTensor", "DipoleResult", "Ellipsoid", "PolarizabilityResponse",
    "PotentialGrid", "Region", "ScalarProjection", "SceneSpec", "SharpDrudeTensor", "Shell", "Sphere",
    "assemble_alpha", "coated_sphere_alpha", "depolarization_factors", "design_cloak_frequency",
    "ellipsoid_alpha", "export_grid", "extract_dipole", "fd_solve_potential", "load_scene",
    "scene_from_dict", "sphere_alpha_inf",
]
