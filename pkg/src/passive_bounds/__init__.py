"""Numerical toolkit for sum rules and band-limited bounds on passive linear responses."""

from .complex_core import StolzParams, branch_arg, branch_log, branch_sqrt, in_stolz
from .dispersion import (
    FrequencyBand,
    GeneralizedLorentzLossless,
    LossyDrude,
    LossyLorentz,
    Tabulated,
    check_passivity,
    check_symmetry,
    constant,
    load_tabulated,
    model_from_dict,
)
from .herglotz import (
    Measure,
    dirac_sup_scan,
    extract_measure_mass,
    h_measure,
    herglotz_coefficients,
    herglotz_v,
    herglotz_vtilde,
    stieltjes_u,
    sum_rule_integral,
)
from .bounds import (
    cloaking_envelope,
    kk_real_part,
    lossy_level_set_bound,
    lossy_max_bound,
    transparency_bound,
)
from .reports import SCHEMA_VERSION, BoundReport, SumRuleReport

__version__ = "0.1.0"
