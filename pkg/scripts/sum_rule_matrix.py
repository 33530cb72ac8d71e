"""Sum-rule values for the six reference models under Dirac-scan and uniform measures.

Writes ``sum_rule_matrix.csv`` with one row per (model, measure).

    python scripts/sum_rule_matrix.py --out results/matrix
"""

import argparse
from dataclasses import dataclass, field
from pathlib import Path

from passive_bounds import (
    FrequencyBand,
    GeneralizedLorentzLossless,
    LossyDrude,
    LossyLorentz,
    Measure,
    constant,
    dirac_sup_scan,
    sum_rule_integral,
)
from passive_bounds.reports import csv_text


@dataclass
class MatrixConfig:
    band: tuple = (0.5, 1.5)
    scan_delta: float = 1.0
    uniform_delta: float = 1.0
    n_grid: int = 129
    gammas: tuple = (0.0, 0.1, 1.0)
    out: Path = field(default_factory=lambda: Path("results/matrix"))


def models(cfg):
    out = {f"drude_g{g:g}": LossyDrude(1.0, 1.0, g) for g in cfg.gammas}
    out["lorentz"] = LossyLorentz(1.0, ((1.0, 4.0, 0.2),))
    out["lorentz_lossless"] = GeneralizedLorentzLossless(1.0, ((1.0, 4.0),))
    out["constant"] = constant(1.0)
    return out


def run(cfg):
    band = FrequencyBand(*cfg.band)
    rows = []
    for name, f in models(cfg).items():
        xi, _ = dirac_sup_scan(f, band, cfg.scan_delta, n_grid=cfg.n_grid)
        for label, m in ((f"dirac:{xi!r}", Measure.dirac(xi)), (f"uniform:{cfg.uniform_delta!r}", Measure.uniform(cfg.uniform_delta))):
            rep = sum_rule_integral(f, m, band)
            rows.append((name, label, rep.integral_value, rep.rhs_bound, rep.slack, rep.extrapolation_error_estimate))
            print(f"{name:<18} {label:<30} value={rep.integral_value:.8f} bound={rep.rhs_bound:.8f}")
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "sum_rule_matrix.csv").write_text(
        csv_text(["model", "measure", "value", "bound", "slack", "extrapolation_error"], rows), encoding="utf-8")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=MatrixConfig().out)
    p.add_argument("--delta", type=float, default=1.0, help="half-width of the scan and uniform measures")
    a = p.parse_args()
    run(MatrixConfig(scan_delta=a.delta, uniform_delta=a.delta, out=a.out))
