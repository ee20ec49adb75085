"""kslab: a pseudospectral laboratory for chemotaxis-type parabolic systems.

Library layout:

- :mod:`kslab.grid` -- periodic grids, transforms, dealiasing, KSF1 snapshots
- :mod:`kslab.models` -- spectral right-hand sides of the five systems
- :mod:`kslab.stepper` -- exponential time stepping and blowup detection
- :mod:`kslab.duhamel` -- mild-solution operators and Picard iteration
- :mod:`kslab.norms` -- scale-invariant norm estimators
- :mod:`kslab.bounds` -- analytic constants and inequality certificates
- :mod:`kslab.initdata` -- initial-data families
- :mod:`kslab.experiments` -- threshold scans, scaling laws, limit studies
- :mod:`kslab.cli` -- command-line orchestration
"""

from .bounds import (
    BoundCertificate,
    ThresholdParams,
    besov_threshold,
    bilinear_K,
    heat_constant,
    integral_lemma_check,
    linear_L_coefficient,
    optimal_b,
    riesz_bound_check,
    riesz_constant,
    size_condition,
)
from .duhamel import PicardConfig, PicardReport, apply_B, apply_L, picard_solve
from .experiments import (
    ScanResult,
    ScanSpec,
    critical_amplitude,
    estimate_kappa,
    pe_limit_study,
    selfsimilar_check,
    tau_scaling_study,
)
from .grid import (
    GridSpec,
    PhysicalField,
    SpectralField,
    dealias,
    default_box_length,
    from_spectral,
    read_ksf1,
    to_spectral,
    write_ksf1,
)
from .initdata import InitSpec, make
from .models import CoupledState, SystemSpec, elliptic_phi, nonlinearity, phi_exact_update
from .norms import NormReport, besov_norm, ep_monitor, lp_norm, morrey_norm_d2, pm_norm
from .stepper import StepperConfig, TrajectorySummary, run, step

__all__ = [
    "BoundCertificate",
    "ThresholdParams",
    "besov_threshold",
    "bilinear_K",
    "heat_constant",
    "integral_lemma_check",
    "linear_L_coefficient",
    "optimal_b",
    "riesz_bound_check",
    "riesz_constant",
    "size_condition",
    "PicardConfig",
    "PicardReport",
    "apply_B",
    "apply_L",
    "picard_solve",
    "ScanResult",
    "ScanSpec",
    "critical_amplitude",
    "estimate_kappa",
    "pe_limit_study",
    "selfsimilar_check",
    "tau_scaling_study",
    "GridSpec",
    "PhysicalField",
    "SpectralField",
    "dealias",
    "default_box_length",
    "from_spectral",
    "read_ksf1",
    "to_spectral",
    "write_ksf1",
    "InitSpec",
    "make",
    "CoupledState",
    "SystemSpec",
    "elliptic_phi",
    "nonlinearity",
    "phi_exact_update",
    "NormReport",
    "besov_norm",
    "ep_monitor",
    "lp_norm",
    "morrey_norm_d2",
    "pm_norm",
    "StepperConfig",
    "TrajectorySummary",
    "run",
    "step",
]

__version__ = "0.1.0"
