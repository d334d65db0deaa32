"""Phase retrieval of complex-valued signals by randomized row projections.

The package splits into:

* ``core``       complex vector primitives and the phase-aligned metric
* ``sensing``    sphere / block-unitary ensembles and measurements
* ``solver``     the randomized projection iteration
* ``spectral``   truncated spectral initialization
* ``regularity`` objective derivatives, wedge sets, regularity estimator,
                 Monte-Carlo lemma validators
* ``harness``    seeded experiment batches, rate fitting, CSV/JSON output
* ``verify``     the self-verification suite behind ``kaczmarz-pr verify``
"""

__version__ = "0.1.0"

from .core import PhaseAlignedDistance, dist_phase_aligned, inner, norm, phase_diff_bound_check
from .harness import (
    ExperimentConfig,
    TrialRecord,
    fit_rate,
    run_experiment,
    run_trial,
)
from .regularity import (
    RegularityParams,
    RegularityReport,
    WedgeSet,
    dir_deriv_f,
    estimate_L,
    objective_f,
    second_dir_deriv_at_signal,
    second_dir_deriv_fi,
    validate_lemmas,
    wedge,
)
from .sensing import (
    MODEL_SPHERE,
    MODEL_UNITARY,
    MeasurementSet,
    SensingEnsemble,
    load_ensemble,
    measure,
    sample_block_unitary,
    sample_sphere,
    sample_unit_vector,
    save_ensemble,
)
from .solver import (
    ROW_INVERSE_NORM,
    ROW_UNIFORM,
    SolverConfig,
    SolverState,
    project_magnitude,
    solve,
    step,
)
from .spectral import SpectralConfig, spectral_init, truncated_covariance

__all__ = [
    "PhaseAlignedDistance",
    "dist_phase_aligned",
    "inner",
    "norm",
    "phase_diff_bound_check",
    "MODEL_SPHERE",
    "MODEL_UNITARY",
    "SensingEnsemble",
    "MeasurementSet",
    "sample_sphere",
    "sample_block_unitary",
    "sample_unit_vector",
    "measure",
    "save_ensemble",
    "load_ensemble",
    "ROW_UNIFORM",
    "ROW_INVERSE_NORM",
    "SolverConfig",
    "SolverState",
    "project_magnitude",
    "step",
    "solve",
    "SpectralConfig",
    "spectral_init",
    "truncated_covariance",
    "objective_f",
    "dir_deriv_f",
    "second_dir_deriv_fi",
    "second_dir_deriv_at_signal",
    "WedgeSet",
    "wedge",
    "RegularityParams",
    "RegularityReport",
    "estimate_L",
    "validate_lemmas",
    "ExperimentConfig",
    "TrialRecord",
    "run_trial",
    "run_experiment",
    "fit_rate",
]
