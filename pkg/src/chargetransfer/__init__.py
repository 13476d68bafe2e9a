"""Dispersive diagnostics for one- and two-well Schrodinger flows on
periodic boxes, scalar and two-component, with scattering-channel
projections and rate estimators."""

from .grids import (
    Grid, ScalarField, SpinorField, WeightProfile, chirped_packet,
    concentrated_packet, gaussian_packet, lp_norm, mixed_norm, pair_norms,
    random_band_limited, set_fft_workers, spectral_taper, weighted_multiply,
)
from .potentials import (
    MatrixPotentialSpec, MovingPotential, PotentialSpec, ScenarioValidationError,
    sample_matrix_potential, sample_potential, validate_scalar_scenario,
)
from .transforms import (
    GalileiParams, ModulationParams, galilei, galilei_inverse, modulation,
    translate, vector_galilei,
)
from .evolution import (
    GuardTripped, HamiltonianSpec, PropagatorTrace, SourceTerm, StepperConfig,
    free_propagate, matrix_propagate, oracle_propagate, propagate,
    propagate_stack, propagate_with_source,
)
from .spectral import (
    AdmissibilityReport, BoundStateSet, MatrixSpectralData, admissibility_report,
    bound_states, dense_bound_states, generalized_eigenspace, matrix_spectrum,
    nullspace, stability_probe,
)
from .channels import (
    ChannelBasis, HorizonTooSmall, MatrixChannelBasis, WaveOperatorConfig,
    ac_residual, channel_basis, channel_basis_series, duhamel_tail,
    matrix_channel_basis, project_channels, project_scattering,
)
from .estimates import (
    AdmissiblePair, DecayFit, admissible_pairs, decay_fit, endpoint_pair,
    inhomogeneous_ratio, kato_jensen_probe, local_decay_norm, local_decay_study,
    strichartz_ratio, strichartz_study, weighted_norm_series,
)
from .scenarios import (
    RunReport, Scenario, ScenarioConfigError, SolverError, emit_report,
    parse_csv, render_svg, run_scenario,
)

__version__ = "0.1.0"
