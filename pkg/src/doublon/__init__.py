"""Doublon bands, bound states, and long-range four-body interactions of
emitter pairs coupled to a staggered Kerr-nonlinear cavity waveguide."""

__version__ = "0.1.0"

from .bands import (
    BandStructure,
    Branch,
    DoublonWavefunction,
    K0,
    band_edge_energies,
    correlation_length,
    correlation_length_k0,
    dispersion_det,
    dispersion_roots,
    doublon_wavefunction,
    green_f,
    solve_bands,
)
from .basis import DoubleExcitationBasis, TwoPhotonBasis
from .dynamics import (
    BoundStateProfile,
    CorrelationFunction,
    DynamicsResult,
    StateVector,
    evolve,
    extract_dbs_field,
    extract_spbs_profile,
    g2_correlation,
    locked_spbs_profile,
)
from .hamiltonian import (
    SparseOperator,
    build_full_hamiltonian,
    build_two_photon_hamiltonian,
)
from .params import (
    Boundary,
    Emitter,
    EmitterSet,
    StaggerPhase,
    WaveguideParams,
    collocated_pair,
    emitter_pair,
)
from .reduced import (
    DbsClosedForm,
    FourBodyModel,
    ModeTable,
    ReducedTrace,
    ResidueResult,
    condition_check,
    coupling_G,
    dbs_closed_form,
    four_body_model,
    lower_branch_modes,
    mode_overlap_M,
    omega_from_gap_detuning,
    reduced_ode_evolve,
    self_energy,
    self_energy_and_residue,
    spbs_closed_form,
)
from .spectrum import (
    SpectrumResult,
    StateClass,
    classify_doublons,
    two_excitation_spectrum,
)
from .sweeps import (
    ExperimentKind,
    RunConfig,
    SweepResult,
    pair_layout,
    run_detuning_sweep,
    run_dq_sweep,
    validate_config,
)
