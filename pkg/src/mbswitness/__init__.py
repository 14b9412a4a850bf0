"""Macroscopic Bell states and a fidelity witness for hybrid number-polarization entanglement."""

__version__ = "0.1.0"

from .fock import (
    OccupationQuad,
    PureState,
    StateEnsemble,
    fidelity_to_pure,
    inner_product,
    ladder,
    partial_trace,
    project_subspace,
)
from .states import (
    SqueezingParams,
    blind_mixture,
    estimate_squeezing,
    exemplar_state,
    mbs_singlet,
    sector_probabilities,
    sector_singlet,
    tmsv,
)
from .subspace import FULL, NONVACUUM, Subspace
from .witness import WitnessReport, bound_number, bound_polarization, crossover_squeezing, evaluate_witness

__all__ = [
    "FULL",
    "NONVACUUM",
    "OccupationQuad",
    "PureState",
    "SqueezingParams",
    "StateEnsemble",
    "Subspace",
    "WitnessReport",
    "blind_mixture",
    "bound_number",
    "bound_polarization",
    "crossover_squeezing",
    "estimate_squeezing",
    "evaluate_witness",
    "exemplar_state",
    "fidelity_to_pure",
    "inner_product",
    "ladder",
    "mbs_singlet",
    "partial_trace",
    "project_subspace",
    "sector_probabilities",
    "sector_singlet",
    "tmsv",
]
