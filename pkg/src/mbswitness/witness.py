"""Fidelity witness for hybrid entanglement between photon number and polarization.

The witness is W = F 1 - |Psi-><Psi-| with F the larger of two separability
bounds: the best overlap reachable without coherences across photon-number
sectors (``bound_number``) and the best overlap reachable by states that are
product within every sector (``bound_polarization``). Both are evaluated for
the reference conditioned on a sector set.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .fock import AnyState, PureState, project_ensemble
from .states import ConditionedMBS, _scaled_sums, renormalized_probability, squeezing_ratio
from .subspace import NONVACUUM, Subspace

HYBRID = "hybrid-entangled"
INCONCLUSIVE = "inconclusive"


def _peak_sector(x: float) -> int:
    """Unconstrained argmax of (N+1) x^N (ties resolve to the larger N)."""
    if x < 0.5:
        return 0
    return math.floor((2 * x - 1) / (1 - x)) + 1


def argmax_sector(r: float, subspace: Subspace | str = NONVACUUM, max_sector: int | None = None) -> int:
    """Sector of the subspace with the largest occupation probability."""
    subspace = Subspace.parse(subspace)
    if subspace.is_empty:
        raise ValueError("empty subspace")
    x, _ = squeezing_ratio(r)
    candidates = set(subspace.sectors)
    if subspace.tail_from is not None:
        candidates.add(max(subspace.tail_from, _peak_sector(x)))
    if max_sector is not None:
        candidates = {n for n in candidates if n <= max_sector}
        if subspace.tail_from is not None and subspace.tail_from <= max_sector:
            candidates.add(min(max(subspace.tail_from, _peak_sector(x)), max_sector))
        if not candidates:
            raise ValueError(f"no sector of {subspace} lies below max_sector={max_sector}")
    # (N+1) x^N is unimodal, so the best candidate is the global best
    return max(sorted(candidates), key=lambda n: renormalized_probability(n, r, subspace))


def bound_number(r: float, subspace: Subspace | str = NONVACUUM, max_sector: int | None = None) -> float:
    """Largest renormalized sector probability p~_N over the subspace.

    ``max_sector`` limits the maximization to N <= max_sector while keeping
    the renormalization over the whole (possibly infinite) subspace.
    """
    subspace = Subspace.parse(subspace)
    return renormalized_probability(argmax_sector(r, subspace, max_sector), r, subspace)


def bound_polarization(r: float, subspace: Subspace | str = NONVACUUM, max_sector: int | None = None) -> float:
    """Sum of p~_N / (N+1) over the subspace (optionally only N <= max_sector)."""
    subspace = Subspace.parse(subspace)
    x, _ = squeezing_ratio(r)
    k0, weighted, plain = _scaled_sums(x, subspace)
    if max_sector is None:
        return plain / weighted
    return sum(x ** (n - k0) for n in subspace.upto(max_sector)) / weighted


def threshold(r: float, subspace: Subspace | str = NONVACUUM) -> float:
    return max(bound_number(r, subspace), bound_polarization(r, subspace))


@dataclass(frozen=True)
class WitnessReport:
    r: float
    subspace: str
    fidelity: float
    bound_number: float
    bound_polarization: float
    threshold: float
    witness_value: float
    conditioning_probability: float
    tail_weight: float
    verdict: str

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def conditioned_fidelity(state: AnyState, r: float, subspace: Subspace | str = NONVACUUM) -> tuple[float, float]:
    """Fidelity of the conditioned state with the conditioned reference, and the conditioning probability."""
    subspace = Subspace.parse(subspace)
    reference = ConditionedMBS(r, subspace)
    conditioned, prob = project_ensemble(state, subspace)
    fid = sum(w * abs(reference.overlap(s)) ** 2 for w, s in conditioned.branches)
    return float(fid), prob


def evaluate_witness(state: AnyState, r: float, subspace: Subspace | str = NONVACUUM) -> WitnessReport:
    """Evaluate <W> for ``state`` conditioned on equal local photon numbers in ``subspace``.

    The state is projected and renormalized; the reference is the ideal
    macroscopic singlet conditioned on the same sectors, evaluated exactly
    on the state's support. Raises EmptySubspaceError if the state carries no
    weight in the subspace.
    """
    subspace = Subspace.parse(subspace)
    if not math.isfinite(r) or r < 0:
        raise ValueError("reference squeezing must be finite and >= 0")
    fid, prob = conditioned_fidelity(state, r, subspace)
    b_num = bound_number(r, subspace)
    b_pol = bound_polarization(r, subspace)
    thr = max(b_num, b_pol)
    value = thr - fid
    n_max = state.n_max
    return WitnessReport(
        r=float(r),
        subspace=subspace.label(),
        fidelity=fid,
        bound_number=b_num,
        bound_polarization=b_pol,
        threshold=thr,
        witness_value=value,
        conditioning_probability=prob,
        tail_weight=ConditionedMBS(r, subspace).tail_weight(n_max),
        verdict=HYBRID if value < 0 else INCONCLUSIVE,
    )


def crossover_squeezing(subspace: Subspace | str = NONVACUUM, r_max: float = 3.0, tol: float = 1e-10) -> float:
    """Smallest r at which the argmax sector of ``bound_number`` changes."""
    subspace = Subspace.parse(subspace)
    start = argmax_sector(0.0, subspace)
    grid = [r_max * i / 600 for i in range(601)]
    hi = next((r for r in grid if argmax_sector(r, subspace) != start), None)
    if hi is None:
        raise ValueError(f"no crossover of the number bound in [0, {r_max}] for subspace {subspace}")
    lo = hi - r_max / 600
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if argmax_sector(mid, subspace) == start:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def reference_state(r: float, subspace: Subspace | str, n_max: int) -> PureState:
    """Truncated conditioned reference as an explicit sparse state."""
    return ConditionedMBS(r, Subspace.parse(subspace)).truncated(n_max)
