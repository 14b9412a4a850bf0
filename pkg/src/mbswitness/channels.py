"""Noise channels acting on sparse states, and witness robustness scans."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fock import AnyState, OccupationQuad, PureState, StateEnsemble, as_ensemble, project_subspace
from .states import mbs_singlet
from .subspace import NONVACUUM, Subspace
from .witness import conditioned_fidelity, evaluate_witness

BRANCH_PRUNE = 1e-10


@dataclass(frozen=True)
class NoiseSpec:
    """Noise parameters; ``loss_eta`` may be one value or one per mode (AH, AV, BH, BV)."""

    loss_eta: float | tuple[float, float, float, float] = 1.0
    visibility: float = 1.0
    dephase_strength: float = 0.0

    def __post_init__(self):
        etas = self.loss_eta if isinstance(self.loss_eta, tuple) else (self.loss_eta,)
        if len(etas) not in (1, 4):
            raise ValueError("loss_eta needs one value or four")
        for name, val in [("loss_eta", e) for e in etas] + [
            ("visibility", self.visibility),
            ("dephase_strength", self.dephase_strength),
        ]:
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {val}")

    def etas(self) -> tuple[float, float, float, float]:
        return self.loss_eta if isinstance(self.loss_eta, tuple) else (self.loss_eta,) * 4


def apply_noise(state: AnyState, spec: NoiseSpec, subspace: Subspace | str = NONVACUUM) -> StateEnsemble:
    """Loss, then sector dephasing, then white noise."""
    out = photon_loss(state, spec.etas())
    if spec.dephase_strength > 0:
        out = dephase_sectors(out, spec.dephase_strength)
    if spec.visibility < 1:
        out = white_noise_mix(out, spec.visibility, subspace)
    return out


def _loss_branch(amplitudes, k_mode: int, lost: int, eta: float) -> dict:
    out = {}
    for quad, amp in amplitudes.items():
        n = quad[k_mode]
        if n < lost:
            continue
        factor = math.sqrt(math.comb(n, lost) * eta ** (n - lost) * (1.0 - eta) ** lost)
        if factor == 0.0:
            continue
        new = list(quad)
        new[k_mode] = n - lost
        out[OccupationQuad(*new)] = amp * factor
    return out


def photon_loss(
    state: AnyState,
    eta: float | Sequence[float],
    prune: float = BRANCH_PRUNE,
) -> StateEnsemble:
    """Independent pure-loss channel on every mode.

    Branches are labelled by the number of photons lost per mode; a branch
    whose weight falls below ``prune`` is dropped and its weight added to
    ``discarded``.
    """
    etas = tuple(eta) if isinstance(eta, Sequence) else (float(eta),) * 4
    if len(etas) != 4 or any(not 0.0 <= e <= 1.0 for e in etas):
        raise ValueError("eta must be one value or four values in [0, 1]")
    ens = as_ensemble(state)
    branches = list(ens.branches)
    discarded = ens.discarded
    for k_mode, e in enumerate(etas):
        if e == 1.0:
            continue
        new_branches = []
        for w, s in branches:
            top = max((q[k_mode] for q in s.amplitudes), default=0)
            for lost in range(top + 1):
                amps = _loss_branch(s.amplitudes, k_mode, lost, e)
                weight_factor = sum(abs(a) ** 2 for a in amps.values())
                bw = w * weight_factor
                if bw == 0.0:
                    continue
                if bw < prune:
                    discarded += bw
                    continue
                nrm = math.sqrt(weight_factor)
                new_branches.append((bw, PureState({q: a / nrm for q, a in amps.items()}, s.n_max, 0.0)))
        branches = new_branches
    return StateEnsemble(tuple(branches), discarded)


def correlated_support(subspace: Subspace | str, n_max: int) -> list[OccupationQuad]:
    """Basis states |n, N-n, N-n, n> for member sectors N <= n_max."""
    subspace = Subspace.parse(subspace)
    return [OccupationQuad(n, big - n, big - n, n) for big in subspace.upto(n_max) for n in range(big + 1)]


def white_noise_mix(state: AnyState, visibility: float, subspace: Subspace | str = NONVACUUM) -> StateEnsemble:
    """v * rho + (1 - v) * (maximally mixed state on the correlated support of the subspace)."""
    if not 0.0 <= visibility <= 1.0:
        raise ValueError("visibility must lie in [0, 1]")
    ens = as_ensemble(state)
    support = correlated_support(subspace, ens.n_max)
    if not support:
        raise ValueError(f"subspace {subspace} has no correlated support at n_max={ens.n_max}")
    branches = [(visibility * w, s) for w, s in ens.branches if visibility > 0]
    if visibility < 1:
        share = (1.0 - visibility) / len(support)
        branches += [(share, PureState({q: 1.0}, ens.n_max)) for q in support]
    return StateEnsemble(tuple(branches), visibility * ens.discarded)


def dephase_sectors(state: AnyState, strength: float) -> StateEnsemble:
    """Interpolate between rho (s=0) and its block-diagonal part over (N_A, N_B) blocks (s=1)."""
    if not 0.0 <= strength <= 1.0:
        raise ValueError("strength must lie in [0, 1]")
    ens = as_ensemble(state)
    branches = []
    if strength < 1:
        branches += [((1.0 - strength) * w, s) for w, s in ens.branches]
    if strength > 0:
        for w, s in ens.branches:
            blocks: dict[tuple[int, int], dict] = {}
            for q, a in s.amplitudes.items():
                blocks.setdefault((q.alice, q.bob), {})[q] = a
            for amps in blocks.values():
                p = sum(abs(a) ** 2 for a in amps.values())
                if p == 0.0:
                    continue
                nrm = math.sqrt(p)
                branches.append((strength * w * p, PureState({q: a / nrm for q, a in amps.items()}, s.n_max, 0.0)))
    return StateEnsemble(tuple(branches), ens.discarded)


# -- robustness ----------------------------------------------------------------


def _noisy_state(
    parameter: str, value: float, clean: PureState, subspace: Subspace, prune: float = BRANCH_PRUNE
) -> AnyState:
    if parameter == "loss":
        return photon_loss(clean, value, prune)
    if parameter == "visibility":
        # white noise is mixed into the already conditioned state, so fidelity stays affine in v
        conditioned, _ = project_subspace(clean, subspace)
        return white_noise_mix(conditioned, value, subspace)
    if parameter == "dephase":
        return dephase_sectors(clean, value)
    raise ValueError(f"unknown noise parameter {parameter!r}")


def noisy_report(
    parameter: str,
    value: float,
    r: float,
    subspace: Subspace | str = NONVACUUM,
    n_max: int = 10,
    prune: float = BRANCH_PRUNE,
):
    """Witness report for the MBS after one noise channel."""
    subspace = Subspace.parse(subspace)
    return evaluate_witness(_noisy_state(parameter, value, mbs_singlet(r, n_max), subspace, prune), r, subspace)


@dataclass(frozen=True)
class RobustnessResult:
    parameter: str
    critical_value: float
    grid: tuple[float, ...]
    fidelities: tuple[float, ...]


def robustness_threshold(
    parameter: str,
    r: float,
    subspace: Subspace | str = NONVACUUM,
    n_max: int = 10,
    tol: float = 1e-4,
    grid_points: int = 11,
    lower: float | None = None,
) -> RobustnessResult:
    """Noise level at which the witness value of the MBS crosses zero.

    ``parameter`` is "loss" (eta) or "visibility" (v); both run from noisy at
    ``lower`` to clean at 1. Fidelity must be monotone on the scan grid.
    """
    if parameter not in ("loss", "visibility"):
        raise ValueError("parameter must be 'loss' or 'visibility'")
    subspace = Subspace.parse(subspace)
    clean = mbs_singlet(r, n_max)
    if lower is None:
        lower = 0.0 if parameter == "visibility" else 0.05

    def value_at(p):
        fid, _ = conditioned_fidelity(_noisy_state(parameter, p, clean, subspace), r, subspace)
        return fid

    thr = evaluate_witness(clean, r, subspace).threshold
    grid = np.linspace(lower, 1.0, grid_points)
    fids = [value_at(p) for p in grid]
    if any(b < a - 1e-12 for a, b in zip(fids, fids[1:])):
        raise RuntimeError(f"fidelity is not monotone in {parameter} on the scan grid")
    if not fids[-1] > thr:
        raise ValueError("witness is not violated at the clean endpoint")
    if fids[0] > thr:
        raise ValueError(f"no sign change of the witness value for {parameter} in [{lower}, 1]")
    idx = next(i for i, f in enumerate(fids) if f > thr)
    lo, hi = float(grid[idx - 1]), float(grid[idx])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if value_at(mid) > thr:
            hi = mid
        else:
            lo = mid
    return RobustnessResult(parameter, 0.5 * (lo + hi), tuple(float(g) for g in grid), tuple(fids))
