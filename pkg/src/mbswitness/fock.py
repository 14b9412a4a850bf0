"""Sparse four-mode Fock-space algebra.

States live on the modes (A_H, A_V, B_H, B_V): Alice holds the first two,
Bob the last two. Amplitudes are stored sparsely, keyed by the occupation
numbers, and every mode is truncated at ``n_max`` photons. Weight that falls
outside the truncated space is never silently lost; it is accumulated in
``PureState.leakage``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .subspace import Subspace

DEFAULT_N_MAX = 10
PRUNE = 1e-15

MODES = ("AH", "AV", "BH", "BV")
ALICE = "alice"
BOB = "bob"


class CutoffMismatch(ValueError):
    """Raised when two states with different per-mode cutoffs are combined."""


class EmptySubspaceError(ValueError):
    """Raised when a projection leaves (numerically) no weight behind."""


class OccupationQuad(NamedTuple):
    n_AH: int
    n_AV: int
    n_BH: int
    n_BV: int

    @property
    def alice(self) -> int:
        return self.n_AH + self.n_AV

    @property
    def bob(self) -> int:
        return self.n_BH + self.n_BV

    @property
    def total(self) -> int:
        return self.alice + self.bob


VACUUM = OccupationQuad(0, 0, 0, 0)


def _mode_index(mode: str) -> int:
    try:
        return MODES.index(mode)
    except ValueError:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}") from None


@dataclass(frozen=True)
class PureState:
    """Sparse, possibly unnormalized, state vector with truncation bookkeeping.

    Use :meth:`from_amplitudes` to build one; it drops entries beyond the
    cutoff or below the prune threshold and books their weight as leakage.
    """

    amplitudes: Mapping[OccupationQuad, complex]
    n_max: int = DEFAULT_N_MAX
    leakage: float = 0.0

    def __post_init__(self):
        if not isinstance(self.amplitudes, MappingProxyType):
            object.__setattr__(self, "amplitudes", MappingProxyType(dict(self.amplitudes)))

    @classmethod
    def from_amplitudes(
        cls,
        amplitudes: Mapping[tuple, complex] | Iterable[tuple[tuple, complex]],
        n_max: int = DEFAULT_N_MAX,
        leakage: float = 0.0,
        prune: float = PRUNE,
    ) -> "PureState":
        items = amplitudes.items() if isinstance(amplitudes, Mapping) else amplitudes
        kept: dict[OccupationQuad, complex] = {}
        for quad, amp in items:
            quad = OccupationQuad(*quad)
            if min(quad) < 0:
                raise ValueError(f"negative occupation in {quad}")
            kept[quad] = kept.get(quad, 0.0) + complex(amp)
        out: dict[OccupationQuad, complex] = {}
        for quad, amp in kept.items():
            if max(quad) > n_max or abs(amp) < prune:
                leakage += abs(amp) ** 2
            else:
                out[quad] = amp
        return cls(out, n_max, float(leakage))

    @classmethod
    def basis(cls, quad: tuple, n_max: int = DEFAULT_N_MAX) -> "PureState":
        return cls.from_amplitudes({tuple(quad): 1.0}, n_max)

    def __len__(self) -> int:
        return len(self.amplitudes)

    def amplitude(self, quad: tuple) -> complex:
        return self.amplitudes.get(OccupationQuad(*quad), 0j)

    def norm_sq(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def scaled(self, factor: complex) -> "PureState":
        return PureState({q: a * factor for q, a in self.amplitudes.items()}, self.n_max, self.leakage)

    def normalized(self) -> "PureState":
        """Unit-norm copy; leakage is reset because the state is now conditioned."""
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero state")
        return PureState({q: a / nrm for q, a in self.amplitudes.items()}, self.n_max, 0.0)

    def with_cutoff(self, n_max: int) -> "PureState":
        return PureState.from_amplitudes(self.amplitudes, n_max, self.leakage)

    def to_json(self) -> dict:
        records = [[*quad, float(a.real), float(a.imag)] for quad, a in sorted(self.amplitudes.items())]
        return {"n_max": self.n_max, "leakage": self.leakage, "amplitudes": records}

    @classmethod
    def from_json(cls, data: Mapping) -> "PureState":
        try:
            n_max = int(data["n_max"])
            leakage = float(data.get("leakage", 0.0))
            records = data["amplitudes"]
            amps = {}
            for rec in records:
                if len(rec) != 6:
                    raise ValueError(f"amplitude record needs 6 entries, got {rec!r}")
                quad = tuple(int(x) for x in rec[:4])
                if max(quad) > n_max:
                    raise ValueError(f"occupation {quad} exceeds n_max={n_max}")
                amps[quad] = amps.get(quad, 0j) + complex(float(rec[4]), float(rec[5]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed pure-state record: {exc}") from None
        return cls.from_amplitudes(amps, n_max, leakage, prune=0.0)


@dataclass(frozen=True)
class StateEnsemble:
    """Mixed state as a weighted list of unit-norm pure branches.

    ``discarded`` is the probability weight that was dropped while building
    the ensemble (pruned channel branches, truncation leakage).
    """

    branches: tuple[tuple[float, PureState], ...]
    discarded: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple((float(w), s) for w, s in self.branches))
        cutoffs = {s.n_max for _, s in self.branches}
        if len(cutoffs) > 1:
            raise CutoffMismatch(f"ensemble branches disagree on n_max: {sorted(cutoffs)}")
        for w, _ in self.branches:
            if w < 0:
                raise ValueError("ensemble weights must be non-negative")

    @classmethod
    def from_pure(cls, state: PureState) -> "StateEnsemble":
        weight = state.norm_sq()
        if weight == 0.0:
            raise ValueError("cannot build an ensemble from the zero state")
        return cls(((weight, state.normalized()),), max(0.0, 1.0 - weight))

    @property
    def n_max(self) -> int:
        return self.branches[0][1].n_max

    def total_weight(self) -> float:
        return float(sum(w for w, _ in self.branches))

    def to_json(self) -> dict:
        return {
            "discarded": self.discarded,
            "branches": [{"weight": w, "state": s.to_json()} for w, s in self.branches],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "StateEnsemble":
        try:
            branches = [(float(b["weight"]), PureState.from_json(b["state"])) for b in data["branches"]]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed ensemble record: {exc}") from None
        if not branches:
            raise ValueError("ensemble has no branches")
        return cls(tuple(branches), float(data.get("discarded", 0.0)))


AnyState = PureState | StateEnsemble


def as_ensemble(state: AnyState) -> StateEnsemble:
    return state if isinstance(state, StateEnsemble) else StateEnsemble.from_pure(state)


def load_state(text: str) -> AnyState:
    """Parse a pure-state or ensemble JSON document."""
    data = json.loads(text)
    if not isinstance(data, dict):
        raise ValueError("state document must be a JSON object")
    if "branches" in data:
        return StateEnsemble.from_json(data)
    return PureState.from_json(data)


def dump_state(state: AnyState) -> str:
    return json.dumps(state.to_json(), indent=1)


@dataclass(frozen=True)
class ReducedDensityMatrix:
    """One party's two-mode state; ``basis`` lists (n_H, n_V) pairs."""

    basis: tuple[tuple[int, int], ...]
    entries: np.ndarray = field(repr=False)

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def block(self, local_number: int) -> np.ndarray:
        idx = [i for i, (h, v) in enumerate(self.basis) if h + v == local_number]
        return self.entries[np.ix_(idx, idx)]


def ladder(state: PureState, mode: str, direction: str) -> PureState:
    """Apply a creation ("raise") or annihilation ("lower") operator."""
    k = _mode_index(mode)
    if direction not in ("raise", "lower"):
        raise ValueError("direction must be 'raise' or 'lower'")
    out: dict[OccupationQuad, complex] = {}
    leakage = state.leakage
    for quad, amp in state.amplitudes.items():
        n = quad[k]
        if direction == "raise":
            new_n, factor = n + 1, math.sqrt(n + 1)
        else:
            if n == 0:
                continue
            new_n, factor = n - 1, math.sqrt(n)
        value = amp * factor
        if new_n > state.n_max:
            leakage += abs(value) ** 2
            continue
        new = list(quad)
        new[k] = new_n
        out[OccupationQuad(*new)] = value
    return PureState.from_amplitudes(out, state.n_max, leakage)


def number_operator(state: PureState, mode: str | None = None) -> PureState:
    """Multiply each amplitude by the photon count in ``mode`` (all modes if None)."""
    k = None if mode is None else _mode_index(mode)
    out = {}
    for quad, amp in state.amplitudes.items():
        n = quad.total if k is None else quad[k]
        if n:
            out[quad] = amp * n
    return PureState(out, state.n_max, state.leakage)


def _check_cutoffs(lhs: PureState, rhs: PureState) -> None:
    if lhs.n_max != rhs.n_max:
        raise CutoffMismatch(f"n_max mismatch: {lhs.n_max} vs {rhs.n_max}")


def inner_product(lhs: PureState, rhs: PureState) -> complex:
    """<lhs|rhs>, conjugate-linear in ``lhs``."""
    _check_cutoffs(lhs, rhs)
    small, large = (lhs, rhs) if len(lhs) <= len(rhs) else (rhs, lhs)
    total = 0j
    for quad, a in small.amplitudes.items():
        b = large.amplitudes.get(quad)
        if b is not None:
            total += (a.conjugate() * b) if small is lhs else (b.conjugate() * a)
    return total


def norm(state: PureState) -> float:
    return math.sqrt(inner_product(state, state).real)


def add(lhs: PureState, rhs: PureState, coeff: complex = 1.0) -> PureState:
    """lhs + coeff * rhs."""
    _check_cutoffs(lhs, rhs)
    out = dict(lhs.amplitudes)
    for quad, amp in rhs.amplitudes.items():
        out[quad] = out.get(quad, 0j) + coeff * amp
    return PureState.from_amplitudes(out, lhs.n_max, lhs.leakage + abs(coeff) ** 2 * rhs.leakage)


def tensor(lhs: PureState, rhs: PureState) -> PureState:
    """Combine two states that occupy disjoint sets of modes."""
    _check_cutoffs(lhs, rhs)
    modes_l = {i for q in lhs.amplitudes for i, n in enumerate(q) if n}
    modes_r = {i for q in rhs.amplitudes for i, n in enumerate(q) if n}
    if modes_l & modes_r:
        raise ValueError("tensor() needs states on disjoint modes")
    out = {}
    for ql, al in lhs.amplitudes.items():
        for qr, ar in rhs.amplitudes.items():
            out[tuple(a + b for a, b in zip(ql, qr))] = al * ar
    leak = 1.0 - (1.0 - lhs.leakage) * (1.0 - rhs.leakage)
    return PureState.from_amplitudes(out, lhs.n_max, leak)


def mean_photon_number(state: AnyState, mode: str) -> float:
    k = _mode_index(mode)
    ens = as_ensemble(state)
    total = 0.0
    for w, branch in ens.branches:
        total += w * sum(q[k] * abs(a) ** 2 for q, a in branch.amplitudes.items())
    return total / ens.total_weight()


def partial_trace(state: AnyState, keep: str = ALICE) -> ReducedDensityMatrix:
    """Reduced state of the kept party (``"alice"`` or ``"bob"``)."""
    if keep not in (ALICE, BOB):
        raise ValueError("keep must be 'alice' or 'bob'")
    branches = [(1.0, state)] if isinstance(state, PureState) else list(state.branches)
    split = (lambda q: ((q[0], q[1]), (q[2], q[3]))) if keep == ALICE else (lambda q: ((q[2], q[3]), (q[0], q[1])))
    kept_basis = sorted({split(q)[0] for _, s in branches for q in s.amplitudes})
    index = {b: i for i, b in enumerate(kept_basis)}
    rho = np.zeros((len(kept_basis), len(kept_basis)), dtype=complex)
    for w, s in branches:
        # group amplitudes by the traced-out party's configuration
        groups: dict[tuple[int, int], list[tuple[int, complex]]] = {}
        for q, a in s.amplitudes.items():
            mine, other = split(q)
            groups.setdefault(other, []).append((index[mine], a))
        for entries in groups.values():
            idx = np.array([i for i, _ in entries])
            vec = np.array([a for _, a in entries])
            rho[np.ix_(idx, idx)] += w * np.outer(vec, vec.conj())
    return ReducedDensityMatrix(tuple(kept_basis), rho)


def in_subspace(quad: OccupationQuad, subspace: Subspace) -> bool:
    """Both parties hold the same local photon number N and N is in the set."""
    return quad.alice == quad.bob and quad.alice in subspace


def _project(state: PureState, subspace: Subspace) -> tuple[dict, float]:
    kept = {q: a for q, a in state.amplitudes.items() if in_subspace(q, subspace)}
    return kept, float(sum(abs(a) ** 2 for a in kept.values()))


def project_subspace(state: PureState, subspace: Subspace | str, min_weight: float = 1e-14) -> tuple[PureState, float]:
    """Condition on equal local photon numbers N_A = N_B = N in ``subspace``.

    Returns the renormalized state and the weight it had before
    renormalization.
    """
    subspace = Subspace.parse(subspace)
    kept, prob = _project(state, subspace)
    if prob < min_weight:
        raise EmptySubspaceError(f"state has weight {prob:.3e} in subspace {subspace}")
    nrm = math.sqrt(prob)
    return PureState({q: a / nrm for q, a in kept.items()}, state.n_max, 0.0), prob


def project_ensemble(state: AnyState, subspace: Subspace | str, min_weight: float = 1e-14) -> tuple[StateEnsemble, float]:
    """Ensemble version of :func:`project_subspace`; branches with no weight are dropped."""
    subspace = Subspace.parse(subspace)
    if isinstance(state, PureState):
        projected, prob = project_subspace(state, subspace, min_weight)
        return StateEnsemble(((1.0, projected),)), prob
    branches = []
    total = 0.0
    for w, s in state.branches:
        kept, p = _project(s, subspace)
        if p == 0.0:
            continue
        nrm = math.sqrt(p)
        branches.append((w * p, PureState({q: a / nrm for q, a in kept.items()}, s.n_max, 0.0)))
        total += w * p
    if total < min_weight:
        raise EmptySubspaceError(f"ensemble has weight {total:.3e} in subspace {subspace}")
    return StateEnsemble(tuple((w / total, s) for w, s in branches)), total


def fidelity_to_pure(state: AnyState, target: PureState) -> float:
    """Tr(rho |target><target|); ensembles average the squared overlaps."""
    if isinstance(state, PureState):
        return abs(inner_product(target, state)) ** 2
    return float(sum(w * abs(inner_product(target, s)) ** 2 for w, s in state.branches))
