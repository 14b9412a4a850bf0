"""Constructors for macroscopic Bell states and related four-mode states."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.optimize import brentq

from .fock import (
    DEFAULT_N_MAX,
    MODES,
    EmptySubspaceError,
    OccupationQuad,
    PureState,
    StateEnsemble,
    tensor,
)
from .subspace import FULL, Subspace


@dataclass(frozen=True)
class SqueezingParams:
    r: float
    theta: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.r) or self.r < 0:
            raise ValueError(f"squeezing r must be finite and >= 0, got {self.r}")
        if not 0.0 <= self.theta < 2 * math.pi:
            raise ValueError("theta must lie in [0, 2*pi)")


def _params(params: SqueezingParams | float) -> SqueezingParams:
    return params if isinstance(params, SqueezingParams) else SqueezingParams(float(params))


def _require_zero_phase(p: SqueezingParams) -> None:
    if p.theta != 0.0:
        raise ValueError("only theta = 0 is supported for macroscopic Bell states")


def squeezing_ratio(r: float) -> tuple[float, float]:
    """Return (x, s) with x = tanh(r)**2 and s = 1 - x = sech(r)**2."""
    return math.tanh(r) ** 2, 1.0 / math.cosh(r) ** 2


def mbs_amplitude(n: int, m: int, r: float) -> float:
    """Coefficient of |n, m, m, n> in the macroscopic singlet."""
    return (-1) ** m * math.tanh(r) ** (n + m) / math.cosh(r) ** 2


def mbs_singlet(params: SqueezingParams | float, n_max: int = DEFAULT_N_MAX) -> PureState:
    """Macroscopic singlet truncated to the sectors N = n + m <= n_max.

    Whole sectors are kept so that every retained block is an exact sector
    singlet. The dropped weight, sum over N > n_max of p_N, is
    x**(K) (K s + 1) with K = n_max + 1, x = tanh(r)**2 and s = 1 - x.
    """
    p = _params(params)
    _require_zero_phase(p)
    x, s = squeezing_ratio(p.r)
    amps = {(n, m, m, n): mbs_amplitude(n, m, p.r) for n in range(n_max + 1) for m in range(n_max + 1 - n)}
    k = n_max + 1
    state = PureState.from_amplitudes(amps, n_max)
    # pruned amplitudes are already inside leakage; add the analytic tail on top
    return PureState(state.amplitudes, n_max, state.leakage + x**k * (k * s + 1.0))


def sector_singlet(N: int, n_max: int = DEFAULT_N_MAX) -> PureState:
    """Normalized singlet of the N-local-photon sector."""
    if N < 0:
        raise ValueError("N must be non-negative")
    if N > n_max:
        raise ValueError(f"sector N={N} does not fit below cutoff n_max={n_max}")
    c = 1.0 / math.sqrt(N + 1)
    return PureState.from_amplitudes({(n, N - n, N - n, n): (-1) ** (N - n) * c for n in range(N + 1)}, n_max)


def tmsv(
    params: SqueezingParams | float,
    mode_pair: tuple[str, str] = ("AH", "BV"),
    sign: int = 1,
    n_max: int = DEFAULT_N_MAX,
) -> PureState:
    """Two-mode squeezed vacuum in one Alice mode and one Bob mode, vacuum elsewhere."""
    p = _params(params)
    a_mode, b_mode = mode_pair
    if a_mode not in MODES[:2] or b_mode not in MODES[2:]:
        raise ValueError(f"mode_pair must be (Alice mode, Bob mode), got {mode_pair}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    ia, ib = MODES.index(a_mode), MODES.index(b_mode)
    t, ch = math.tanh(p.r), math.cosh(p.r)
    amps = {}
    for n in range(n_max + 1):
        quad = [0, 0, 0, 0]
        quad[ia] = quad[ib] = n
        amps[tuple(quad)] = sign**n * t**n / ch
    x, _ = squeezing_ratio(p.r)
    state = PureState.from_amplitudes(amps, n_max)
    return PureState(state.amplitudes, n_max, state.leakage + x ** (n_max + 1))


def mbs_from_tmsv(params: SqueezingParams | float, n_max: int = DEFAULT_N_MAX) -> PureState:
    """Macroscopic singlet assembled from two re-routed TMSVs.

    The product is cut to the sectors N <= n_max like :func:`mbs_singlet`.
    """
    full = tensor(tmsv(params, ("AH", "BV"), +1, n_max), tmsv(params, ("AV", "BH"), -1, n_max))
    return PureState({q: a for q, a in full.amplitudes.items() if q.alice <= n_max}, n_max)


# -- sector statistics -------------------------------------------------------


def sector_probability(N: int, r: float) -> float:
    """p_N = tanh(r)^(2N) (N+1) / cosh(r)^4."""
    x, s = squeezing_ratio(r)
    return (N + 1) * x**N * s * s


def _scaled_sums(x: float, subspace: Subspace) -> tuple[int, float, float]:
    """Sector sums with the common factor x**k0 removed (k0 = lowest sector).

    Returns (k0, sum (N+1) x^(N-k0), sum x^(N-k0)). The scaling keeps the
    r -> 0 limit of renormalized quantities finite when the vacuum is excluded.
    """
    if subspace.is_empty:
        raise EmptySubspaceError("empty sector set")
    k0 = subspace.min_sector
    weighted = sum((n + 1) * x ** (n - k0) for n in subspace.sectors)
    plain = sum(x ** (n - k0) for n in subspace.sectors)
    if subspace.tail_from is not None:
        k, s = subspace.tail_from, 1.0 - x
        weighted += x ** (k - k0) * (k * s + 1.0) / (s * s)
        plain += x ** (k - k0) / s
    return k0, weighted, plain


def subspace_probability(r: float, subspace: Subspace | str) -> float:
    """Total MBS weight in the sector set (not renormalized)."""
    subspace = Subspace.parse(subspace)
    x, s = squeezing_ratio(r)
    k0, weighted, _ = _scaled_sums(x, subspace)
    return s * s * x**k0 * weighted


def renormalized_probability(N: int, r: float, subspace: Subspace | str) -> float:
    """p~_N: the sector weight conditioned on the sector set (0 outside it)."""
    subspace = Subspace.parse(subspace)
    if N not in subspace:
        return 0.0
    x, _ = squeezing_ratio(r)
    k0, weighted, _ = _scaled_sums(x, subspace)
    return (N + 1) * x ** (N - k0) / weighted


@dataclass(frozen=True)
class SectorWeights:
    r: float
    weights: Mapping[int, float]
    subspace: Subspace
    renormalized: bool
    tail: float = 0.0  # weight of member sectors beyond the listed ones

    def total(self) -> float:
        return float(sum(self.weights.values()))


def sector_probabilities(
    params: SqueezingParams | float,
    subspace: Subspace | str = FULL,
    renormalize: bool = False,
    max_sector: int = 30,
) -> SectorWeights:
    """Sector occupation probabilities of the MBS, listed for N <= max_sector."""
    p = _params(params)
    subspace = Subspace.parse(subspace)
    if subspace.is_empty:
        raise EmptySubspaceError("empty sector set")
    total = subspace_probability(p.r, subspace)
    if total == 0.0:
        raise EmptySubspaceError(f"MBS(r={p.r}) has zero weight in subspace {subspace}")
    if renormalize:
        weights = {n: renormalized_probability(n, p.r, subspace) for n in subspace.upto(max_sector)}
        norm = 1.0
    else:
        weights = {n: sector_probability(n, p.r) for n in subspace.upto(max_sector)}
        norm = total
    tail = max(0.0, norm - sum(weights.values()))
    return SectorWeights(p.r, weights, subspace, renormalize, tail)


# -- conditioned reference ---------------------------------------------------


@dataclass(frozen=True)
class ConditionedMBS:
    """The untruncated macroscopic singlet conditioned on a sector set.

    Amplitudes are produced on demand, so overlaps with truncated states are
    exact overlaps with the ideal (infinite) reference.
    """

    r: float
    subspace: Subspace
    _k0: int = field(init=False, repr=False)
    _norm: float = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "subspace", Subspace.parse(self.subspace))
        x, _ = squeezing_ratio(self.r)
        k0, weighted, _ = _scaled_sums(x, self.subspace)
        object.__setattr__(self, "_k0", k0)
        object.__setattr__(self, "_norm", math.sqrt(weighted))

    def amplitude(self, quad: tuple) -> float:
        n_ah, n_av, n_bh, n_bv = quad
        if n_ah != n_bv or n_av != n_bh or (n_ah + n_av) not in self.subspace:
            return 0.0
        t = math.tanh(self.r)
        return (-1) ** n_av * t ** (n_ah + n_av - self._k0) / self._norm

    def overlap(self, state: PureState) -> complex:
        """<reference|state>; the reference is real."""
        return complex(sum(self.amplitude(q) * a for q, a in state.amplitudes.items()))

    def truncated(self, n_max: int) -> PureState:
        """Reference restricted to the sectors N <= n_max (norm below 1 by the tail)."""
        amps = {}
        for n in range(n_max + 1):
            for m in range(n_max + 1 - n):
                if n + m in self.subspace:
                    amps[(n, m, m, n)] = self.amplitude((n, m, m, n))
        return PureState.from_amplitudes(amps, n_max)

    def tail_weight(self, n_max: int) -> float:
        """Weight of the reference in sectors N > n_max."""
        return max(0.0, 1.0 - self.truncated(n_max).norm_sq())


# -- mixtures and exemplar states ---------------------------------------------


def blind_mixture(weights: Mapping[int, float], n_max: int = DEFAULT_N_MAX) -> StateEnsemble:
    """Incoherent mixture of sector singlets with the given weights."""
    ws = {int(n): float(w) for n, w in weights.items()}
    if any(w < 0 for w in ws.values()):
        raise ValueError("mixture weights must be non-negative")
    if abs(sum(ws.values()) - 1.0) > 1e-10:
        raise ValueError(f"mixture weights sum to {sum(ws.values())}, expected 1")
    return StateEnsemble(tuple((w, sector_singlet(n, n_max)) for n, w in sorted(ws.items()) if w > 0))


def exemplar_state(kind: str, alpha: complex, beta: complex, n_max: int = DEFAULT_N_MAX) -> PureState:
    """Cross-layer alpha|2002> + beta|0110> or beam-splitter alpha|2001> + beta|0120>."""
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-10:
        raise ValueError("|alpha|^2 + |beta|^2 must equal 1")
    terms = {
        "cross_layer": ((2, 0, 0, 2), (0, 1, 1, 0)),
        "beam_splitter": ((2, 0, 0, 1), (0, 1, 2, 0)),
    }
    if kind not in terms:
        raise ValueError(f"unknown exemplar kind {kind!r}")
    first, second = terms[kind]
    return PureState.from_amplitudes({first: alpha, second: beta}, n_max)


def _splitter_table(n1: int, n2: int, t: float) -> dict[tuple[int, int], float]:
    """Output amplitudes of |n1, n2> through the real splitter [[c, s], [s, -c]].

    c = sqrt(t), s = sqrt(1 - t); first input port feeds Alice's mode.
    """
    c, s = math.sqrt(t), math.sqrt(1.0 - t)
    poly: dict[tuple[int, int], float] = {}
    for i in range(n1 + 1):
        ci = math.comb(n1, i) * c**i * s ** (n1 - i)
        for j in range(n2 + 1):
            cj = math.comb(n2, j) * s**j * (-c) ** (n2 - j)
            a, b = i + j, n1 + n2 - i - j
            poly[(a, b)] = poly.get((a, b), 0.0) + ci * cj
    pref = 1.0 / math.sqrt(math.factorial(n1) * math.factorial(n2))
    return {
        (a, b): pref * v * math.sqrt(math.factorial(a) * math.factorial(b))
        for (a, b), v in poly.items()
        if v != 0.0
    }


def beam_splitter_interfere(state: PureState, transmissivity: float = 0.5) -> PureState:
    """Mix Alice's and Bob's modes pairwise per polarization.

    The source spatial mode occupies Alice's slots (A_H, A_V) and the
    ancilla port occupies Bob's; the splitter is
    out_A = sqrt(t) in_1 + sqrt(1-t) in_2, out_B = sqrt(1-t) in_1 - sqrt(t) in_2.
    """
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    out: dict[tuple, complex] = {}
    for quad, amp in state.amplitudes.items():
        h_table = _splitter_table(quad.n_AH, quad.n_BH, transmissivity)
        v_table = _splitter_table(quad.n_AV, quad.n_BV, transmissivity)
        for (ah, bh), ch in h_table.items():
            for (av, bv), cv in v_table.items():
                key = (ah, av, bh, bv)
                out[key] = out.get(key, 0j) + amp * ch * cv
    return PureState.from_amplitudes(out, state.n_max, state.leakage)


def postselect_pair(state: PureState, kept, min_weight: float = 1e-14) -> tuple[PureState, float]:
    """Keep only the listed basis states; return renormalized state and probability."""
    keys = {OccupationQuad(*q) for q in kept}
    amps = {q: a for q, a in state.amplitudes.items() if q in keys}
    prob = float(sum(abs(a) ** 2 for a in amps.values()))
    if prob < min_weight:
        raise EmptySubspaceError("post-selection has no support")
    nrm = math.sqrt(prob)
    return PureState({q: a / nrm for q, a in amps.items()}, state.n_max, 0.0), prob


# -- squeezing estimation ----------------------------------------------------


def _truncated_mean(x: float, n_max: int) -> float:
    """Per-mode mean photon number of the MBS cut to sectors N <= n_max."""
    big = np.arange(n_max + 1)
    w = (big + 1) * x**big
    # each mode carries N/2 photons on average within sector N
    return float((0.5 * big * w).sum() / w.sum())


def estimate_squeezing(mean_photons_per_mode: float, n_max: int | None = None) -> float:
    """Squeezing r from the mean photon number of one TMSV mode.

    Without a cutoff this is asinh(sqrt(n)). With ``n_max`` the mean is
    inverted for a macroscopic singlet cut to the sectors N <= n_max, whose
    per-mode mean falls short of sinh(r)^2 by the missing tail.
    """
    nbar = float(mean_photons_per_mode)
    if not math.isfinite(nbar) or nbar < 0:
        raise ValueError("mean photon number must be finite and >= 0")
    if n_max is None:
        return math.asinh(math.sqrt(nbar))
    if nbar == 0.0:
        return 0.0
    if nbar >= n_max / 3:
        raise ValueError(f"mean {nbar} is not reachable below cutoff n_max={n_max}")
    hi = 1.0 - 1e-15
    x = brentq(lambda v: _truncated_mean(v, n_max) - nbar, 0.0, hi, xtol=1e-15, rtol=1e-15)
    return math.atanh(math.sqrt(x))
