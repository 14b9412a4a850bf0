"""Stokes operators and total polarization spin.

Operators:

    S_x = (a_H^+ a_V + a_V^+ a_H) / 2
    S_y = (a_H^+ a_V - a_V^+ a_H) / (2i)
    S_z = (a_H^+ a_H - a_V^+ a_V) / 2

With a_D = (a_H + a_V)/sqrt(2) and a_L = (a_H + i a_V)/sqrt(2) these are
S_x = (n_D - n_A)/2 and S_y = (n_R - n_L)/2, so S_y|1_H> = (i/2)|1_V>.

All operators conserve the local photon number. Images are computed without
truncation internally, so expectation values are exact for the given state
even when an image would leave the ``n_max`` box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fock import ALICE, BOB, AnyState, OccupationQuad, PureState, as_ensemble

AXES = ("x", "y", "z")
TOTAL = "total"

_SLOTS = {ALICE: (0, 1), BOB: (2, 3)}


def _stokes_terms(quad: OccupationQuad, axis: str, party: str) -> list[tuple[tuple[int, ...], complex]]:
    h, v = _SLOTS[party]
    nh, nv = quad[h], quad[v]
    if axis == "z":
        return [(tuple(quad), 0.5 * (nh - nv))] if nh != nv else []
    terms = []
    # a_H^+ a_V: moves one photon V -> H
    if nv > 0:
        q = list(quad)
        q[h], q[v] = nh + 1, nv - 1
        coef = math.sqrt((nh + 1) * nv)
        terms.append((tuple(q), 0.5 * coef if axis == "x" else -0.5j * coef))
    # a_V^+ a_H: moves one photon H -> V
    if nh > 0:
        q = list(quad)
        q[h], q[v] = nh - 1, nv + 1
        coef = math.sqrt(nh * (nv + 1))
        terms.append((tuple(q), 0.5 * coef if axis == "x" else 0.5j * coef))
    if axis not in ("x", "y"):
        raise ValueError(f"unknown axis {axis!r}")
    return terms


def _apply_raw(amplitudes, axis: str, party: str) -> dict[tuple, complex]:
    parties = (ALICE, BOB) if party == TOTAL else (party,)
    out: dict[tuple, complex] = {}
    for quad, amp in amplitudes.items():
        quad = OccupationQuad(*quad)
        for p in parties:
            for key, coef in _stokes_terms(quad, axis, p):
                out[key] = out.get(key, 0j) + coef * amp
    return out


def _check(axis: str, party: str) -> None:
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    if party not in (ALICE, BOB, TOTAL):
        raise ValueError("party must be 'alice', 'bob' or 'total'")


def apply_stokes(state: PureState, axis: str, party: str) -> PureState:
    """Unnormalized image S_axis|state> for one party (or the sum over both)."""
    _check(axis, party)
    return PureState.from_amplitudes(_apply_raw(state.amplitudes, axis, party), state.n_max, state.leakage)


def _inner(lhs: dict, rhs: dict) -> complex:
    return sum(a.conjugate() * rhs[q] for q, a in lhs.items() if q in rhs)


def _branch_moments(state: PureState, axis: str, party: str) -> tuple[float, float]:
    """(<S>, <S^2>) for a single branch, exact in the untruncated space."""
    psi = dict(state.amplitudes)
    image = _apply_raw(psi, axis, party)
    first = _inner(psi, image).real
    second = sum(abs(a) ** 2 for a in image.values())
    return first, second


@dataclass(frozen=True)
class StokesVector:
    sx: float
    sy: float
    sz: float
    party: str


def stokes_vector(state: AnyState, party: str = TOTAL) -> StokesVector:
    ens = as_ensemble(state)
    values = []
    for axis in AXES:
        _check(axis, party)
        values.append(sum(w * _branch_moments(s, axis, party)[0] for w, s in ens.branches) / ens.total_weight())
    return StokesVector(*values, party=party)


def stokes_variance(state: AnyState, axis: str, party: str = TOTAL) -> float:
    """<S_axis^2> - <S_axis>^2 for the mixed state."""
    _check(axis, party)
    ens = as_ensemble(state)
    total = ens.total_weight()
    first = second = 0.0
    for w, s in ens.branches:
        f, q = _branch_moments(s, axis, party)
        first += w * f
        second += w * q
    first /= total
    second /= total
    return second - first**2


def total_spin_squared(state: AnyState) -> float:
    """<S^2> with S = S_A + S_B, summed over the three axes."""
    ens = as_ensemble(state)
    acc = 0.0
    for w, s in ens.branches:
        acc += w * sum(_branch_moments(s, axis, TOTAL)[1] for axis in AXES)
    return acc / ens.total_weight()
