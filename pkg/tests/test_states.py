import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from mbswitness.fock import (
    EmptySubspaceError,
    PureState,
    add,
    fidelity_to_pure,
    inner_product,
    mean_photon_number,
    norm,
    partial_trace,
)
from mbswitness.states import (
    ConditionedMBS,
    SqueezingParams,
    beam_splitter_interfere,
    blind_mixture,
    estimate_squeezing,
    exemplar_state,
    mbs_from_tmsv,
    mbs_singlet,
    postselect_pair,
    renormalized_probability,
    sector_probabilities,
    sector_probability,
    sector_singlet,
    subspace_probability,
    tmsv,
)

# frozen from a 15-digit sympy evaluation of the closed forms at r = 1/2
AMP_0000 = 0.786447732965927
AMP_1111 = -0.167947696278681
P0 = 0.618500036687247
P1 = 0.264164169990437
P1_NONVAC = 0.692435636681505
SINH2_HALF = 0.271540317407622


# -- mbs_singlet ----------------------------------------------------------------


def test_mbs_vacuum_limit():
    psi = mbs_singlet(0.0, 6)
    assert dict(psi.amplitudes) == {(0, 0, 0, 0): 1.0}
    assert psi.leakage == 0.0


def test_mbs_amplitudes():
    psi = mbs_singlet(0.5, 10)
    assert psi.amplitude((0, 0, 0, 0)).real == pytest.approx(AMP_0000, abs=1e-12)
    assert psi.amplitude((1, 1, 1, 1)).real == pytest.approx(AMP_1111, abs=1e-12)
    assert psi.amplitude((1, 0, 0, 1)).real > 0 > psi.amplitude((0, 1, 1, 0)).real


@pytest.mark.parametrize("r", [0.3, 0.8, 1.4])
def test_mbs_leakage_is_analytic_tail(r):
    n_max = 8
    psi = mbs_singlet(r, n_max)
    assert psi.norm_sq() + psi.leakage == pytest.approx(1.0, abs=1e-12)
    x = math.tanh(r) ** 2
    dropped = sum((big + 1) * x**big * (1 - x) ** 2 for big in range(n_max + 1, 2000))
    assert psi.leakage == pytest.approx(dropped, abs=1e-12)


def test_mbs_rejects_phase_and_negative_r():
    with pytest.raises(ValueError):
        mbs_singlet(SqueezingParams(0.5, theta=0.3))
    with pytest.raises(ValueError):
        mbs_singlet(-0.1)


@given(st.floats(0.0, 1.5))
def test_decomposition_identity(r):
    n_max = 8
    psi = mbs_singlet(r, n_max)
    t, ch = math.tanh(r), math.cosh(r)
    acc = PureState({}, n_max)
    for big in range(n_max + 1):
        acc = add(acc, sector_singlet(big, n_max), t**big * math.sqrt(big + 1) / ch**2)
    assert norm(add(psi, acc, -1.0)) < 1e-12


@given(st.floats(0.0, 1.5))
def test_rerouting_identity(r):
    a, b = mbs_singlet(r, 7), mbs_from_tmsv(r, 7)
    assert set(a.amplitudes) == set(b.amplitudes)
    assert max(abs(a.amplitudes[q] - b.amplitudes[q]) for q in a.amplitudes) < 1e-12


@pytest.mark.parametrize("r", [0.2, 0.7, 1.1])
def test_mode_means_agree(r):
    psi = mbs_singlet(r, 10)
    means = [mean_photon_number(psi, m) for m in ("AH", "AV", "BH", "BV")]
    assert max(means) - min(means) < 1e-10


@pytest.mark.parametrize("r", [0.25, 0.6, 1.0])
def test_sector_probability_matches_overlap(r):
    psi = mbs_singlet(r, 10)
    for big in range(11):
        overlap = abs(inner_product(sector_singlet(big), psi)) ** 2
        assert overlap == pytest.approx(sector_probability(big, r), abs=1e-12)


# -- sector_singlet -------------------------------------------------------------


def test_sector_singlet_examples():
    assert dict(sector_singlet(0).amplitudes) == {(0, 0, 0, 0): 1.0}
    psi = sector_singlet(1)
    assert psi.amplitude((1, 0, 0, 1)) == pytest.approx(2**-0.5)
    assert psi.amplitude((0, 1, 1, 0)) == pytest.approx(-(2**-0.5))
    assert np.allclose(partial_trace(sector_singlet(2), "alice").eigenvalues(), 1 / 3, atol=1e-12)


def test_sector_singlet_above_cutoff():
    with pytest.raises(ValueError):
        sector_singlet(4, n_max=3)


# -- tmsv -----------------------------------------------------------------------


def test_tmsv_examples():
    assert dict(tmsv(0.0).amplitudes) == {(0, 0, 0, 0): 1.0}
    assert mean_photon_number(tmsv(0.5, n_max=30), "AH") == pytest.approx(SINH2_HALF, abs=1e-12)
    minus = tmsv(0.5, ("AV", "BH"), -1)
    assert minus.amplitude((0, 1, 1, 0)).real < 0


def test_tmsv_requires_both_parties():
    with pytest.raises(ValueError):
        tmsv(0.5, ("AH", "AV"))


# -- sector probabilities -------------------------------------------------------


def test_sector_probabilities_vacuum():
    w = sector_probabilities(0.0, "full")
    assert w.weights[0] == 1.0
    assert all(v == 0.0 for n, v in w.weights.items() if n > 0)


def test_sector_probabilities_half():
    w = sector_probabilities(0.5, "full")
    assert w.weights[0] == pytest.approx(P0, abs=1e-12)
    assert w.weights[1] == pytest.approx(P1, abs=1e-12)
    wt = sector_probabilities(0.5, "nonvacuum", renormalize=True)
    assert wt.weights[1] == pytest.approx(P1_NONVAC, abs=1e-12)


def test_sector_probabilities_normalized():
    assert sector_probabilities(0.8, "full", max_sector=30).total() == pytest.approx(1.0, abs=1e-9)


def test_sector_probabilities_zero_weight():
    with pytest.raises(EmptySubspaceError):
        sector_probabilities(0.0, "nonvacuum")


@given(st.floats(0.01, 2.0), st.sampled_from(["nonvacuum", "1-3", "2,5", "0,4-"]))
def test_renormalized_sum_to_one(r, sub):
    total = sum(renormalized_probability(n, r, sub) for n in range(400))
    assert total == pytest.approx(1.0, abs=1e-9)
    direct = sum(sector_probability(n, r) for n in range(400) if renormalized_probability(n, r, sub) > 0)
    assert subspace_probability(r, sub) == pytest.approx(direct, rel=1e-9, abs=1e-300)


def test_conditioned_reference_normalized():
    ref = ConditionedMBS(0.5, "nonvacuum")
    assert ref.tail_weight(30) < 1e-13
    assert ref.amplitude((0, 0, 0, 0)) == 0.0
    assert ref.amplitude((1, 0, 0, 1)) ** 2 == pytest.approx(P1_NONVAC / 2, abs=1e-12)


# -- mixtures -------------------------------------------------------------------


def test_blind_mixture_examples():
    pure = blind_mixture({1: 1.0})
    assert len(pure.branches) == 1
    assert fidelity_to_pure(pure, sector_singlet(1)) == pytest.approx(1.0)
    w = {n: renormalized_probability(n, 0.5, "1-3") for n in (1, 2, 3)}
    ens = blind_mixture(w)
    target = mbs_singlet(0.5, 10)
    expected = sum(wn * sector_probability(n, 0.5) for n, wn in w.items())
    assert fidelity_to_pure(ens, target) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("weights", [{1: 0.5, 2: 0.6}, {1: -0.1, 2: 1.1}])
def test_blind_mixture_invalid(weights):
    with pytest.raises(ValueError):
        blind_mixture(weights)


# -- exemplars ------------------------------------------------------------------


def test_cross_layer_product_limit():
    assert dict(exemplar_state("cross_layer", 1, 0).amplitudes) == {(2, 0, 0, 2): 1}


@pytest.mark.parametrize("kind", ["cross_layer", "beam_splitter"])
def test_balanced_exemplars_maximally_entangled(kind):
    psi = exemplar_state(kind, 2**-0.5, 2**-0.5)
    ev = np.sort(partial_trace(psi, "alice").eigenvalues())
    assert np.allclose(ev, [0.5, 0.5], atol=1e-12)
    entropy = -sum(v * math.log2(v) for v in ev if v > 1e-15)
    assert entropy == pytest.approx(1.0, abs=1e-12)


def test_exemplar_requires_normalization():
    with pytest.raises(ValueError):
        exemplar_state("cross_layer", 1, 1)


# -- beam splitter --------------------------------------------------------------


def sympy_splitter(n_h, n_v, t):
    """Expand (a_H^+)^n_h (a_V^+)^n_v |0> through the splitter, symbolically."""
    ah, av, bh, bv = sp.symbols("ah av bh bv")
    c, s = sp.sqrt(t), sp.sqrt(1 - t)
    poly = sp.expand((c * ah + s * bh) ** n_h * (c * av + s * bv) ** n_v)
    pref = 1 / sp.sqrt(sp.factorial(n_h) * sp.factorial(n_v))
    out = {}
    for (i, j, k, l), coeff in sp.Poly(poly, ah, av, bh, bv).terms():
        amp = pref * coeff * sp.sqrt(sp.factorial(i) * sp.factorial(j) * sp.factorial(k) * sp.factorial(l))
        out[(i, j, k, l)] = float(amp)
    return out


def test_splitter_matches_symbolic_expansion():
    for t in (sp.Rational(1, 2), sp.Rational(1, 3)):
        got = beam_splitter_interfere(PureState.basis((2, 1, 0, 0)), float(t))
        expected = sympy_splitter(2, 1, t)
        assert set(got.amplitudes) == set(expected)
        for q, a in expected.items():
            assert got.amplitude(q).real == pytest.approx(a, abs=1e-12)


def test_splitter_postselection():
    out = beam_splitter_interfere(PureState.basis((2, 1, 0, 0)), 0.5)
    psi, prob = postselect_pair(out, [(2, 0, 0, 1), (0, 1, 2, 0)])
    assert prob == pytest.approx(0.25, abs=1e-12)
    assert abs(psi.amplitude((2, 0, 0, 1))) == pytest.approx(2**-0.5, abs=1e-12)
    assert abs(psi.amplitude((0, 1, 2, 0))) == pytest.approx(2**-0.5, abs=1e-12)


def test_splitter_single_photon():
    full = beam_splitter_interfere(PureState.basis((1, 0, 0, 0)), 1.0)
    assert dict(full.amplitudes) == {(1, 0, 0, 0): pytest.approx(1.0)}
    half = beam_splitter_interfere(PureState.basis((1, 0, 0, 0)), 0.5)
    assert half.amplitude((1, 0, 0, 0)) == pytest.approx(2**-0.5)
    assert half.amplitude((0, 0, 1, 0)) == pytest.approx(2**-0.5)


def test_splitter_preserves_norm():
    psi = PureState.from_amplitudes({(2, 1, 0, 0): 0.6, (1, 1, 1, 0): 0.8j})
    assert beam_splitter_interfere(psi, 0.3).norm_sq() == pytest.approx(1.0, abs=1e-12)


def test_postselection_empty():
    with pytest.raises(EmptySubspaceError):
        postselect_pair(PureState.basis((1, 0, 0, 0)), [(0, 1, 0, 0)])


# -- squeezing estimate ---------------------------------------------------------


def test_estimate_squeezing_examples():
    assert estimate_squeezing(0.0) == 0.0
    assert estimate_squeezing(math.sinh(0.5) ** 2) == pytest.approx(0.5, abs=1e-12)
    nbar = mean_photon_number(mbs_singlet(0.8, 12), "AH")
    assert estimate_squeezing(nbar, n_max=12) == pytest.approx(0.8, abs=1e-6)


def test_estimate_squeezing_untruncated_formula_bias():
    # the plain inversion ignores the cutoff and is biased low at n_max = 12
    nbar = mean_photon_number(mbs_singlet(0.8, 12), "AH")
    assert 1e-5 < 0.8 - estimate_squeezing(nbar) < 1e-3


def test_estimate_squeezing_negative():
    with pytest.raises(ValueError):
        estimate_squeezing(-0.1)
