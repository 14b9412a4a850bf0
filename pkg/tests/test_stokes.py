import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dense_oracle import stokes_matrices, to_vector
from mbswitness.fock import PureState, inner_product, number_operator
from mbswitness.states import blind_mixture, mbs_singlet, sector_singlet
from mbswitness.stokes import apply_stokes, stokes_variance, stokes_vector, total_spin_squared

H_A = PureState.basis((1, 0, 0, 0))
VAC = PureState.basis((0, 0, 0, 0))


def test_single_photon_images():
    assert dict(apply_stokes(H_A, "z", "alice").amplitudes) == {(1, 0, 0, 0): 0.5}
    assert dict(apply_stokes(H_A, "x", "alice").amplitudes) == {(0, 1, 0, 0): 0.5}
    assert dict(apply_stokes(H_A, "y", "alice").amplitudes) == {(0, 1, 0, 0): 0.5j}


def test_bob_operators_leave_alice_alone():
    assert apply_stokes(H_A, "x", "bob").norm_sq() == 0.0


def test_bad_axis_and_party():
    with pytest.raises(ValueError):
        apply_stokes(H_A, "w", "alice")
    with pytest.raises(ValueError):
        apply_stokes(H_A, "x", "carol")


def test_matches_rotated_mode_matrices():
    d = 4
    mats = stokes_matrices(d)
    rng = np.random.default_rng(11)
    amps = {tuple(rng.integers(0, 3, 4)): complex(*rng.standard_normal(2)) for _ in range(15)}
    psi = PureState.from_amplitudes(amps, n_max=d - 1)
    for party in ("alice", "bob"):
        for axis in "xyz":
            got = to_vector(apply_stokes(psi, axis, party), d)
            assert np.allclose(got, mats[party][axis] @ to_vector(psi, d), atol=1e-12)


def test_total_spin_squared_examples():
    assert total_spin_squared(VAC) == 0.0
    for n in (1, 2, 3):
        assert abs(total_spin_squared(sector_singlet(n))) < 1e-10
    # one H photon on each side: total spin 1
    assert total_spin_squared(PureState.basis((1, 0, 1, 0))) == pytest.approx(2.0, abs=1e-12)


def test_total_spin_squared_dense():
    d = 3
    mats = stokes_matrices(d)
    psi = PureState.basis((1, 0, 1, 0), n_max=d - 1)
    vec = to_vector(psi, d)
    s2 = sum((mats["alice"][a] + mats["bob"][a]) @ (mats["alice"][a] + mats["bob"][a]) for a in "xyz")
    assert total_spin_squared(psi) == pytest.approx((vec.conj() @ s2 @ vec).real, abs=1e-12)


def test_variance_examples():
    for axis in "xyz":
        assert stokes_variance(VAC, axis) == 0.0
        assert abs(stokes_variance(sector_singlet(1), axis, "total")) < 1e-10
    assert stokes_variance(H_A, "x", "alice") == pytest.approx(0.25)


def test_stokes_vector_of_horizontal_photon():
    vec = stokes_vector(H_A, "alice")
    assert (vec.sx, vec.sy, vec.sz) == pytest.approx((0.0, 0.0, 0.5))


def test_mbs_blindness_within_tail():
    for r in (0.3, 0.6, 1.0):
        assert total_spin_squared(mbs_singlet(r, 10)) <= 1e-6


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6))
def test_blind_mixture_spin_zero(raw):
    total = sum(raw)
    if total < 1e-6:
        return
    ens = blind_mixture({n + 1: w / total for n, w in enumerate(raw)}, n_max=8)
    assert abs(total_spin_squared(ens)) <= 1e-10


quads = st.tuples(*[st.integers(0, 3)] * 4)
sparse = st.dictionaries(
    quads,
    st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False),
    min_size=1,
    max_size=8,
)
axes = st.sampled_from("xyz")
parties = st.sampled_from(["alice", "bob", "total"])


@given(sparse, axes, parties)
def test_commutes_with_total_number(amps, axis, party):
    psi = PureState.from_amplitudes(amps, n_max=6, prune=0.0)
    before = apply_stokes(number_operator(psi), axis, party)
    after = number_operator(apply_stokes(psi, axis, party))
    keys = set(before.amplitudes) | set(after.amplitudes)
    assert all(abs(before.amplitude(q) - after.amplitude(q)) < 1e-12 for q in keys)


@given(sparse, sparse, axes, parties)
def test_hermitian(phi_amps, psi_amps, axis, party):
    phi = PureState.from_amplitudes(phi_amps, n_max=6, prune=0.0)
    psi = PureState.from_amplitudes(psi_amps, n_max=6, prune=0.0)
    lhs = inner_product(phi, apply_stokes(psi, axis, party))
    rhs = inner_product(apply_stokes(phi, axis, party), psi)
    assert abs(lhs - rhs) < 1e-12 * (1 + abs(lhs))
