"""Brute-force checks of the separability bounds.

Each oracle searches the relevant set of states directly and reports the best
overlap it found next to the analytic bound for the same sectors. An oracle
value above its bound means the bound (or the code computing it) is wrong.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .fock import DEFAULT_N_MAX, PureState, StateEnsemble, inner_product
from .states import ConditionedMBS, renormalized_probability, sector_singlet
from .subspace import FULL, NONVACUUM, Subspace
from .witness import bound_number, bound_polarization

SOUNDNESS_SLACK = 1e-9


@dataclass(frozen=True)
class OracleResult:
    achieved: float
    bound: float
    gap: float
    restarts: int
    converged_restarts: int
    residual: float
    seed: int | None
    details: dict = field(default_factory=dict)

    @property
    def sound(self) -> bool:
        return self.achieved <= self.bound + SOUNDNESS_SLACK

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class ProductAnsatz:
    """Superposition sum_N c_N |alpha_N>|beta_N> of per-sector product states.

    ``alice[N]`` and ``bob[N]`` are amplitude vectors over the sector basis
    |k, N-k> (k horizontal photons), so both have length N+1.
    """

    alice: dict[int, np.ndarray]
    bob: dict[int, np.ndarray]
    cross_sector: dict[int, complex]

    def __post_init__(self):
        if set(self.alice) != set(self.bob) or set(self.alice) != set(self.cross_sector):
            raise ValueError("alice, bob and cross_sector must cover the same sectors")
        for n in self.alice:
            for vec in (self.alice[n], self.bob[n]):
                if len(vec) != n + 1:
                    raise ValueError(f"sector {n} vectors need length {n + 1}")
                if abs(np.linalg.norm(vec) - 1.0) > 1e-10:
                    raise ValueError(f"sector {n} vectors must be unit norm")
        if abs(sum(abs(c) ** 2 for c in self.cross_sector.values()) - 1.0) > 1e-10:
            raise ValueError("cross-sector amplitudes must be normalized")

    def sector_state(self, n: int, n_max: int) -> PureState:
        a, b = self.alice[n], self.bob[n]
        amps = {(i, n - i, j, n - j): a[i] * b[j] for i in range(n + 1) for j in range(n + 1)}
        return PureState.from_amplitudes(amps, n_max, prune=0.0)

    def to_state(self, n_max: int) -> PureState:
        amps: dict = {}
        for n, c in self.cross_sector.items():
            for q, a in self.sector_state(n, n_max).amplitudes.items():
                amps[q] = amps.get(q, 0j) + c * a
        return PureState.from_amplitudes(amps, n_max, prune=0.0)


def _unit(vec: np.ndarray) -> np.ndarray:
    return vec / np.linalg.norm(vec)


def _random_unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    return _unit(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def sector_coefficients(state: PureState, n: int) -> np.ndarray:
    """Matrix M[i, j] = <i, n-i; j, n-j | state> over the N-sector product basis."""
    mat = np.zeros((n + 1, n + 1), dtype=complex)
    for i in range(n + 1):
        for j in range(n + 1):
            mat[i, j] = state.amplitude((i, n - i, j, n - j))
    return mat


def alternating_max(
    target: np.ndarray,
    rng: np.random.Generator,
    tol: float = 1e-14,
    max_iter: int = 500,
) -> tuple[np.ndarray, np.ndarray, float, bool, float, list[float]]:
    """Maximize |<target| a (x) b>|^2 over unit vectors by exact best responses.

    ``target`` is the coefficient matrix of the (unnormalized) target vector.
    The overlap is a^T conj(T) b, so for fixed b the best a is conj(conj(T) b)
    normalized, and symmetrically for b. Returns (a, b, value, converged,
    last improvement, objective history).
    """
    tc = target.conj()
    a = _random_unit(rng, target.shape[0])
    b = _random_unit(rng, target.shape[1])
    history: list[float] = []
    value = 0.0
    improvement = math.inf
    converged = False
    for _ in range(max_iter):
        u = tc @ b
        if np.linalg.norm(u) == 0.0:
            # b is orthogonal to every row; reseed
            b = _random_unit(rng, target.shape[1])
            continue
        a = _unit(u.conj())
        v = tc.T @ a
        b = _unit(v.conj())
        new = float(abs(a @ tc @ b) ** 2)
        improvement = new - value
        history.append(new)
        value = new
        if abs(improvement) <= tol and len(history) > 1:
            converged = True
            break
    return a, b, value, converged, improvement, history


def _sector_list(subspace: Subspace, n_max: int) -> list[int]:
    sectors = subspace.upto(n_max)
    if not sectors:
        raise ValueError(f"no sector of {subspace} is representable at n_max={n_max}")
    return sectors


def sector_block_top(
    r: float, n: int, subspace: Subspace | str = FULL, n_max: int = DEFAULT_N_MAX
) -> tuple[float, PureState]:
    """Largest eigenvalue and eigenvector of the N-sector block of the conditioned reference projector."""
    subspace = Subspace.parse(subspace)
    reference = ConditionedMBS(r, subspace)
    basis = [(i, n - i, j, n - j) for i in range(n + 1) for j in range(n + 1)]
    vec = np.array([reference.amplitude(q) for q in basis], dtype=complex)
    block = np.outer(vec, vec.conj())
    evals, evecs = np.linalg.eigh(block)
    top = evecs[:, -1]
    state = PureState.from_amplitudes(dict(zip(basis, top)), n_max, prune=0.0)
    return float(evals[-1]), state


def oracle_number_sup(r: float, subspace: Subspace | str = NONVACUUM, n_max: int = DEFAULT_N_MAX) -> OracleResult:
    """Best overlap for states without cross-sector coherence, sector by sector."""
    subspace = Subspace.parse(subspace)
    per_sector = {n: sector_block_top(r, n, subspace, n_max)[0] for n in _sector_list(subspace, n_max)}
    best_n = max(per_sector, key=per_sector.get)
    achieved = per_sector[best_n]
    bound = bound_number(r, subspace, max_sector=n_max)
    return OracleResult(
        achieved=achieved,
        bound=bound,
        gap=bound - achieved,
        restarts=1,
        converged_restarts=1,
        residual=0.0,
        seed=None,
        details={"argmax_sector": best_n, "per_sector": {str(k): v for k, v in per_sector.items()}},
    )


def sector_product_max(
    n: int, restarts: int = 64, seed: int = 0, n_max: int | None = None, tol: float = 1e-14
) -> OracleResult:
    """Best squared overlap of the N-sector singlet with a product state."""
    if n < 0:
        raise ValueError("sector must be non-negative")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    target = sector_coefficients(sector_singlet(n, n_max if n_max is not None else max(n, 1)), n)
    streams = np.random.SeedSequence(seed).spawn(restarts)
    best = -1.0
    converged = 0
    residual = 0.0
    for ss in streams:
        _, _, value, ok, improvement, _ = alternating_max(target, np.random.default_rng(ss), tol)
        converged += ok
        if value > best:
            best, residual = value, improvement
    bound = 1.0 / (n + 1)
    return OracleResult(best, bound, bound - best, restarts, converged, residual, seed)


def optimal_cross_sector(overlaps: dict[int, complex]) -> dict[int, complex]:
    """c_N maximizing |sum_N c_N a_N|^2 with sum |c_N|^2 = 1 (Cauchy-Schwarz equality)."""
    total = math.sqrt(sum(abs(a) ** 2 for a in overlaps.values()))
    if total == 0.0:
        raise ValueError("all sector overlaps vanish")
    return {n: a.conjugate() / total for n, a in overlaps.items()}


def _polarization_search(
    r: float, subspace: Subspace, n_max: int, restarts: int, seed: int, tol: float
) -> tuple[float, ProductAnsatz, float, int]:
    """Best product superposition over restarts: (value, ansatz, residual, converged restarts)."""
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    reference = ConditionedMBS(r, subspace)
    ref_state = reference.truncated(n_max)
    sectors = _sector_list(subspace, n_max)
    targets = {n: sector_coefficients(ref_state, n) for n in sectors}
    streams = np.random.SeedSequence(seed).spawn(restarts)
    best_value = -1.0
    best_ansatz = None
    residual = 0.0
    converged = 0
    for ss in streams:
        rng = np.random.default_rng(ss)
        alice, bob, overlaps = {}, {}, {}
        all_ok = True
        worst = 0.0
        for n in sectors:
            a, b, _, ok, improvement, _ = alternating_max(targets[n], rng, tol)
            alice[n], bob[n] = a, b
            all_ok &= ok
            worst = max(worst, abs(improvement))
            overlaps[n] = complex(a @ targets[n].conj() @ b)
        if all(abs(v) == 0.0 for v in overlaps.values()):
            continue
        ansatz = ProductAnsatz(alice, bob, optimal_cross_sector(overlaps))
        value = abs(reference.overlap(ansatz.to_state(n_max))) ** 2
        converged += all_ok
        if value > best_value:
            best_value, best_ansatz, residual = value, ansatz, worst
    return best_value, best_ansatz, residual, converged


def oracle_polarization_sup(
    r: float,
    subspace: Subspace | str = NONVACUUM,
    n_max: int = DEFAULT_N_MAX,
    restarts: int = 32,
    seed: int = 0,
    tol: float = 1e-14,
) -> OracleResult:
    """Best overlap over superpositions of per-sector product states.

    Per restart, every sector is optimized by alternating best responses
    from a random start, the cross-sector amplitudes are set in closed form,
    and the resulting state is overlapped with the reference directly.
    """
    subspace = Subspace.parse(subspace)
    value, ansatz, residual, converged = _polarization_search(r, subspace, n_max, restarts, seed, tol)
    bound = bound_polarization(r, subspace, max_sector=n_max)
    return OracleResult(
        achieved=value,
        bound=bound,
        gap=bound - value,
        restarts=restarts,
        converged_restarts=converged,
        residual=residual,
        seed=seed,
        details={"cross_sector_weights": {str(n): abs(c) ** 2 for n, c in ansatz.cross_sector.items()}},
    )


def convex_probe(
    r: float,
    subspace: Subspace | str = NONVACUUM,
    n_max: int = DEFAULT_N_MAX,
    points: int = 21,
    restarts: int = 32,
    seed: int = 0,
) -> OracleResult:
    """Mixtures lam * (number-oracle optimum) + (1 - lam) * (polarization-oracle optimum).

    Fidelity is linear in lam, so the grid maximum sits at an endpoint; the
    scan still evaluates every mixture so the witness sees real ensembles.
    The bound is the larger of the two cutoff-restricted bounds.
    """
    subspace = Subspace.parse(subspace)
    if points < 2:
        raise ValueError("points must be >= 2")
    per_sector = {n: sector_block_top(r, n, subspace, n_max) for n in _sector_list(subspace, n_max)}
    best_n = max(per_sector, key=lambda n: per_sector[n][0])
    number_state = per_sector[best_n][1]
    _, ansatz, _, converged = _polarization_search(r, subspace, n_max, restarts, seed, 1e-14)
    product_state = ansatz.to_state(n_max)
    reference = ConditionedMBS(r, subspace)
    f_number = abs(reference.overlap(number_state)) ** 2
    f_product = abs(reference.overlap(product_state)) ** 2
    fids = [lam * f_number + (1 - lam) * f_product for lam in np.linspace(0.0, 1.0, points)]
    achieved = float(max(fids))
    bound = max(bound_number(r, subspace, max_sector=n_max), bound_polarization(r, subspace, max_sector=n_max))
    return OracleResult(
        achieved=achieved,
        bound=bound,
        gap=bound - achieved,
        restarts=restarts,
        converged_restarts=converged,
        residual=0.0,
        seed=seed,
        details={"lambda_grid": points, "fidelities": fids, "number_sector": best_n},
    )


def convex_probe_states(
    r: float,
    subspace: Subspace | str = NONVACUUM,
    n_max: int = DEFAULT_N_MAX,
    points: int = 21,
    restarts: int = 32,
    seed: int = 0,
) -> list[StateEnsemble]:
    """The mixtures scanned by :func:`convex_probe`, as ensembles."""
    subspace = Subspace.parse(subspace)
    per_sector = {n: sector_block_top(r, n, subspace, n_max) for n in _sector_list(subspace, n_max)}
    number_state = max(per_sector.values(), key=lambda item: item[0])[1]
    _, ansatz, _, _ = _polarization_search(r, subspace, n_max, restarts, seed, 1e-14)
    product_state = ansatz.to_state(n_max)
    out = []
    for lam in np.linspace(0.0, 1.0, points):
        branches = tuple((w, s) for w, s in ((lam, number_state), (1.0 - lam, product_state)) if w > 0)
        out.append(StateEnsemble(branches))
    return out


# -- the Cauchy-Schwarz chain --------------------------------------------------


@dataclass(frozen=True)
class ChainLink:
    name: str
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class ChainReport:
    links: tuple[ChainLink, ...]

    @property
    def holds(self) -> bool:
        return all(link.holds for link in self.links)

    @property
    def first_violation(self) -> ChainLink | None:
        return next((link for link in self.links if not link.holds), None)


def random_ansatz(sectors, rng: np.random.Generator) -> ProductAnsatz:
    sectors = list(sectors)
    alice = {n: _random_unit(rng, n + 1) for n in sectors}
    bob = {n: _random_unit(rng, n + 1) for n in sectors}
    c = _random_unit(rng, len(sectors))
    return ProductAnsatz(alice, bob, dict(zip(sectors, c)))


def optimal_ansatz(r: float, subspace: Subspace | str = FULL, n_max: int = DEFAULT_N_MAX, seed: int = 0) -> ProductAnsatz:
    """Per-sector best product states with closed-form cross-sector amplitudes."""
    subspace = Subspace.parse(subspace)
    ref_state = ConditionedMBS(r, subspace).truncated(n_max)
    rng = np.random.default_rng(seed)
    alice, bob, overlaps = {}, {}, {}
    for n in _sector_list(subspace, n_max):
        target = sector_coefficients(ref_state, n)
        a, b, *_ = alternating_max(target, rng)
        alice[n], bob[n] = a, b
        overlaps[n] = complex(a @ target.conj() @ b)
    return ProductAnsatz(alice, bob, optimal_cross_sector(overlaps))


def verify_appendix_chain(
    ansatz: ProductAnsatz,
    r: float,
    subspace: Subspace | str = FULL,
    n_max: int | None = None,
    slack: float = 1e-10,
) -> ChainReport:
    """Evaluate each inequality bounding the overlap of a product superposition.

    Links, in order: the overlap is at most the squared sum of per-sector
    root terms; each per-sector product overlap is at most 1/(N+1); replacing
    the per-sector overlaps by 1/(N+1); Cauchy-Schwarz splitting the sum; the
    result is at most the polarization bound of the subspace.
    """
    subspace = Subspace.parse(subspace)
    n_max = n_max if n_max is not None else max(max(ansatz.cross_sector), 1)
    reference = ConditionedMBS(r, subspace)
    overlap = abs(reference.overlap(ansatz.to_state(n_max))) ** 2
    weights = {n: renormalized_probability(n, r, subspace) for n in ansatz.cross_sector}
    sector_fid = {
        n: abs(inner_product(sector_singlet(n, n_max), ansatz.sector_state(n, n_max))) ** 2 for n in ansatz.cross_sector
    }
    c2 = {n: abs(c) ** 2 for n, c in ansatz.cross_sector.items()}

    links = []

    def link(name, lhs, rhs):
        links.append(ChainLink(name, float(lhs), float(rhs), bool(lhs <= rhs + slack)))

    root_sum = sum(math.sqrt(weights[n] * c2[n] * sector_fid[n]) for n in ansatz.cross_sector) ** 2
    link("coherence_to_root_sum", overlap, root_sum)
    for n in sorted(ansatz.cross_sector):
        link(f"sector_{n}_product_overlap", sector_fid[n], 1.0 / (n + 1))
    capped = sum(math.sqrt(weights[n] * c2[n] / (n + 1)) for n in ansatz.cross_sector) ** 2
    link("sector_overlap_cap", root_sum, capped)
    split = sum(weights[n] / (n + 1) for n in ansatz.cross_sector) * sum(c2.values())
    link("cauchy_schwarz", capped, split)
    link("polarization_bound", split, bound_polarization(r, subspace))
    return ChainReport(tuple(links))


# -- negativity ----------------------------------------------------------------


def negativity(state: PureState, bipartition: str = "A|B", max_dim: int = 4096) -> float:
    """Negativity across Alice|Bob from the partial transpose on the state's support."""
    if bipartition not in ("A|B", "B|A"):
        raise ValueError("only the Alice|Bob bipartition is supported")
    amps = state.amplitudes
    alice = sorted({(q[0], q[1]) for q in amps})
    bob = sorted({(q[2], q[3]) for q in amps})
    dim = len(alice) * len(bob)
    if dim > max_dim:
        raise ValueError(f"support dimension {dim} exceeds cap {max_dim}")
    ia = {k: i for i, k in enumerate(alice)}
    ib = {k: i for i, k in enumerate(bob)}
    coeff = np.zeros((len(alice), len(bob)), dtype=complex)
    for q, a in amps.items():
        coeff[ia[(q[0], q[1])], ib[(q[2], q[3])]] = a
    coeff /= np.linalg.norm(coeff)
    rho = np.einsum("ij,kl->ijkl", coeff, coeff.conj())  # rho[a, b, a', b']
    rho_pt = rho.transpose(0, 3, 2, 1).reshape(dim, dim)
    evals = np.linalg.eigvalsh(rho_pt)
    return float(-evals[evals < 0].sum())
