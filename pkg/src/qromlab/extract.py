"""Rewinding extraction, the sequential-projection bounds, and collapsing games."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from .oracle import CapacityError
from .qsim import Gate, RegisterLayout, StateVector, apply_unitary, init, permutation_gate
from .seeding import frequency, trial_rng
from .sigma import ExtractionError, ProverState, QuantumProver, SchnorrProtocol, SigmaProtocol, TwoResponseProtocol

SLACK = 1e-9
ENUM_CAP = 2**24


# -- rewinding extractor -------------------------------------------------------------


@dataclass
class ExtractionResult:
    witness: Any
    reason: str
    x: Any
    a: int
    challenges: list[int]
    responses: list[int | None]
    accepted: list[bool]

    @property
    def ok(self) -> bool:
        return self.reason == "ok"

    @property
    def all_accepted(self) -> bool:
        return all(self.accepted)


def _normalized(st: ProverState) -> ProverState:
    n2 = st.vector.norm2()
    return ProverState(StateVector(st.vector.layout, st.vector.amplitudes / math.sqrt(n2)), st.context)


def _finish(sigma, x, a, cs, zs, acc) -> ExtractionResult:
    if not all(acc):
        return ExtractionResult(None, "reject", x, a, cs, zs, acc)
    try:
        w = sigma.extract(x, a, list(zip(cs, zs)))
    except ExtractionError as e:
        return ExtractionResult(None, e.reason, x, a, cs, zs, acc)
    return ExtractionResult(w, "ok", x, a, cs, zs, acc)


def extract(prover: QuantumProver, x, t: int, rng) -> ExtractionResult:
    """Run the first stage once, then t rounds of challenge / measure Z / rewind.

    Challenges are drawn independently (collisions possible) before any
    response is measured.  ``x=None`` accepts whatever instance the prover
    commits to.
    """
    sigma = prover.sigma
    x_out, a, st = prover.first_stage(rng)
    if x is not None and x_out != x:
        raise ValueError("prover committed to a different instance")
    cs = [int(c) for c in rng.integers(0, sigma.challenge_size, size=t)]
    zs, acc = [], []
    for c in cs:
        st = prover.forward(st, c)
        z, st = prover.measure_response(st, rng)
        st = prover.backward(st, c)
        z = sigma.response_of(z)
        zs.append(z)
        acc.append(bool(sigma.verify(x_out, a, c, z)))
    return _finish(sigma, x_out, a, cs, zs, acc)


def extract_predicate_variant(prover: QuantumProver, x, t: int, rng) -> ExtractionResult:
    """As ``extract`` but each round first measures only accept/reject, and z only on accept."""
    sigma = prover.sigma
    x_out, a, st = prover.first_stage(rng)
    if x is not None and x_out != x:
        raise ValueError("prover committed to a different instance")
    cs = [int(c) for c in rng.integers(0, sigma.challenge_size, size=t)]
    zs, acc = [], []
    for c in cs:
        st = prover.forward(st, c)
        yes, no, p_acc = prover.accept_projection(st, x_out, a, c)
        if rng.random() < p_acc:
            z, st = prover.measure_response(_normalized(yes), rng)
            zs.append(sigma.response_of(z))
            acc.append(True)
        else:
            st = _normalized(no)
            zs.append(None)
            acc.append(False)
        st = prover.backward(st, c)
    return _finish(sigma, x_out, a, cs, zs, acc)


def single_run_acceptance(prover: QuantumProver, rng) -> bool:
    x, a, st = prover.first_stage(rng)
    c = int(rng.integers(0, prover.sigma.challenge_size))
    z = prover.respond(st, c, rng)
    return bool(prover.sigma.verify(x, a, c, z))


@dataclass
class ExtractorReport:
    prover: str
    t: int
    C: int
    trials: int
    acceptance: float
    acceptance_stderr: float
    attempt_success: float
    attempt_stderr: float
    extraction: float
    extraction_stderr: float
    bound: float
    holds: bool
    reasons: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["|C|"] = d.pop("C")
        return d


def extractor_bound_check(prover: QuantumProver, t: int, trials: int, seed: int, variant: str = "measure") -> ExtractorReport:
    """Empirical check of witness success >= V^(2t-1) - t^2/|C| - 3 sigma.

    V is the single-run acceptance frequency measured with the same streams layout.
    """
    run = extract if variant == "measure" else extract_predicate_variant
    sigma = prover.sigma
    acc = att = ext = 0
    reasons: dict[str, int] = {}
    for k in range(trials):
        acc += single_run_acceptance(prover, trial_rng(seed, k, 0))
        res = run(prover, None, t, trial_rng(seed, k, 1))
        att += res.all_accepted
        ext += res.ok and sigma.relation(res.x, res.witness)
        reasons[res.reason] = reasons.get(res.reason, 0) + 1
    V, V_err = frequency(acc, trials)
    A, A_err = frequency(att, trials)
    E, E_err = frequency(ext, trials)
    C = sigma.challenge_size
    bound = V ** (2 * t - 1) - t * t / C
    return ExtractorReport(
        type(prover).__name__, t, C, trials, V, V_err, A, A_err, E, E_err, bound,
        E >= bound - 3 * E_err, dict(sorted(reasons.items())),
    )


# -- library quantum provers for Schnorr-type protocols ------------------------------------


class _PermProver(QuantumProver):
    """Shared plumbing: cached per-challenge gate sequences on (Z, E)."""

    def __init__(self, sigma, x, layout: RegisterLayout):
        self.sigma, self.x, self.layout = sigma, x, layout
        self._gates: dict[int, tuple[Gate, ...]] = {}
        self._inv: dict[int, tuple[Gate, ...]] = {}

    def gates(self, c: int) -> tuple[Gate, ...]:
        raise NotImplementedError

    def _seq(self, c):
        if c not in self._gates:
            g = self.gates(c)
            self._gates[c] = g
            self._inv[c] = tuple(x.adjoint() for x in reversed(g))
        return self._gates[c], self._inv[c]

    def forward(self, state, c):
        vec = state.vector
        for g in self._seq(c)[0]:
            vec = apply_unitary(vec, g)
        return ProverState(vec, state.context)

    def backward(self, state, c):
        vec = state.vector
        for g in self._seq(c)[1]:
            vec = apply_unitary(vec, g)
        return ProverState(vec, state.context)


def _add_gate(layout, shift_fn) -> Gate:
    """(z, e) -> ((z + shift_fn(e)) mod dim_z, e)."""
    dz, de = layout.dim_z, layout.dim_e
    zs, es = np.meshgrid(np.arange(dz), np.arange(de), indexing="ij")
    shift = np.asarray([shift_fn(e) for e in range(de)])[es]
    perm = np.ravel_multi_index((((zs + shift) % dz).ravel(), es.ravel()), (dz, de))
    return Gate(("Z", "E"), perm=perm)


class HonestQuantumProver(_PermProver):
    """Knows w; E holds the commitment randomness y and z = y + c w is added into Z."""

    def __init__(self, sigma: SchnorrProtocol, x: int, w: int):
        super().__init__(sigma, x, RegisterLayout(1, 1, sigma.r, sigma.r))
        self.w = w

    def first_stage(self, rng):
        y = int(rng.integers(0, self.sigma.r))
        vec = init(self.layout, basis=(0, 0, 0, y))
        return self.x, pow(self.sigma.g, y, self.sigma.p), ProverState(vec)

    def gates(self, c):
        r = self.sigma.r
        return (_add_gate(self.layout, lambda e: e + c * self.w % r),)


class FixedChallengeProver(_PermProver):
    """Commits to a transcript for one challenge c* and always answers its z*."""

    def __init__(self, sigma: SchnorrProtocol, x: int, c_star: int, z_star: int = 0):
        super().__init__(sigma, x, RegisterLayout(1, 1, sigma.r, 1))
        self.c_star, self.z_star = c_star, z_star

    def first_stage(self, rng):
        a = self.sigma.simulate_commitment(self.x, self.c_star, self.z_star)
        return self.x, a, ProverState(init(self.layout, basis=0))

    def gates(self, c):
        return (_add_gate(self.layout, lambda e: self.z_star),)


def _qubit_rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


class PartialKnowledgeProver(_PermProver):
    """Knows w only on a 'knowledge' qubit k; responses are correct iff k = 1.

    E = (y, k) with index 2 y + k.  For challenge c the qubit is first rotated
    by an angle that depends on c, so the acceptance projectors for different
    challenges do not commute.  Responses stay unique (Schnorr verification).
    """

    def __init__(self, sigma: SchnorrProtocol, x: int, w: int, alpha: float = 0.6, spread: float = 0.8):
        super().__init__(sigma, x, RegisterLayout(1, 1, sigma.r, 2 * sigma.r))
        self.w, self.alpha, self.spread = w, alpha, spread

    def angle(self, c: int) -> float:
        return self.spread * math.pi * c / self.sigma.challenge_size

    def first_stage(self, rng):
        y = int(rng.integers(0, self.sigma.r))
        amps = np.zeros(self.layout.shape, dtype=np.complex128)
        amps[0, 0, 0, 2 * y + 1] = math.cos(self.alpha)
        amps[0, 0, 0, 2 * y] = math.sin(self.alpha)
        return self.x, pow(self.sigma.g, y, self.sigma.p), ProverState(init(self.layout, amplitudes=amps))

    def gates(self, c):
        r = self.sigma.r
        rot = Gate(("E",), matrix=np.kron(np.eye(r), _qubit_rotation(self.angle(c))))
        add = _add_gate(self.layout, lambda e: (e // 2) + c * self.w + (1 - e % 2))
        return rot, add

    def exact_acceptance(self) -> float:
        """Mean over c of the probability that the rotated qubit reads 1."""
        C = self.sigma.challenge_size
        psi = np.array([math.sin(self.alpha), math.cos(self.alpha)])
        return math.fsum((_qubit_rotation(self.angle(c)) @ psi)[1] ** 2 for c in range(C)) / C


class TwoResponseProver(_PermProver):
    """Prover for the two-response protocol whose free response bit is entangled with E.

    Z = (zb, s) with index 2 zb + s; E = (y, k) with index 2 y + k.  For every c:
    Hadamard on s, CNOT s -> k, Hadamard on k, then zb += y + c w + k.
    """

    def __init__(self, sigma: TwoResponseProtocol, x: int, w: int):
        r = sigma.base.r
        super().__init__(sigma, x, RegisterLayout(1, 1, 2 * r, 2 * r))
        self.w = w
        had = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
        self._hs = Gate(("Z",), matrix=np.kron(np.eye(r), had))
        self._hk = Gate(("E",), matrix=np.kron(np.eye(r), had))
        self._cnot = permutation_gate(self.layout, ("Z", "E"), lambda z, e: (z, e ^ (z & 1)))

    def first_stage(self, rng):
        base = self.sigma.base
        y = int(rng.integers(0, base.r))
        vec = init(self.layout, basis=(0, 0, 0, 2 * y))
        return self.x, pow(base.g, y, base.p), ProverState(vec)

    def gates(self, c):
        r = self.sigma.base.r
        dz, de = self.layout.dim_z, self.layout.dim_e
        zs, es = np.meshgrid(np.arange(dz), np.arange(de), indexing="ij")
        zb = (zs // 2 + es // 2 + c * self.w + (es & 1)) % r
        perm = np.ravel_multi_index(((2 * zb + (zs & 1)).ravel(), es.ravel()), (dz, de))
        return self._hs, self._cnot, self._hk, Gate(("Z", "E"), perm=perm)


# -- sequential projection bounds ---------------------------------------------------------


@dataclass
class BoundResult:
    V: float
    F: float
    bound: float
    holds: bool


def _check_projectors(P: np.ndarray) -> None:
    flat = P.reshape(-1, P.shape[-1], P.shape[-1])
    for M in flat:
        if np.abs(M @ M - M).max() > SLACK or np.abs(M - M.conj().T).max() > SLACK:
            raise ValueError("family member is not an orthogonal projector")


def projection_bound_check(projectors, psi, t: int, check: bool = True) -> BoundResult:
    """V = mean_i ||P_i psi||^2, F = mean over i_1..i_t of ||P_{i_t}...P_{i_1} psi||^2; F >= V^(2t-1)."""
    P = np.asarray(projectors, dtype=np.complex128)
    psi = np.asarray(psi, dtype=np.complex128)
    n, d = P.shape[0], P.shape[-1]
    if n**t * d > ENUM_CAP:
        raise CapacityError(f"n^t * dim = {n**t * d} exceeds the enumeration cap")
    if check:
        _check_projectors(P)
    first = np.einsum("nij,j->ni", P, psi)
    V = float(np.mean(np.sum(np.abs(first) ** 2, axis=1)))
    vecs = first
    for _ in range(t - 1):
        vecs = np.einsum("nij,kj->kni", P, vecs).reshape(-1, d)
    F = float(np.mean(np.sum(np.abs(vecs) ** 2, axis=1)))
    bound = V ** (2 * t - 1)
    return BoundResult(V, F, bound, F >= bound - SLACK)


def two_part_bound_check(projectors, psi, check: bool = True) -> BoundResult:
    """P has shape (n, m, d, d); F = mean of ||P_{i2 j3} P_{i2 j2} P_{i1 j1} psi||^2; F >= V^6."""
    P = np.asarray(projectors, dtype=np.complex128)
    psi = np.asarray(psi, dtype=np.complex128)
    n, m, d = P.shape[0], P.shape[1], P.shape[-1]
    if n * n * m**3 * d > ENUM_CAP:
        raise CapacityError("n^2 m^3 * dim exceeds the enumeration cap")
    if check:
        _check_projectors(P)
    v1 = np.einsum("abij,j->abi", P, psi)
    V = float(np.mean(np.sum(np.abs(v1) ** 2, axis=-1)))
    v2 = np.einsum("cdij,abj->abcdi", P, v1)
    v3 = np.einsum("cfij,abcdj->abcdfi", P, v2)
    F = float(np.mean(np.sum(np.abs(v3) ** 2, axis=-1)))
    bound = V**6
    return BoundResult(V, F, bound, F >= bound - SLACK)


def random_state(rng, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_projector(rng, dim: int, rank: int | None = None) -> np.ndarray:
    if rank is None:
        rank = int(rng.integers(0, dim + 1))
    if rank == 0:
        return np.zeros((dim, dim), dtype=np.complex128)
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    Q, _ = np.linalg.qr(G)
    return Q @ Q.conj().T


def random_bound_instance(rng, max_n: int = 6, max_dim: int = 16):
    n = int(rng.integers(1, max_n + 1))
    dim = int(rng.integers(1, max_dim + 1))
    return np.stack([random_projector(rng, dim) for _ in range(n)]), random_state(rng, dim)


def random_two_part_instance(rng, max_n: int = 3, max_m: int = 3, max_dim: int = 8):
    n = int(rng.integers(1, max_n + 1))
    m = int(rng.integers(1, max_m + 1))
    dim = int(rng.integers(1, max_dim + 1))
    P = np.stack([np.stack([random_projector(rng, dim) for _ in range(m)]) for _ in range(n)])
    return P, random_state(rng, dim)


# -- collapsing games ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CollapsingRelation:
    """R(x, y) in {0,1} as a table of shape (|X'|, |Y'|)."""

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table)
        if t.ndim != 2 or not np.all((t == 0) | (t == 1)):
            raise ValueError("relation table must be a 2-D 0/1 array")
        object.__setattr__(self, "table", t.astype(np.float64))

    @property
    def shape(self) -> tuple[int, int]:
        return self.table.shape

    def unique_partners(self) -> bool:
        """Every y has at most one x with R(x, y) = 1."""
        return bool(np.all(self.table.sum(axis=0) <= 1))


@dataclass(frozen=True, eq=False)
class Distinguisher:
    """A_2: a unitary on S (x) X (x) Y followed by a computational measurement; b = output_mask[outcome]."""

    unitary: np.ndarray
    output_mask: np.ndarray


def _dims(R: CollapsingRelation, state: np.ndarray) -> tuple[int, int, int]:
    if state.ndim != 3 or state.shape[1:] != R.shape:
        raise ValueError(f"A_1 state must have shape (dim_S, {R.shape[0]}, {R.shape[1]})")
    return state.shape


def _b_prob(A2: Distinguisher, branch: np.ndarray) -> float:
    out = A2.unitary @ branch.reshape(-1)
    return float(np.sum(np.abs(out) ** 2 * A2.output_mask))


def collapsing_probabilities(R: CollapsingRelation, state: np.ndarray, A2: Distinguisher) -> tuple[float, float]:
    """Exact Pr[r = b = 1] in Game 1 (X and Y measured) and Game 2 (only Y measured)."""
    dS, dX, dY = _dims(R, state)
    on = state * R.table[None, :, :]
    p1 = p2 = 0.0
    for y in range(dY):
        branch = np.zeros_like(on)
        branch[:, :, y] = on[:, :, y]
        p2 += _b_prob(A2, branch)
        for x in range(dX):
            if not np.any(on[:, x, y]):
                continue
            b1 = np.zeros_like(on)
            b1[:, x, y] = on[:, x, y]
            p1 += _b_prob(A2, b1)
    return p1, p2


@dataclass
class GameReport:
    game: str
    trials: int
    p1: float
    p2: float
    advantage: float
    stderr: float
    exact: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _sample_game(R, state, A2, game_id: int, rng) -> bool:
    dS, dX, dY = state.shape
    on = state * R.table[None, :, :]
    p_r = float(np.sum(np.abs(on) ** 2))
    if rng.random() >= p_r:
        return False
    probs_y = np.sum(np.abs(on) ** 2, axis=(0, 1))
    y = int(rng.choice(dY, p=probs_y / probs_y.sum()))
    branch = np.zeros_like(on)
    branch[:, :, y] = on[:, :, y]
    if game_id == 1:
        probs_x = np.sum(np.abs(branch) ** 2, axis=(0, 2))
        x = int(rng.choice(dX, p=probs_x / probs_x.sum()))
        keep = np.zeros_like(branch)
        keep[:, x, :] = branch[:, x, :]
        branch = keep
    branch = branch / math.sqrt(float(np.sum(np.abs(branch) ** 2)))
    return rng.random() < _b_prob(A2, branch)


def collapsing_game(
    R: CollapsingRelation,
    state: np.ndarray,
    A2: Distinguisher,
    trials: int = 0,
    seed: int = 0,
    name: str = "collapse",
) -> GameReport:
    """|Pr_Game1[r=b=1] - Pr_Game2[r=b=1]|, exact when ``trials == 0``, else sampled."""
    state = np.asarray(state, dtype=np.complex128)
    _dims(R, state)
    if trials == 0:
        p1, p2 = collapsing_probabilities(R, state, A2)
        return GameReport(name, 0, p1, p2, abs(p1 - p2), 0.0, True)
    h1 = sum(_sample_game(R, state, A2, 1, trial_rng(seed, k, 1)) for k in range(trials))
    h2 = sum(_sample_game(R, state, A2, 2, trial_rng(seed, k, 2)) for k in range(trials))
    p1, e1 = frequency(h1, trials)
    p2, e2 = frequency(h2, trials)
    return GameReport(name, trials, p1, p2, abs(p1 - p2), math.hypot(e1, e2), False)


def pair_fourier_distinguisher(dS: int, dX: int, dY: int, x0: int, x1: int) -> Distinguisher:
    """Hadamard on span{|x0>, |x1>} of X; b = 1 iff X reads x0 afterwards."""
    h = np.eye(dX, dtype=np.complex128)
    s = 1 / math.sqrt(2)
    h[np.ix_([x0, x1], [x0, x1])] = [[s, s], [s, -s]]
    U = np.kron(np.kron(np.eye(dS), h), np.eye(dY))
    mask = np.zeros((dS, dX, dY))
    mask[:, x0, :] = 1
    return Distinguisher(U, mask.reshape(-1))


def coin_distinguisher(dS: int, dX: int, dY: int) -> Distinguisher:
    """Ignores X and Y: b is a fair coin read from S (requires dim_S >= 2)."""
    if dS < 2:
        raise ValueError("need a qubit in S")
    h = np.eye(dS, dtype=np.complex128)
    s = 1 / math.sqrt(2)
    h[:2, :2] = [[s, s], [s, -s]]
    U = np.kron(h, np.eye(dX * dY))
    mask = np.zeros((dS, dX, dY))
    mask[0] = 1
    return Distinguisher(U, mask.reshape(-1))


def function_relation(f: Sequence[int], dY: int) -> CollapsingRelation:
    table = np.zeros((len(f), dY))
    table[np.arange(len(f)), np.asarray(f)] = 1
    return CollapsingRelation(table)


def graph_state(f: Sequence[int], dY: int, dS: int = 1) -> np.ndarray:
    """A_1 preparing sum_x |0>_S |x> |f(x)> / sqrt(|X|)."""
    st = np.zeros((dS, len(f), dY), dtype=np.complex128)
    st[0, np.arange(len(f)), np.asarray(f)] = 1 / math.sqrt(len(f))
    return st


# -- quantum computationally unique responses ------------------------------------------------


def response_relation(sigma: SigmaProtocol, x, commitments: Sequence[int], challenges: Sequence[int]) -> CollapsingRelation:
    """V(x, ., ., .) as a relation between responses (X side) and (a, c) pairs (Y side).

    Y index = rank(a) * len(challenges) + rank(c).
    """
    dz = sigma.response_dim
    table = np.zeros((dz, len(commitments) * len(challenges)))
    for ia, a in enumerate(commitments):
        for ic, c in enumerate(challenges):
            for z in range(dz):
                if sigma.verify(x, a, c, sigma.response_of(z)):
                    table[z, ia * len(challenges) + ic] = 1
    return CollapsingRelation(table)


def valid_response_superposition(R: CollapsingRelation, y_index: int, dS: int = 1) -> np.ndarray:
    """A_1 preparing the uniform superposition of valid responses for one (a, c) cell."""
    col = R.table[:, y_index]
    if not col.any():
        raise ValueError("cell has no valid response")
    st = np.zeros((dS, *R.shape), dtype=np.complex128)
    st[0, :, y_index] = col / math.sqrt(col.sum())
    return st


def qcur_check(
    sigma: SigmaProtocol,
    x,
    a: int,
    c: int,
    trials: int = 0,
    seed: int = 0,
    distinguisher: str = "fourier",
) -> GameReport:
    """Collapsing game on the response relation for one (a, c) cell.

    A_1 prepares the uniform superposition of valid responses; the Fourier
    distinguisher acts on the first two valid responses, or on the unique one
    and its successor.
    """
    R = response_relation(sigma, x, [a], [c])
    state = valid_response_superposition(R, 0, dS=2)
    dS, dX, dY = state.shape
    valid = np.flatnonzero(R.table[:, 0])
    z0 = int(valid[0])
    z1 = int(valid[1]) if valid.size > 1 else (z0 + 1) % dX
    if distinguisher == "fourier":
        A2 = pair_fourier_distinguisher(dS, dX, dY, z0, z1)
    elif distinguisher == "coin":
        A2 = coin_distinguisher(dS, dX, dY)
    else:
        raise ValueError(f"unknown distinguisher {distinguisher!r}")
    return collapsing_game(R, state, A2, trials, seed, name=f"qcur[{sigma.name}]")
