"""Fiat-Shamir proofs over a tabulated oracle domain, and the reduction to Sigma-adversaries.

Oracle-domain encoding
----------------------
A pair (x, a) is one oracle point.  ``PairEncoding(instances, commitments)``
fixes an ordered list for each coordinate and maps
``(x, a) -> rank(x) * len(commitments) + rank(a)`` (fixed-width mixed-radix
concatenation).  Signatures use composite instances x||m, encoded the same way
with ``rank(x||m) = rank(x) * |M| + msg_index(m)``; see ``signatures.py``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Sequence

import numpy as np

from .adversary import (
    OracleAlgorithm,
    QuantumPredicate,
    as_table,
    run,
    run_segment,
    run_segment_inverse,
    success_prob,
)
from .oracle import FiniteFunction, reprogram, sample_kwise, sample_uniform
from .qsim import Gate, RegisterLayout, StateVector, basis_projector, init, measure_register, project_prob
from .reprogram import SLACK, lemma1_lhs, lemma1_rhs, loss_constant, stage_one
from .seeding import frequency, trial_rng
from .sigma import ProverState, QuantumProver, SigmaProtocol


class EncodingError(ValueError):
    pass


class PairEncoding:
    def __init__(self, instances: Sequence, commitments: Sequence[int]):
        self.instances = list(instances)
        self.commitments = list(commitments)
        self._xi = {x: k for k, x in enumerate(self.instances)}
        self._ai = {a: k for k, a in enumerate(self.commitments)}
        if len(self._xi) != len(self.instances) or len(self._ai) != len(self.commitments):
            raise EncodingError("encoding lists must not repeat entries")

    @property
    def domain_size(self) -> int:
        return len(self.instances) * len(self.commitments)

    def index(self, x, a) -> int:
        try:
            return self._xi[x] * len(self.commitments) + self._ai[a]
        except (KeyError, TypeError):
            raise EncodingError(f"({x!r}, {a!r}) is outside the oracle domain") from None

    def decode(self, idx: int) -> tuple[Any, int]:
        if not 0 <= idx < self.domain_size:
            raise EncodingError(f"index {idx} outside the oracle domain")
        i, j = divmod(int(idx), len(self.commitments))
        return self.instances[i], self.commitments[j]


def schnorr_encoding(sigma) -> PairEncoding:
    """All of Z_p^* as instances (members and non-members) times the subgroup as commitments."""
    return PairEncoding(range(1, sigma.p), sigma.subgroup)


@dataclass(frozen=True)
class FSProof:
    a: int
    z: int

    def to_dict(self) -> dict:
        return {"a": int(self.a), "z": int(self.z)}


class FiatShamir:
    """FS[Sigma] with challenge c = H(encode(x, a))."""

    def __init__(self, sigma: SigmaProtocol, encoding: PairEncoding):
        self.sigma, self.encoding = sigma, encoding

    def _check_oracle(self, H):
        if H.domain_size != self.encoding.domain_size or H.range_size != self.sigma.challenge_size:
            raise EncodingError(
                f"oracle {H.domain_size}->{H.range_size} does not match the encoding "
                f"({self.encoding.domain_size} points, |C|={self.sigma.challenge_size})"
            )

    def prove(self, H, x, w, rng, max_iters: int = 64, return_iterations: bool = False):
        """Repeat commit/respond with c = H(x, a) until the transcript verifies.

        Returns None after ``max_iters`` failures; a bad witness raises ValueError.
        """
        self._check_oracle(H)
        if not self.sigma.relation(x, w):
            raise ValueError("(x, w) is not in the relation")
        for it in range(1, max_iters + 1):
            a, st = self.sigma.commit(x, w, rng)
            c = H(self.encoding.index(x, a))
            z = self.sigma.respond(st, c, rng)
            if z is not None and self.sigma.verify(x, a, c, z):
                proof = FSProof(a, z)
                return (proof, it) if return_iterations else proof
        return (None, max_iters) if return_iterations else None

    def verify(self, H, x, proof) -> bool:
        if not isinstance(proof, FSProof):
            return False
        self._check_oracle(H)
        try:
            c = H(self.encoding.index(x, proof.a))
        except EncodingError:
            return False
        return bool(self.sigma.verify(x, proof.a, c, proof.z))


def fs_prove(fs: FiatShamir, H, x, w, max_iters: int, rng):
    return fs.prove(H, x, w, rng, max_iters)


def fs_verify(fs: FiatShamir, H, x, proof) -> bool:
    return fs.verify(H, x, proof)


# -- quantum FS adversaries and the reduction --------------------------------------


def sigma_predicate(sigma: SigmaProtocol, encoding: PairEncoding) -> QuantumPredicate:
    """Pi_{(x,a), c} = projector onto responses z with V(x, a, c, z) = 1."""

    def rule(idx, c, dim_z):
        x, a = encoding.decode(idx)
        return np.array([1 if sigma.verify(x, a, c, sigma.response_of(z)) else 0 for z in range(dim_z)])

    return QuantumPredicate(f"V[{sigma.name}]", rule)


def honest_fs_adversary(
    sigma, encoding: PairEncoding, w: int, points: Sequence[tuple[Any, int]], weights=None
) -> OracleAlgorithm:
    """The honest FS prover as a one-query oracle algorithm.

    ``points`` lists (instance, y) with commitment a = g^y; the initial state is
    a superposition over the corresponding oracle points.  After the query, Z
    receives z = y + c w mod r and Y is cleared by recomputing c from z.
    Requires w invertible mod r and |C| <= r.
    """
    r, C = sigma.r, sigma.challenge_size
    if w % r == 0:
        raise ValueError("witness must be invertible mod r")
    w_inv = pow(w, -1, r)
    layout = RegisterLayout(encoding.domain_size, C, r, 1)
    y_of = {}
    for inst, y in points:
        y_of[encoding.index(inst, pow(sigma.g, y, sigma.p))] = y
    dx = encoding.domain_size
    xs, cs, zs = np.meshgrid(np.arange(dx), np.arange(C), np.arange(r), indexing="ij")
    ys = np.zeros(dx, dtype=np.int64)
    active = np.zeros(dx, dtype=bool)
    for idx, y in y_of.items():
        ys[idx], active[idx] = y, True
    y_grid = ys[xs]
    z_new = (zs + y_grid + cs * w) % r
    c_new = cs ^ ((((z_new - y_grid) * w_inv) % r) & (C - 1))
    on = active[xs]
    z_out = np.where(on, z_new, zs)
    c_out = np.where(on, c_new, cs)
    perm = np.ravel_multi_index((xs.ravel(), c_out.ravel(), z_out.ravel()), (dx, C, r))
    gate = Gate(("X", "Y", "Z"), perm=perm)
    amps = np.zeros(layout.shape, dtype=np.complex128)
    wts = np.full(len(y_of), 1.0 / len(y_of)) if weights is None else np.asarray(weights, float)
    for (idx, _), wt in zip(y_of.items(), wts):
        amps[idx, 0, 0, 0] = math.sqrt(wt)
    return OracleAlgorithm(layout, init(layout, amplitudes=amps), ((gate,),), "honest-fs")


@dataclass(frozen=True, eq=False)
class _ReductionContext:
    checkpoint: Any
    b: int
    x_index: int


class ReducedProver(QuantumProver):
    """S^A: the two-stage Sigma-adversary obtained from an FS adversary A by measure-and-reprogram.

    Stage one picks i in {0..q} and the bit b, runs A to slot i and measures
    the oracle point (x, a).  For a challenge c the second stage is the unitary
    A_{i+b->q}^{H*c(x,a)} A_{i->i+b}^H; the response is read from Z.
    """

    def __init__(self, A: OracleAlgorithm, sigma: SigmaProtocol, encoding: PairEncoding, H):
        H = as_table(H)
        if A.layout.dim_x != encoding.domain_size or H.domain_size != encoding.domain_size:
            raise EncodingError("FS adversary's X register does not match the pair encoding")
        if A.layout.dim_y != sigma.challenge_size:
            raise EncodingError("FS adversary's Y register does not match the challenge space")
        self.A, self.sigma, self.encoding, self.H = A, sigma, encoding, H

    def first_stage(self, rng):
        cp = stage_one(self.A, self.H, rng)
        b = int(rng.integers(0, 2))
        x, a = self.encoding.decode(cp.measured_x)
        return x, a, ProverState(cp.state, _ReductionContext(cp, b, cp.measured_x))

    def _bounds(self, ctx):
        i = ctx.checkpoint.i
        return i, min(i + ctx.b, self.A.q)

    def forward(self, state: ProverState, c: int) -> ProverState:
        ctx = state.context
        i, j = self._bounds(ctx)
        vec = run_segment(self.A, self.H, i, j, state.vector)
        vec = run_segment(self.A, reprogram(self.H, ctx.x_index, c), j, self.A.q, vec)
        return ProverState(vec, ctx)

    def backward(self, state: ProverState, c: int) -> ProverState:
        ctx = state.context
        i, j = self._bounds(ctx)
        vec = run_segment_inverse(self.A, reprogram(self.H, ctx.x_index, c), j, self.A.q, state.vector)
        vec = run_segment_inverse(self.A, self.H, i, j, vec)
        return ProverState(vec, ctx)


def fs_reduce(A: OracleAlgorithm, sigma: SigmaProtocol, encoding: PairEncoding, H) -> ReducedProver:
    return ReducedProver(A, sigma, encoding, H)


def reduction_acceptance(
    A: OracleAlgorithm,
    sigma: SigmaProtocol,
    encoding: PairEncoding,
    trials: int,
    seed: int,
    k: int | None = None,
) -> tuple[float, float]:
    """Frequency with which S^A convinces the Sigma-verifier, with a fresh H per trial.

    H is uniform, or drawn from the k-wise family when ``k`` is given.
    """
    from .sigma import run_interaction

    n = sigma.challenge_size.bit_length() - 1
    hits = 0
    for t in range(trials):
        rng = trial_rng(seed, t)
        if k is None:
            H = sample_uniform(encoding.domain_size, n, rng)
        else:
            H = sample_kwise(k, encoding.domain_size, n, rng)
        hits += run_interaction(sigma, fs_reduce(A, sigma, encoding, H), rng).accept
    return frequency(hits, trials)


@dataclass
class ReductionReport:
    adversary: str
    q: int
    C: int
    constant: int
    sigma_success_per_x0: list[float]
    fs_success_per_x0: list[float]
    bound_per_x0: list[float]
    per_x0_holds: bool
    sigma_success: float
    fs_success: float
    aggregate_bound: float
    additive: float
    holds: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["|C|"] = d.pop("C")
        return d


def verify_fs_reduction(A: OracleAlgorithm, sigma: SigmaProtocol, encoding: PairEncoding, H) -> ReductionReport:
    """Exact per-x0 and aggregate check of the reduction for one oracle H.

    Sigma-success at x0 is the simulator's acceptance probability with the
    verifier's challenge as theta, not requiring A's final output to repeat x0;
    FS-success is E_c of A's success against H*c x0.
    """
    H = as_table(H)
    V = sigma_predicate(sigma, encoding)
    q, C = A.q, sigma.challenge_size
    K = loss_constant(q)
    sig, fs, bounds = [], [], []
    for x0 in range(encoding.domain_size):
        s = lemma1_lhs(A, H, x0, V, require_final_x=False)
        bound, term1, term2 = lemma1_rhs(A, H, x0, V)
        sig.append(s)
        fs.append(term1)
        bounds.append(term1 / K - 1.0 / (2 * (q + 1) * C))
    per_x0 = all(s >= b - SLACK for s, b in zip(sig, bounds))
    additive = 1.0 / (2 * max(q, 1) * C)
    agg_bound = math.fsum(fs) / K - additive
    total = math.fsum(sig)
    return ReductionReport(
        A.name, q, C, K, sig, fs, bounds, per_x0, total, math.fsum(fs), agg_bound, additive,
        bool(per_x0 and total >= agg_bound - SLACK),
    )
