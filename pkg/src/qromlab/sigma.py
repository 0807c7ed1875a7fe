"""Sigma-protocols, classical and quantum provers, and the soundness / PoK games.

A prover is any object with

* ``first_stage(rng) -> (x, a, state)``
* ``respond(state, c, rng) -> z`` (``None`` for an aborting prover)

Quantum provers (``QuantumProver``) additionally expose the second stage as a
unitary ``forward(state, c)`` with inverse ``backward(state, c)`` acting on a
``ProverState`` whose Z register holds the response; this is what the
rewinding extractor uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from sympy import isprime, n_order, primefactors

from .qsim import StateVector, basis_projector, measure_register, project
from .seeding import frequency, trial_rng


class ExtractionError(ValueError):
    def __init__(self, reason: str, message: str = ""):
        super().__init__(message or reason)
        self.reason = reason


class SigmaProtocol:
    """Interface for three-round public-coin protocols over integer-coded messages."""

    name = "sigma"
    challenge_size: int
    response_dim: int
    t = 2

    def gen(self, rng) -> tuple[Any, Any]:
        raise NotImplementedError

    def relation(self, x, w) -> bool:
        raise NotImplementedError

    def commit(self, x, w, rng) -> tuple[int, Any]:
        raise NotImplementedError

    def respond(self, state, c: int, rng) -> int | None:
        raise NotImplementedError

    def verify(self, x, a, c, z) -> bool:
        raise NotImplementedError

    def extract(self, x, a, transcripts: Sequence[tuple[int, int]]):
        raise NotImplementedError

    def in_language(self, x) -> bool:
        raise NotImplementedError

    def response_of(self, z: int) -> int:
        """Map a response-register basis index to a protocol response."""
        return z


class SchnorrProtocol(SigmaProtocol):
    """Proof of knowledge of w with g^w = x in the order-r subgroup of Z_p^*.

    Challenges are the integers 0..2^challenge_bits - 1, read in Z_r
    (requires 2^challenge_bits <= r so distinct challenges stay distinct mod r).
    """

    name = "schnorr"

    def __init__(self, p: int = 607, g: int | None = None, challenge_bits: int = 6):
        if not isprime(p) or p > 2**31:
            raise ValueError(f"p={p} is not a prime <= 2^31")
        if g is None:
            r = max(primefactors(p - 1))
            g = next(
                pow(h, (p - 1) // r, p) for h in range(2, p) if pow(h, (p - 1) // r, p) != 1
            )
        if not 1 < g < p:
            raise ValueError("g must lie in (1, p)")
        r = n_order(g, p)
        if not isprime(r):
            raise ValueError(f"g={g} generates a subgroup of composite order {r}")
        if (1 << challenge_bits) > r:
            raise ValueError(f"challenge space 2^{challenge_bits} exceeds the group order {r}")
        self.p, self.g, self.r = p, g, r
        self.challenge_bits = challenge_bits
        self.challenge_size = 1 << challenge_bits
        self.response_dim = r
        self.subgroup = sorted(pow(g, k, p) for k in range(r))
        self._subgroup_set = set(self.subgroup)

    def __repr__(self):
        return f"SchnorrProtocol(p={self.p}, g={self.g}, r={self.r}, |C|={self.challenge_size})"

    def gen(self, rng):
        w = int(rng.integers(0, self.r))
        return pow(self.g, w, self.p), w

    def relation(self, x, w) -> bool:
        return isinstance(w, (int, np.integer)) and 0 <= w < self.r and pow(self.g, int(w), self.p) == x

    def commit(self, x, w, rng):
        y = int(rng.integers(0, self.r))
        return pow(self.g, y, self.p), (x, w, y)

    def respond(self, state, c, rng=None):
        _, w, y = state
        return (y + c * w) % self.r

    def verify(self, x, a, c, z) -> bool:
        try:
            x, a, c, z = int(x), int(a), int(c), int(z)
        except (TypeError, ValueError):
            return False
        if not (0 < x < self.p and 0 < a < self.p and 0 <= c < self.challenge_size and 0 <= z < self.r):
            return False
        return pow(self.g, z, self.p) == a * pow(x, c, self.p) % self.p

    def extract(self, x, a, transcripts):
        (c1, z1), (c2, z2) = transcripts[:2]
        if (c1 - c2) % self.r == 0:
            raise ExtractionError("collision", "challenge collision")
        w = (z1 - z2) * pow(c1 - c2, -1, self.r) % self.r
        if not self.relation(x, w):
            raise ExtractionError("algebra", "combined transcripts give no witness")
        return w

    def simulate_commitment(self, x: int, c: int, z: int) -> int:
        """a = g^z x^{-c}, the commitment under which (c, z) verifies."""
        return pow(self.g, z, self.p) * pow(x, -c, self.p) % self.p

    def brute_force_dlog(self, x: int) -> int | None:
        acc = 1
        for w in range(self.r):
            if acc == x:
                return w
            acc = acc * self.g % self.p
        return None

    def in_language(self, x) -> bool:
        return self.brute_force_dlog(x) is not None

    def is_commitment(self, a: int) -> bool:
        return a in self._subgroup_set

    def non_members(self) -> list[int]:
        return [x for x in range(1, self.p) if x not in self._subgroup_set]


class RejectingProtocol(SigmaProtocol):
    """Wraps a protocol so that the honest response is replaced by None w.p. beta."""

    def __init__(self, base: SigmaProtocol, beta: float = 0.25):
        if not 0 <= beta <= 1:
            raise ValueError("beta must lie in [0, 1]")
        self.base, self.beta = base, beta
        self.name = f"{base.name}-reject({beta})"
        self.challenge_size = base.challenge_size
        self.response_dim = base.response_dim
        self.t = base.t

    def __getattr__(self, item):
        return getattr(self.base, item)

    def gen(self, rng):
        return self.base.gen(rng)

    def relation(self, x, w):
        return self.base.relation(x, w)

    def commit(self, x, w, rng):
        return self.base.commit(x, w, rng)

    def respond(self, state, c, rng):
        if self.beta > 0 and rng.random() < self.beta:
            return None
        return self.base.respond(state, c, rng)

    def verify(self, x, a, c, z):
        return z is not None and self.base.verify(x, a, c, z)

    def extract(self, x, a, transcripts):
        return self.base.extract(x, a, transcripts)

    def in_language(self, x):
        return self.base.in_language(x)


def rejecting_toy_protocol(beta: float = 0.25, base: SigmaProtocol | None = None) -> RejectingProtocol:
    return RejectingProtocol(base or SchnorrProtocol(), beta)


class TwoResponseProtocol(SigmaProtocol):
    """Schnorr with a free extra response bit: z' = 2 z + s is valid for both s.

    Every (a, c) cell has two valid responses, so responses are not unique.
    """

    def __init__(self, base: SchnorrProtocol | None = None):
        self.base = base or SchnorrProtocol()
        self.name = f"{self.base.name}-two-response"
        self.challenge_size = self.base.challenge_size
        self.response_dim = 2 * self.base.response_dim
        self.t = self.base.t

    def __getattr__(self, item):
        return getattr(self.base, item)

    def gen(self, rng):
        return self.base.gen(rng)

    def relation(self, x, w):
        return self.base.relation(x, w)

    def commit(self, x, w, rng):
        return self.base.commit(x, w, rng)

    def respond(self, state, c, rng):
        return 2 * self.base.respond(state, c, rng) + int(rng.integers(0, 2))

    def verify(self, x, a, c, z):
        if z is None or not 0 <= int(z) < self.response_dim:
            return False
        return self.base.verify(x, a, c, int(z) // 2)

    def extract(self, x, a, transcripts):
        return self.base.extract(x, a, [(c, z // 2) for c, z in transcripts])

    def in_language(self, x):
        return self.base.in_language(x)


def schnorr_protocol(p: int = 607, g: int | None = None, challenge_bits: int = 6) -> SchnorrProtocol:
    return SchnorrProtocol(p, g, challenge_bits)


@dataclass(frozen=True)
class Transcript:
    x: Any
    a: int
    c: int
    z: int | None
    accept: bool


# -- classical provers ----------------------------------------------------------


class HonestProver:
    def __init__(self, sigma: SigmaProtocol, x, w):
        self.sigma, self.x, self.w = sigma, x, w

    def first_stage(self, rng):
        a, st = self.sigma.commit(self.x, self.w, rng)
        return self.x, a, st

    def respond(self, state, c, rng):
        return self.sigma.respond(state, c, rng)


class ChallengeGuessingCheater:
    """Pre-commits to a guessed challenge c* and a response valid for it.

    With ``x=None`` the cheater is adaptive and picks x outside the language,
    among elements whose order exceeds the challenge range; a low-order x
    would let several challenges verify against one simulated commitment.
    """

    def __init__(self, sigma: SchnorrProtocol, x: int | None = None, guess: int | None = None):
        self.sigma, self.x, self.guess = sigma, x, guess
        self._outside = None
        if x is None:
            C, p = sigma.challenge_size, sigma.p
            self._outside = [v for v in sigma.non_members() if all(pow(v, k, p) != 1 for k in range(1, C))]

    def first_stage(self, rng):
        x = self.x if self.x is not None else int(rng.choice(self._outside))
        c = self.guess if self.guess is not None else int(rng.integers(0, self.sigma.challenge_size))
        z = int(rng.integers(0, self.sigma.r))
        return x, self.sigma.simulate_commitment(x, c, z), z

    def respond(self, state, c, rng):
        return state


# -- quantum provers -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProverState:
    vector: StateVector
    context: Any = None


class QuantumProver:
    """Second stage as a challenge-indexed unitary; the response lives in register Z."""

    sigma: SigmaProtocol

    def first_stage(self, rng) -> tuple[Any, int, ProverState]:
        raise NotImplementedError

    def forward(self, state: ProverState, c: int) -> ProverState:
        raise NotImplementedError

    def backward(self, state: ProverState, c: int) -> ProverState:
        raise NotImplementedError

    def measure_response(self, state: ProverState, rng) -> tuple[int, ProverState]:
        z, vec = measure_register(state.vector, "Z", rng)
        return z, ProverState(vec, state.context)

    def accept_projection(self, state: ProverState, x, a, c) -> tuple[ProverState, ProverState, float]:
        """Split into (accept part, reject part, accept probability), unnormalized."""
        dim_z = state.vector.layout.dim_z
        mask = np.array([1 if self.sigma.verify(x, a, c, self.sigma.response_of(z)) else 0 for z in range(dim_z)])
        from .qsim import Projector

        P = Projector(state.vector.layout, {"Z": mask})
        acc = project(state.vector, P)
        rej = project(state.vector, ~P)
        return ProverState(acc, state.context), ProverState(rej, state.context), acc.norm2()

    def respond(self, state: ProverState, c, rng):
        z, _ = self.measure_response(self.forward(state, c), rng)
        return self.sigma.response_of(z)


# -- games ------------------------------------------------------------------------


def run_interaction(sigma: SigmaProtocol, prover, rng) -> Transcript:
    x, a, st = prover.first_stage(rng)
    c = int(rng.integers(0, sigma.challenge_size))
    z = prover.respond(st, c, rng)
    return Transcript(x, a, c, z, z is not None and sigma.verify(x, a, c, z))


@dataclass
class GameResult:
    trials: int
    hits: int
    frequency: float
    stderr: float

    def to_dict(self) -> dict:
        return dict(trials=self.trials, hits=self.hits, frequency=self.frequency, stderr=self.stderr)


def soundness_game(
    sigma: SigmaProtocol, adversary, mode: str = "static", x=None, trials: int = 1000, seed: int = 0
) -> GameResult:
    """Static: frequency of accept on the fixed x. Adaptive: frequency of (x not in L and accept)."""
    if mode not in ("static", "adaptive"):
        raise ValueError(f"unknown mode {mode!r}")
    membership: dict = {}
    hits = 0
    for t in range(trials):
        rng = trial_rng(seed, t)
        tr = run_interaction(sigma, adversary, rng)
        if mode == "static":
            if x is not None and tr.x != x:
                raise ValueError("static adversary answered for a different instance")
            hits += tr.accept
        else:
            if tr.accept:
                if tr.x not in membership:
                    membership[tr.x] = sigma.in_language(tr.x)
                hits += not membership[tr.x]
    return GameResult(trials, hits, *frequency(hits, trials))


class _FixedFirstMessage:
    """The static adversary A_{x,a}: replays a recorded first stage, then runs A's second stage."""

    def __init__(self, adversary, x, a, state):
        self.adversary, self.x, self.a, self.state = adversary, x, a, state

    def first_stage(self, rng):
        return self.x, self.a, self.state

    def respond(self, state, c, rng):
        return self.adversary.respond(state, c, rng)


def adaptive_via_static(sigma: SigmaProtocol, adversary, trials: int = 1000, seed: int = 0) -> GameResult:
    """Adaptive soundness frequency computed through the static decomposition.

    Each trial runs A_init, then the static game for A_{x,a} on x; uses the
    same per-trial streams as ``soundness_game`` so the totals coincide.
    """
    hits = 0
    membership: dict = {}
    for t in range(trials):
        rng = trial_rng(seed, t)
        x, a, st = adversary.first_stage(rng)
        static = _FixedFirstMessage(adversary, x, a, st)
        tr = run_interaction(sigma, static, rng)
        if tr.accept:
            if x not in membership:
                membership[x] = sigma.in_language(x)
            hits += not membership[x]
    return GameResult(trials, hits, *frequency(hits, trials))


@dataclass
class PokReport:
    trials: int
    acceptance: float
    acceptance_stderr: float
    extraction: float
    extraction_stderr: float
    p: float
    d: float
    kappa: float
    bound: float
    holds: bool
    best_fit_p: float | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def pok_game(
    sigma: SigmaProtocol,
    adversary,
    extractor,
    trials: int = 1000,
    seed: int = 0,
    p: float = 1.0,
    d: float = 3.0,
    kappa: float = 0.0,
) -> PokReport:
    """Estimate single-run acceptance V and extraction success E; check E >= V^d / p - kappa.

    ``extractor(adversary, rng)`` returns a pair (x, w) or None.
    """
    acc = ext = 0
    for t in range(trials):
        acc += run_interaction(sigma, adversary, trial_rng(seed, t, 0)).accept
        out = extractor(adversary, trial_rng(seed, t, 1))
        if out is not None and sigma.relation(*out):
            ext += 1
    V, V_err = frequency(acc, trials)
    E, E_err = frequency(ext, trials)
    bound = V**d / p - kappa
    best = V**d / (E + kappa) if E + kappa > 0 else None
    return PokReport(trials, V, V_err, E, E_err, p, d, kappa, bound, E >= bound - 3 * E_err, best)
