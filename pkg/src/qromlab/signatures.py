"""Fiat-Shamir signatures over a Sigma-protocol, with NMA and strong CMA game harnesses."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .adversary import OracleAlgorithm, success_prob
from .fiat_shamir import EncodingError, FiatShamir, FSProof, PairEncoding, fs_reduce, honest_fs_adversary, sigma_predicate
from .oracle import sample_kwise, sample_uniform
from .reprogram import loss_constant
from .seeding import frequency, trial_rng
from .sigma import SchnorrProtocol, SigmaProtocol

DEFAULT_K = 8


class SigningError(RuntimeError):
    pass


def message_count(max_len: int) -> int:
    return sum(256**l for l in range(max_len + 1))


def msg_index(m: bytes, max_len: int) -> int:
    """Shortlex rank of a byte string of length <= max_len."""
    if not isinstance(m, (bytes, bytearray)) or len(m) > max_len:
        raise EncodingError(f"message must be bytes of length <= {max_len}")
    return sum(256**l for l in range(len(m))) + int.from_bytes(m, "big")


class MessageBoundProtocol(SigmaProtocol):
    """The protocol on composite instances (x, m) that ignores m."""

    def __init__(self, base: SigmaProtocol):
        self.base = base
        self.name = f"{base.name}*"
        self.challenge_size = base.challenge_size
        self.response_dim = base.response_dim
        self.t = base.t

    def __getattr__(self, item):
        return getattr(self.base, item)

    @staticmethod
    def _x(inst):
        try:
            x, _ = inst
        except (TypeError, ValueError):
            return None
        return x

    def gen(self, rng):
        return self.base.gen(rng)

    def relation(self, inst, w):
        x = self._x(inst)
        return x is not None and self.base.relation(x, w)

    def commit(self, inst, w, rng):
        return self.base.commit(self._x(inst), w, rng)

    def respond(self, state, c, rng):
        return self.base.respond(state, c, rng)

    def verify(self, inst, a, c, z):
        x = self._x(inst)
        return x is not None and self.base.verify(x, a, c, z)

    def extract(self, inst, a, transcripts):
        return self.base.extract(self._x(inst), a, transcripts)

    def in_language(self, inst):
        x = self._x(inst)
        return x is not None and self.base.in_language(x)

    def response_of(self, z):
        return self.base.response_of(z)


class CompositeEncoding(PairEncoding):
    """Oracle points (x || m, a) with index (rank(x) * |M| + msg_index(m)) * |commitments| + rank(a)."""

    def __init__(self, keys: Sequence[int], commitments: Sequence[int], max_len: int = 1):
        self.keys = list(keys)
        self.commitments = list(commitments)
        self.max_len = max_len
        self.n_messages = message_count(max_len)
        self._ki = {x: k for k, x in enumerate(self.keys)}
        self._ai = {a: k for k, a in enumerate(self.commitments)}

    @property
    def domain_size(self) -> int:
        return len(self.keys) * self.n_messages * len(self.commitments)

    def index(self, inst, a) -> int:
        try:
            x, m = inst
            row = self._ki[x] * self.n_messages + msg_index(m, self.max_len)
            return row * len(self.commitments) + self._ai[a]
        except (KeyError, TypeError, ValueError):
            raise EncodingError(f"({inst!r}, {a!r}) is outside the oracle domain") from None

    def decode(self, idx: int):
        if not 0 <= idx < self.domain_size:
            raise EncodingError(f"index {idx} outside the oracle domain")
        row, ja = divmod(int(idx), len(self.commitments))
        ik, im = divmod(row, self.n_messages)
        return (self.keys[ik], _msg_of_index(im)), self.commitments[ja]


def _msg_of_index(i: int) -> bytes:
    l = 0
    while i >= 256**l:
        i -= 256**l
        l += 1
    return i.to_bytes(l, "big") if l else b""


@dataclass(frozen=True)
class KeyPair:
    pk: int
    sk: tuple[int, int]

    def to_dict(self) -> dict:
        return {"pk": self.pk, "sk": list(self.sk)}


@dataclass(frozen=True)
class Signature:
    m: bytes
    proof: FSProof

    def to_dict(self) -> dict:
        return self.proof.to_dict()


class SignatureScheme:
    """Sig[Sigma]: sign m under (x, w) by an FS proof for the composite instance (x, m)."""

    def __init__(self, sigma: SchnorrProtocol | None = None, max_len: int = 1, k: int = DEFAULT_K):
        self.base = sigma or SchnorrProtocol()
        self.sigma = MessageBoundProtocol(self.base)
        self.encoding = CompositeEncoding(self.base.subgroup, self.base.subgroup, max_len)
        self.fs = FiatShamir(self.sigma, self.encoding)
        self.k = k

    @property
    def range_bits(self) -> int:
        return self.base.challenge_size.bit_length() - 1

    def random_oracle(self, rng, k: int | None = None):
        """A k-wise independent oracle over the composite domain, evaluated pointwise."""
        return sample_kwise(k or self.k, self.encoding.domain_size, self.range_bits, rng)

    def keygen(self, rng) -> KeyPair:
        # w = 0 gives pk = 1, under which every transcript verifies; draw from Z_r^* instead
        w = int(rng.integers(1, self.base.r))
        x = pow(self.base.g, w, self.base.p)
        return KeyPair(x, (x, w))

    def sign(self, H, sk, m: bytes, rng, max_iters: int = 64) -> Signature:
        x, w = sk
        proof = self.fs.prove(H, (x, bytes(m)), w, rng, max_iters=max_iters)
        if proof is None:
            raise SigningError("prover exhausted its iterations")
        return Signature(bytes(m), proof)

    def verify(self, H, pk, m, sig) -> bool:
        if not isinstance(sig, Signature) or not isinstance(m, (bytes, bytearray)):
            return False
        if bytes(m) != sig.m:
            return False
        return self.fs.verify(H, (pk, bytes(m)), sig.proof)


def keygen(scheme: SignatureScheme, rng) -> KeyPair:
    return scheme.keygen(rng)


def sign(scheme: SignatureScheme, H, sk, m: bytes, rng) -> Signature:
    return scheme.sign(H, sk, m, rng)


def verify_sig(scheme: SignatureScheme, H, pk, m: bytes, sig) -> bool:
    return scheme.verify(H, pk, m, sig)


# -- forgers ------------------------------------------------------------------------------


class HonestSignerForger:
    """Sanity ceiling: signs a message with the secret key."""

    wants_secret = True

    def __init__(self, message: bytes = b"\x00"):
        self.message = message

    def __call__(self, scheme, pk, H, rng, sk=None, sign_oracle=None):
        return self.message, scheme.sign(H, sk, self.message, rng)


class ChallengeGuessingForger:
    """Makes q oracle queries, each on a fresh message with a simulated transcript for a guessed c."""

    wants_secret = False

    def __init__(self, q: int):
        if not 1 <= q <= 256:
            raise ValueError("need 1 <= q <= 256 distinct one-byte messages")
        self.q = q

    def __call__(self, scheme, pk, H, rng, sk=None, sign_oracle=None):
        sigma = scheme.base
        last = None
        for j in range(self.q):
            m = bytes([j])
            c = int(rng.integers(0, sigma.challenge_size))
            z = int(rng.integers(0, sigma.r))
            a = sigma.simulate_commitment(pk, c, z)
            last = (m, Signature(m, FSProof(a, z)))
            if H(scheme.encoding.index((pk, m), a)) == c:
                break
        return last


class JunkForger:
    """Random message, random subgroup commitment, random response."""

    wants_secret = False

    def __call__(self, scheme, pk, H, rng, sk=None, sign_oracle=None):
        sigma = scheme.base
        m = bytes([int(rng.integers(0, 256))])
        a = sigma.subgroup[int(rng.integers(0, sigma.r))]
        z = int(rng.integers(0, sigma.r))
        return m, Signature(m, FSProof(a, z))


class ReplayForger:
    """Asks the signing oracle for m and outputs the answer unchanged."""

    wants_secret = False

    def __init__(self, message: bytes = b"\x07"):
        self.message = message

    def __call__(self, scheme, pk, H, rng, sk=None, sign_oracle=None):
        return self.message, sign_oracle(self.message)


class RerandomizeForger:
    """Asks for a signature on m and outputs it with z shifted by one."""

    wants_secret = False

    def __init__(self, message: bytes = b"\x07"):
        self.message = message

    def __call__(self, scheme, pk, H, rng, sk=None, sign_oracle=None):
        sig = sign_oracle(self.message)
        z = (sig.proof.z + 1) % scheme.base.r
        return self.message, Signature(sig.m, FSProof(sig.proof.a, z))


# -- games --------------------------------------------------------------------------------


@dataclass
class GameResult:
    game: str
    forger: str
    trials: int
    forgeries: int
    frequency: float
    stderr: float
    replays_rejected: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _verify_output(scheme, H, pk, out) -> bool:
    if out is None:
        return False
    try:
        m, sig = out
    except (TypeError, ValueError):
        return False
    return scheme.verify(H, pk, m, sig)


def nma_game(scheme: SignatureScheme, forger, trials: int, seed: int) -> GameResult:
    """Fresh keys and a fresh oracle per trial; the forger sees pk and H only."""
    hits = 0
    for t in range(trials):
        rng = trial_rng(seed, t)
        kp = scheme.keygen(rng)
        H = scheme.random_oracle(rng)
        sk = kp.sk if getattr(forger, "wants_secret", False) else None
        hits += _verify_output(scheme, H, kp.pk, forger(scheme, kp.pk, H, rng, sk=sk))
    p, err = frequency(hits, trials)
    return GameResult("nma", type(forger).__name__, trials, hits, p, err)


def cma_game(scheme: SignatureScheme, forger, max_sign_queries: int, trials: int, seed: int) -> GameResult:
    """Strong unforgeability: outputs equal to a signing-oracle answer are not counted."""
    hits = replays = 0
    for t in range(trials):
        rng = trial_rng(seed, t, 0)
        sign_rng = trial_rng(seed, t, 1)
        kp = scheme.keygen(rng)
        H = scheme.random_oracle(rng)
        sig_q: list[tuple[bytes, int, int]] = []

        def sign_oracle(m: bytes) -> Signature:
            if len(sig_q) >= max_sign_queries:
                raise RuntimeError("signing-query budget exhausted")
            sig = scheme.sign(H, kp.sk, m, sign_rng)
            sig_q.append((sig.m, sig.proof.a, sig.proof.z))
            return sig

        sk = kp.sk if getattr(forger, "wants_secret", False) else None
        out = forger(scheme, kp.pk, H, rng, sk=sk, sign_oracle=sign_oracle)
        if not _verify_output(scheme, H, kp.pk, out):
            continue
        m, sig = out
        if (bytes(m), sig.proof.a, sig.proof.z) in sig_q:
            replays += 1
            continue
        hits += 1
    p, err = frequency(hits, trials)
    return GameResult("cma", type(forger).__name__, trials, hits, p, err, replays)


# -- forger -> reduction -> extractor -----------------------------------------------------


@dataclass
class PipelineReport:
    messages: list[str]
    commitments: int
    q: int
    C: int
    d: int
    trials: int
    forgery_rate: float
    extraction: float
    extraction_stderr: float
    bound: float
    holds: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["|C|"] = d.pop("C")
        return d


def quantum_nma_forger(scheme: SignatureScheme, kp: KeyPair, messages: Sequence[bytes], ys: Sequence[int]):
    """An honest-FS quantum forger over the composite points (pk || m, g^y), restricted to those points."""
    base = scheme.base
    enc = PairEncoding([(kp.pk, bytes(m)) for m in messages], [pow(base.g, y, base.p) for y in ys])
    points = [((kp.pk, bytes(m)), y) for m in messages for y in ys]
    A = honest_fs_adversary(scheme.sigma, enc, kp.sk[1], points)
    return A, enc


def nma_extraction_pipeline(
    scheme: SignatureScheme,
    trials: int,
    seed: int,
    messages: Sequence[bytes] = (b"\x00", b"\x01"),
    ys: Sequence[int] = (3, 17),
    d: int = 3,
    t: int = 2,
) -> PipelineReport:
    """Forger -> reduced Sigma-prover -> rewinding extractor, checked against the (rate/K - add)^d bound."""
    from .extract import extract

    sigma, base = scheme.sigma, scheme.base
    C = base.challenge_size
    kp = scheme.keygen(trial_rng(seed, 0, 0))
    A, enc = quantum_nma_forger(scheme, kp, messages, ys)
    V = sigma_predicate(sigma, enc)
    q = A.q
    K = loss_constant(q)
    rates, hits = [], 0
    for k in range(trials):
        rng = trial_rng(seed, 1, k)
        H = sample_uniform(enc.domain_size, scheme.range_bits, rng)
        if k < 32:
            rates.append(math.fsum(success_prob(A, H, V, x0) for x0 in range(enc.domain_size)))
        res = extract(fs_reduce(A, sigma, enc, H), None, t, rng)
        hits += res.ok and base.relation(kp.pk, res.witness)
    rate = float(np.mean(rates))
    p, err = frequency(hits, trials)
    bound = max(rate / K - 1.0 / (2 * (q + 1) * C), 0.0) ** d
    return PipelineReport(
        [m.hex() for m in messages], len(ys), q, C, d, trials, rate, p, err, bound, p >= bound - 3 * err
    )
