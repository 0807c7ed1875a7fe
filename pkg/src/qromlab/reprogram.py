"""The measure-and-reprogram simulator and exact checks of its guarantee.

The simulator runs A up to a uniformly chosen query slot i in {0..q}
(slot q is the final output), measures X to obtain x, and then answers
query i+1 with H (b = 1) or with H*theta x (b = 0) and every later query with
H*theta x.

``lemma1_lhs`` averages the exact squared norms
``||G_x^theta A_{i+b->q}^{H*theta x} A_{i->i+b}^H X|phi_i^H>||^2`` over all
(theta, i, b); ``lemma1_rhs`` evaluates
``E_theta ||G_x^theta |phi_q^{H*theta x}>||^2 / (2(q+1)(2q+3))
  - ||X|phi_q^H>||^2 / (2(q+1)|Y|)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from .adversary import OracleAlgorithm, QuantumPredicate, as_table, run, run_segment, success_prob
from .oracle import CapacityError, FiniteFunction, materialize, reprogram, sample_kwise, sample_uniform
from .qsim import (
    StateVector,
    basis_projector,
    measure_register,
    output_projector,
    predicate_projector,
    project,
    project_prob,
)

log = logging.getLogger(__name__)

SLACK = 1e-9
EXHAUSTIVE_CELLS = 2**14
MAX_MC_CELLS = 2**22


def loss_constant(q: int) -> int:
    """2(q+1)(2q+3), the multiplicative loss of the simulator."""
    return 2 * (q + 1) * (2 * q + 3)


@dataclass(frozen=True, eq=False)
class SimulatorCheckpoint:
    measured_x: int
    i: int
    state: StateVector
    H: FiniteFunction
    algorithm: OracleAlgorithm


def stage_one(A: OracleAlgorithm, H, rng, i: int | None = None) -> SimulatorCheckpoint:
    H = as_table(H)
    if i is None:
        i = int(rng.integers(0, A.q + 1))
    state = run_segment(A, H, 0, i, A.initial_state)
    x, post = measure_register(state, "X", rng)
    return SimulatorCheckpoint(x, i, post, H, A)


def stage_two_state(cp: SimulatorCheckpoint, theta: int, b: int) -> StateVector:
    """Final state A_{i+b->q}^{H*theta x} A_{i->i+b}^H applied to the checkpoint."""
    if b not in (0, 1):
        raise ValueError(f"b must be 0 or 1, got {b}")
    A, i = cp.algorithm, cp.i
    j = min(i + b, A.q)
    state = run_segment(A, cp.H, i, j, cp.state)
    return run_segment(A, reprogram(cp.H, cp.measured_x, theta), j, A.q, state)


def stage_two(cp: SimulatorCheckpoint, theta: int, b: int, V: QuantumPredicate) -> tuple[int, float]:
    """Success probability against theta (not H(x)) of the reprogrammed continuation."""
    final = stage_two_state(cp, theta, b)
    G = output_projector(V, cp.measured_x, theta, final.layout)
    return cp.measured_x, project_prob(final, G)


def _cell_value(A, H, x0, V, theta, b, start: StateVector, i: int, require_final_x: bool) -> float:
    j = min(i + b, A.q)
    state = run_segment(A, H, i, j, start)
    state = run_segment(A, reprogram(H, x0, theta), j, A.q, state)
    if require_final_x:
        P = output_projector(V, x0, theta, A.layout)
    else:
        P = predicate_projector(V, x0, theta, A.layout)
    return project_prob(state, P)


def _projected_prefixes(A: OracleAlgorithm, H: FiniteFunction, x0: int) -> list[StateVector]:
    """X|phi_i^H> for i = 0..q."""
    X = basis_projector(A.layout, "X", x0)
    out = []
    state = A.initial_state
    for i in range(A.q + 1):
        if i:
            state = run_segment(A, H, i - 1, i, state)
        out.append(project(state, X))
    return out


def lhs_cells(A: OracleAlgorithm, H, x0: int, V: QuantumPredicate, require_final_x: bool = True):
    """Yield ((theta, i, b), value) over the full grid."""
    H = as_table(H)
    cells = H.range_size * (A.q + 1) * 2
    if cells > MAX_MC_CELLS:
        raise CapacityError(f"{cells} cells exceed the enumeration cap")
    for i, start in enumerate(_projected_prefixes(A, H, x0)):
        empty = start.norm2() == 0.0
        for b in (0, 1):
            for theta in range(H.range_size):
                val = 0.0 if empty else _cell_value(A, H, x0, V, theta, b, start, i, require_final_x)
                yield (theta, i, b), val


def lemma1_lhs(
    A: OracleAlgorithm,
    H,
    x0: int,
    V: QuantumPredicate,
    rng=None,
    samples: int = 4096,
    require_final_x: bool = True,
    with_stderr: bool = False,
):
    """E_{theta,i,b} of the simulator's figure of merit at x0.

    Exhaustive when |Y|(q+1)2 <= 2^14; otherwise a Monte Carlo mean over
    ``samples`` uniformly drawn cells (``rng`` required).  With
    ``with_stderr`` returns (value, standard error).
    """
    H = as_table(H)
    cells = H.range_size * (A.q + 1) * 2
    if cells <= EXHAUSTIVE_CELLS:
        value = math.fsum(v for _, v in lhs_cells(A, H, x0, V, require_final_x)) / cells
        return (value, 0.0) if with_stderr else value
    if rng is None:
        raise CapacityError(f"{cells} cells exceed the exhaustive cap and no rng was given")
    prefixes = _projected_prefixes(A, H, x0)
    vals = np.empty(samples)
    for s in range(samples):
        theta = int(rng.integers(0, H.range_size))
        i = int(rng.integers(0, A.q + 1))
        b = int(rng.integers(0, 2))
        start = prefixes[i]
        vals[s] = 0.0 if start.norm2() == 0.0 else _cell_value(
            A, H, x0, V, theta, b, start, i, require_final_x
        )
    value = float(vals.mean())
    err = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return (value, err) if with_stderr else value


def lemma1_rhs(A: OracleAlgorithm, H, x0: int, V: QuantumPredicate) -> tuple[float, float, float]:
    """(bound, term1, term2)."""
    H = as_table(H)
    vals = []
    for theta in range(H.range_size):
        final = run(A, reprogram(H, x0, theta))
        vals.append(project_prob(final, output_projector(V, x0, theta, A.layout)))
    term1 = math.fsum(vals) / H.range_size
    term2 = project_prob(run(A, H), basis_projector(A.layout, "X", x0))
    q = A.q
    bound = term1 / loss_constant(q) - term2 / (2 * (q + 1) * H.range_size)
    return bound, term1, term2


@dataclass
class Lemma1Report:
    adversary: str
    q: int
    X: int
    Y: int
    x0: int
    lhs: float
    term1: float
    term2: float
    bound: float
    holds: bool
    ratio: float | None
    constant: int
    lhs_stderr: float = 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["|X|"] = d.pop("X")
        d["|Y|"] = d.pop("Y")
        return d


def verify_lemma1(A: OracleAlgorithm, H, x0: int, V: QuantumPredicate, rng=None) -> Lemma1Report:
    H = as_table(H)
    lhs, err = lemma1_lhs(A, H, x0, V, rng=rng, with_stderr=True)
    bound, term1, term2 = lemma1_rhs(A, H, x0, V)
    holds = lhs >= bound - SLACK - 3 * err
    if not holds:
        log.error("simulator inequality violated for %s at x0=%d: lhs=%.12g bound=%.12g", A.name, x0, lhs, bound)
    ratio = lhs / bound if bound > 0 else None
    return Lemma1Report(
        A.name, A.q, H.domain_size, H.range_size, x0, lhs, term1, term2, bound, holds, ratio,
        loss_constant(A.q), err,
    )


@dataclass
class Thm1Report:
    adversary: str
    q: int
    X: int
    Y: int
    members: int
    k: int
    constant: int
    additive: float
    lhs_per_x0: list[float]
    success_per_x0: list[float]
    lhs: float
    lhs_stderr: float
    success: float
    success_stderr: float
    rhs: float
    holds: bool
    per_x0_holds: bool
    ratio: float | None
    uniform_lhs: float
    uniform_lhs_stderr: float
    uniform_success: float
    uniform_success_stderr: float
    family_matches_uniform: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["|X|"] = d.pop("X")
        d["|Y|"] = d.pop("Y")
        return d


def _mean_err(a: np.ndarray) -> tuple[float, float]:
    if len(a) < 2:
        return float(a.mean()), 0.0
    return float(a.mean()), float(a.std(ddof=1) / math.sqrt(len(a)))


def _sweep(A, V, oracles) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lhs, succ, term2 = [], [], []
    for H in oracles:
        lhs.append([lemma1_lhs(A, H, x0, V) for x0 in range(H.domain_size)])
        succ.append([success_prob(A, H, V, x0) for x0 in range(H.domain_size)])
        final = run(A, H)
        term2.append(list(final.marginal("X")))
    return np.array(lhs), np.array(succ), np.array(term2)


def verify_thm1(A: OracleAlgorithm, V: QuantumPredicate, members: int, rng) -> Thm1Report:
    """Monte Carlo over the 2(q+1)-wise independent family, with a uniform-H control.

    The aggregate check is
    ``E_H sum_x0 lhs >= E_H sum_x0 success / 2(q+1)(2q+3) - 1/(2 q' |Y|)``
    with q' = max(q, 1).
    """
    q = A.q
    dim_x, n = A.layout.dim_x, A.layout.range_bits
    k = 2 * (q + 1)
    family = [materialize(sample_kwise(k, dim_x, n, rng)) for _ in range(members)]
    uniform = [sample_uniform(dim_x, n, rng) for _ in range(members)]
    C = loss_constant(q)
    additive = 1.0 / (2 * max(q, 1) * (1 << n))

    lhs, succ, term2 = _sweep(A, V, family)
    u_lhs, u_succ, _ = _sweep(A, V, uniform)

    lhs_mean, lhs_err = _mean_err(lhs.sum(axis=1))
    succ_mean, succ_err = _mean_err(succ.sum(axis=1))
    rhs = succ_mean / C - additive
    holds = lhs_mean >= rhs - SLACK

    per_x0_bound = succ.mean(axis=0) / C - term2.mean(axis=0) / (2 * (q + 1) * (1 << n))
    per_x0_holds = bool(np.all(lhs.mean(axis=0) >= per_x0_bound - SLACK))

    ul_mean, ul_err = _mean_err(u_lhs.sum(axis=1))
    us_mean, us_err = _mean_err(u_succ.sum(axis=1))

    def close(a, ea, b, eb):
        return abs(a - b) <= 3 * math.hypot(ea, eb) + SLACK

    matches = close(lhs_mean, lhs_err, ul_mean, ul_err) and close(succ_mean, succ_err, us_mean, us_err)
    if not holds:
        log.error("aggregate bound violated for %s: lhs=%.6g rhs=%.6g", A.name, lhs_mean, rhs)
    return Thm1Report(
        A.name, q, dim_x, 1 << n, members, k, C, additive,
        [float(v) for v in lhs.mean(axis=0)], [float(v) for v in succ.mean(axis=0)],
        lhs_mean, lhs_err, succ_mean, succ_err, rhs, bool(holds), per_x0_holds,
        lhs_mean / rhs if rhs > 0 else None,
        ul_mean, ul_err, us_mean, us_err, bool(matches),
    )
