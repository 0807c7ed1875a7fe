"""Oracle quantum algorithms A = (|phi_0>, A_1, ..., A_q) and a fixture library.

``run`` computes A_q O^H ... A_1 O^H |phi_0>.  Each step A_i may be a product
of several gates, applied left to right.  The type has no measurement slots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import unitary_group

from .oracle import FiniteFunction, KWiseFamilyMember, materialize
from .qsim import (
    Gate,
    LayoutError,
    RegisterLayout,
    StateVector,
    apply_oracle,
    apply_unitary,
    init,
    output_projector,
    permutation_gate,
    project_prob,
)

OUTPUT_Y_TOL = 1e-9


class OutputNormalizationError(RuntimeError):
    """The Y register of a final state is not |0>."""


@dataclass(frozen=True, eq=False)
class QuantumPredicate:
    """A family of projectors Pi_{x,theta} on Z.

    ``rule(x, theta, dim_z)`` returns either a 0/1 mask (classical predicate) or
    a projector matrix.
    """

    name: str
    rule: Callable[[int, int, int], np.ndarray]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def cell(self, x: int, theta: int, dim_z: int) -> np.ndarray:
        key = (x, theta, dim_z)
        if key not in self._cache:
            c = np.asarray(self.rule(x, theta, dim_z))
            if c.ndim == 1 and c.size != dim_z:
                raise ValueError(f"predicate {self.name} has no cell for dim_z={dim_z}")
            self._cache[key] = c
        return self._cache[key]


def classical_predicate(name: str, fn: Callable[[int, int, int], bool]) -> QuantumPredicate:
    """Lift V(x, theta, z) in {0,1} to diagonal projectors on Z."""

    def rule(x, theta, dim_z):
        return np.array([1 if fn(x, theta, z) else 0 for z in range(dim_z)])

    return QuantumPredicate(name, rule)


Z_EQUALS_THETA = classical_predicate("z=theta", lambda x, t, z: z == t)
ALWAYS_TRUE = classical_predicate("true", lambda x, t, z: True)
NEVER = classical_predicate("false", lambda x, t, z: False)
PARITY_MATCH = classical_predicate("parity", lambda x, t, z: (z ^ t ^ x) & 1 == 0)

PREDICATES = {p.name: p for p in (Z_EQUALS_THETA, ALWAYS_TRUE, NEVER, PARITY_MATCH)}


@dataclass(frozen=True, eq=False)
class OracleAlgorithm:
    layout: RegisterLayout
    initial_state: StateVector
    steps: tuple[tuple[Gate, ...], ...]
    name: str = "adversary"

    def __post_init__(self):
        if self.initial_state.layout != self.layout:
            raise LayoutError("initial state layout differs from the algorithm layout")
        steps = tuple(tuple(s) if isinstance(s, (tuple, list)) else (s,) for s in self.steps)
        for step in steps:
            for g in step:
                if g.dim != int(np.prod(self.layout.dims(g.registers))):
                    raise LayoutError(f"gate on {g.registers} has the wrong dimension")
        object.__setattr__(self, "steps", steps)

    @property
    def q(self) -> int:
        return len(self.steps)


def as_table(H) -> FiniteFunction:
    return materialize(H) if isinstance(H, KWiseFamilyMember) else H


def _apply_step(state: StateVector, step: Sequence[Gate]) -> StateVector:
    for g in step:
        state = apply_unitary(state, g)
    return state


def run_segment(A: OracleAlgorithm, H, i: int, j: int, state: StateVector) -> StateVector:
    """A_{i->j}^H = A_j O^H ... A_{i+1} O^H; the identity when j <= i."""
    if not 0 <= i <= A.q or not 0 <= j <= A.q:
        raise ValueError(f"segment ({i}, {j}) outside 0..{A.q}")
    if j < i:
        raise ValueError(f"segment end {j} precedes start {i}")
    H = as_table(H)
    for k in range(i, j):
        state = _apply_step(apply_oracle(state, H), A.steps[k])
    return state


def check_output_register(state: StateVector, tol: float = OUTPUT_Y_TOL) -> None:
    off = state.norm2() - state.marginal("Y")[0]
    if off > tol:
        raise OutputNormalizationError(f"Y register carries weight {off:.3e} off |0>")


def run(A: OracleAlgorithm, H, check_output: bool = True) -> StateVector:
    state = run_segment(A, H, 0, A.q, A.initial_state)
    if check_output:
        check_output_register(state)
    return state


def success_prob(A: OracleAlgorithm, H, V: QuantumPredicate, x0: int) -> float:
    """||G_{x0}^H |phi_q^H>||^2."""
    H = as_table(H)
    state = run(A, H)
    return project_prob(state, output_projector(V, x0, H(x0), A.layout))


# -- fixtures -----------------------------------------------------------------


def copy_and_reset_gate(layout: RegisterLayout) -> Gate:
    """(y, z) -> (y XOR z', z') with z' = z XOR y; from z = 0 this copies Y to Z and clears Y."""
    if layout.dim_z != layout.dim_y:
        raise LayoutError("copy-and-reset needs dim_z == dim_y")

    def fn(y, z):
        z2 = z ^ y
        return y ^ z2, z2

    return permutation_gate(layout, ("Y", "Z"), fn)


def classical_query_adversary(x0: int, dim_x: int, range_bits: int) -> OracleAlgorithm:
    """Queries x0, copies H(x0) into Z, clears Y and outputs x0."""
    layout = RegisterLayout(dim_x, 1 << range_bits, 1 << range_bits, 1)
    phi0 = init(layout, basis=(x0, 0, 0, 0))
    return OracleAlgorithm(layout, phi0, ((copy_and_reset_gate(layout),),), f"classical-query({x0})")


def superposed_query_adversary(weights: Sequence[float], range_bits: int) -> OracleAlgorithm:
    """Queries sum_x sqrt(w_x)|x>, copies the answer into Z and clears Y."""
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must be non-negative and sum to 1")
    layout = RegisterLayout(w.size, 1 << range_bits, 1 << range_bits, 1)
    amps = np.zeros(layout.shape, dtype=np.complex128)
    amps[:, 0, 0, 0] = np.sqrt(w)
    phi0 = init(layout, amplitudes=amps)
    return OracleAlgorithm(layout, phi0, ((copy_and_reset_gate(layout),),), "superposed-query")


def guessing_adversary(x0: int, z_star: int, dim_x: int, range_bits: int) -> OracleAlgorithm:
    """No queries; outputs x0 together with the fixed guess z*."""
    layout = RegisterLayout(dim_x, 1 << range_bits, 1 << range_bits, 1)
    return OracleAlgorithm(layout, init(layout, basis=(x0, 0, z_star, 0)), (), f"guess({x0},{z_star})")


def two_query_chain_adversary(x0: int, dim_x: int, range_bits: int) -> OracleAlgorithm:
    """Queries x0, then x1 = (x0 + H(x0)) mod |X|; outputs x1 with H(x1) in Z.

    E keeps a copy of the first answer so that Y can be cleared reversibly.
    """
    dim_y = 1 << range_bits
    layout = RegisterLayout(dim_x, dim_y, dim_y, dim_y)

    def hop(x, y, e):
        e2 = e ^ y
        return (x + y) % dim_x, y ^ e2, e2

    step1 = (permutation_gate(layout, ("X", "Y", "E"), hop),)
    step2 = (copy_and_reset_gate(layout),)
    phi0 = init(layout, basis=(x0, 0, 0, 0))
    return OracleAlgorithm(layout, phi0, (step1, step2), f"two-query-chain({x0})")


def random_unitary_adversary(
    seed, q: int, dim_x: int, range_bits: int, dim_e: int = 1
) -> OracleAlgorithm:
    """Haar-random steps that keep Y clear at the end.

    Z stays |0> until the last step, which swaps Y into Z and then mixes X, Z, E.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    dim_y = 1 << range_bits
    layout = RegisterLayout(dim_x, dim_y, dim_y, dim_e)

    def haar(regs):
        d = int(np.prod(layout.dims(regs)))
        if d == 1:
            return Gate(regs, matrix=np.exp(2j * np.pi * rng.random()) * np.eye(1))
        return Gate(regs, matrix=unitary_group.rvs(d, random_state=rng))

    amps = np.zeros(layout.shape, dtype=np.complex128)
    if q == 0:
        block = rng.normal(size=(dim_x, dim_y, dim_e)) + 1j * rng.normal(size=(dim_x, dim_y, dim_e))
        amps[:, 0, :, :] = block
    else:
        block = rng.normal(size=(dim_x, dim_e)) + 1j * rng.normal(size=(dim_x, dim_e))
        amps[:, 0, 0, :] = block
    amps /= np.linalg.norm(amps)
    phi0 = init(layout, amplitudes=amps)

    swap = permutation_gate(layout, ("Y", "Z"), lambda y, z: (z, y))
    steps = []
    for i in range(q):
        step = [haar(("X", "Y", "E"))]
        if i == q - 1:
            step += [swap, haar(("X", "Z", "E"))]
        steps.append(tuple(step))
    return OracleAlgorithm(layout, phi0, tuple(steps), "random-unitary")


def library_adversaries(dim_x: int, range_bits: int) -> list[OracleAlgorithm]:
    """The fixture set used by exhaustive sweeps (q <= 2)."""
    dim_y = 1 << range_bits
    w = np.arange(1, dim_x + 1, dtype=float)
    return [
        classical_query_adversary(0, dim_x, range_bits),
        classical_query_adversary(dim_x - 1, dim_x, range_bits),
        superposed_query_adversary(np.full(dim_x, 1.0 / dim_x), range_bits),
        superposed_query_adversary(w / w.sum(), range_bits),
        guessing_adversary(0, dim_y - 1, dim_x, range_bits),
        two_query_chain_adversary(0, dim_x, range_bits),
    ]


def run_segment_inverse(A: OracleAlgorithm, H, i: int, j: int, state: StateVector) -> StateVector:
    """(A_{i->j}^H)^dagger, undoing ``run_segment(A, H, i, j, .)``."""
    if not 0 <= i <= j <= A.q:
        raise ValueError(f"segment ({i}, {j}) outside 0..{A.q}")
    H = as_table(H)
    for k in range(j - 1, i - 1, -1):
        for g in reversed(A.steps[k]):
            state = apply_unitary(state, g.adjoint())
        state = apply_oracle(state, H)
    return state
