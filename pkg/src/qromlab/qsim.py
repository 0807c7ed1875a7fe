"""Dense statevector simulation over the register layout X, Y, Z, E.

Amplitudes are stored as a flat complex128 vector in C order over the shape
``(dim_x, dim_y, dim_z, dim_e)``.  Every operation returns a new state.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

REGISTERS = ("X", "Y", "Z", "E")
DEFAULT_DIM_CAP = 2**18

UNITARY_TOL = 1e-9
NORM_TOL = 1e-10
PROJECTOR_TOL = 1e-9


def dim_cap() -> int:
    return int(os.environ.get("QROMLAB_DIM_CAP", DEFAULT_DIM_CAP))


class LayoutError(ValueError):
    pass


class ZeroProbabilityError(RuntimeError):
    pass


def _axes(registers: Sequence[str]) -> list[int]:
    if isinstance(registers, str):
        registers = tuple(registers)
    try:
        axes = [REGISTERS.index(r) for r in registers]
    except ValueError as exc:
        raise LayoutError(f"unknown register in {registers!r}") from exc
    if len(set(axes)) != len(axes):
        raise LayoutError(f"repeated register in {registers!r}")
    return axes


@dataclass(frozen=True)
class RegisterLayout:
    dim_x: int
    dim_y: int
    dim_z: int = 1
    dim_e: int = 1

    def __post_init__(self):
        for name in ("dim_x", "dim_y", "dim_z", "dim_e"):
            if getattr(self, name) < 1:
                raise LayoutError(f"{name} must be positive")
        if self.dim_y & (self.dim_y - 1):
            raise LayoutError("dim_y must be a power of two (|Y| = 2^n)")
        if self.total > dim_cap():
            from .oracle import CapacityError

            raise CapacityError(f"layout dimension {self.total} exceeds cap {dim_cap()}")

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.dim_x, self.dim_y, self.dim_z, self.dim_e)

    @property
    def total(self) -> int:
        return self.dim_x * self.dim_y * self.dim_z * self.dim_e

    @property
    def range_bits(self) -> int:
        return self.dim_y.bit_length() - 1

    def dims(self, registers: Sequence[str]) -> list[int]:
        return [self.shape[a] for a in _axes(registers)]

    def flat_index(self, x: int, y: int = 0, z: int = 0, e: int = 0) -> int:
        return int(np.ravel_multi_index((x, y, z, e), self.shape))


@dataclass(frozen=True, eq=False)
class StateVector:
    layout: RegisterLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != self.layout.total:
            raise LayoutError(f"{amps.size} amplitudes for a layout of dimension {self.layout.total}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.shape)

    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm2() - 1.0) <= tol

    def marginal(self, register: str) -> np.ndarray:
        """Unnormalized Born weights of one register's computational basis."""
        (axis,) = _axes(register)
        probs = np.abs(self.tensor) ** 2
        other = tuple(a for a in range(4) if a != axis)
        return probs.sum(axis=other)

    def allclose(self, other: StateVector, atol: float = 1e-10) -> bool:
        return self.layout == other.layout and bool(
            np.allclose(self.amplitudes, other.amplitudes, atol=atol, rtol=0)
        )


def init(layout: RegisterLayout, basis=None, amplitudes=None) -> StateVector:
    """Basis state (flat index or (x, y, z, e) tuple) or an explicit amplitude vector."""
    if (basis is None) == (amplitudes is None):
        raise ValueError("give exactly one of basis or amplitudes")
    if basis is not None:
        amps = np.zeros(layout.total, dtype=np.complex128)
        idx = basis if np.isscalar(basis) else layout.flat_index(*basis)
        amps[idx] = 1.0
        return StateVector(layout, amps)
    amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    if amps.size != layout.total:
        raise LayoutError(f"{amps.size} amplitudes for a layout of dimension {layout.total}")
    n2 = float(np.vdot(amps, amps).real)
    if n2 == 0.0:
        raise ValueError("zero vector is not a state")
    if abs(n2 - 1.0) > NORM_TOL:
        warnings.warn(f"renormalizing input state with squared norm {n2:.3e}", stacklevel=2)
        amps = amps / np.sqrt(n2)
    return StateVector(layout, amps)


# -- gates --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Gate:
    """A unitary on a subset of registers, as a dense matrix or a basis permutation.

    For a permutation gate, basis state j of the joint sub-register is sent to
    ``perm[j]``; joint indices are C-ordered over ``registers``.
    """

    registers: tuple[str, ...]
    matrix: np.ndarray | None = None
    perm: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "registers", tuple(self.registers))
        _axes(self.registers)
        if (self.matrix is None) == (self.perm is None):
            raise ValueError("a gate is either a matrix or a permutation")
        if self.matrix is not None:
            U = np.asarray(self.matrix, dtype=np.complex128)
            if U.ndim != 2 or U.shape[0] != U.shape[1]:
                raise ValueError("gate matrix must be square")
            err = np.abs(U.conj().T @ U - np.eye(U.shape[0])).max()
            if err > UNITARY_TOL:
                raise ValueError(f"matrix is not unitary (deviation {err:.2e})")
            U.setflags(write=False)
            object.__setattr__(self, "matrix", U)
        else:
            perm = np.asarray(self.perm, dtype=np.int64)
            if perm.ndim != 1 or not np.array_equal(np.sort(perm), np.arange(perm.size)):
                raise ValueError("perm must be a permutation of range(dim)")
            perm.setflags(write=False)
            object.__setattr__(self, "perm", perm)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0] if self.matrix is not None else self.perm.size

    def adjoint(self) -> Gate:
        if self.matrix is not None:
            return Gate(self.registers, matrix=self.matrix.conj().T)
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.perm.size)
        return Gate(self.registers, perm=inv)

    def dense(self) -> np.ndarray:
        if self.matrix is not None:
            return np.array(self.matrix)
        U = np.zeros((self.perm.size, self.perm.size), dtype=np.complex128)
        U[self.perm, np.arange(self.perm.size)] = 1.0
        return U


def permutation_gate(layout: RegisterLayout, registers: Sequence[str], fn) -> Gate:
    """Permutation gate from a classical map on basis tuples of ``registers``."""
    dims = layout.dims(registers)
    size = int(np.prod(dims))
    perm = np.empty(size, dtype=np.int64)
    for j in range(size):
        out = fn(*np.unravel_index(j, dims))
        perm[j] = np.ravel_multi_index(tuple(int(v) for v in out), dims)
    return Gate(tuple(registers), perm=perm)


def _apply_on_axes(tensor: np.ndarray, gate: Gate) -> np.ndarray:
    axes = _axes(gate.registers)
    k = len(axes)
    moved = np.moveaxis(tensor, axes, list(range(k)))
    front = moved.shape[:k]
    flat = moved.reshape(int(np.prod(front)), -1)
    if flat.shape[0] != gate.dim:
        raise LayoutError(f"gate of dimension {gate.dim} on registers of dimension {flat.shape[0]}")
    if gate.matrix is not None:
        out = gate.matrix @ flat
    else:
        out = np.empty_like(flat)
        out[gate.perm] = flat
    return np.moveaxis(out.reshape(moved.shape), list(range(k)), axes)


def apply_unitary(state: StateVector, U, registers: Sequence[str] | None = None) -> StateVector:
    gate = U if isinstance(U, Gate) else Gate(tuple(registers), matrix=U)
    return StateVector(state.layout, _apply_on_axes(state.tensor, gate))


def apply_oracle(state: StateVector, H) -> StateVector:
    """O^H |x>|y> = |x>|y XOR H(x)> on registers X, Y."""
    layout = state.layout
    if H.domain_size != layout.dim_x or H.range_size != layout.dim_y:
        raise LayoutError(
            f"oracle {H.domain_size}->2^{H.range_bits} does not match layout {layout.shape}"
        )
    t = state.tensor
    rows = np.arange(layout.dim_x)[:, None]
    cols = np.arange(layout.dim_y)[None, :] ^ np.asarray(H.table)[:, None]
    return StateVector(layout, t[rows, cols])


# -- projectors ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Projector:
    """Tensor product of per-register factors (identity elsewhere), optionally complemented.

    A factor is a 1-D 0/1 mask (diagonal projector) or a dense projector matrix.
    """

    layout: RegisterLayout
    factors: Mapping[str, np.ndarray] = field(default_factory=dict)
    complement: bool = False

    def __post_init__(self):
        clean = {}
        for reg, f in self.factors.items():
            (axis,) = _axes(reg)
            d = self.layout.shape[axis]
            f = np.asarray(f)
            if f.ndim == 1:
                if f.size != d or not np.all((f == 0) | (f == 1)):
                    raise ValueError(f"mask on {reg} must be 0/1 of length {d}")
                f = f.astype(np.float64)
            else:
                f = f.astype(np.complex128)
                if f.shape != (d, d):
                    raise ValueError(f"projector on {reg} must be {d}x{d}")
                if (
                    np.abs(f @ f - f).max() > PROJECTOR_TOL
                    or np.abs(f - f.conj().T).max() > PROJECTOR_TOL
                ):
                    raise ValueError(f"factor on {reg} is not an orthogonal projector")
            f.setflags(write=False)
            clean[reg] = f
        object.__setattr__(self, "factors", clean)

    def __invert__(self) -> Projector:
        return Projector(self.layout, self.factors, not self.complement)

    def apply_tensor(self, t: np.ndarray) -> np.ndarray:
        out = t
        for reg, f in self.factors.items():
            (axis,) = _axes(reg)
            if f.ndim == 1:
                shape = [1, 1, 1, 1]
                shape[axis] = f.size
                out = out * f.reshape(shape)
            else:
                out = np.moveaxis(np.tensordot(f, out, axes=([1], [axis])), 0, axis)
        return t - out if self.complement else out

    def dense(self) -> np.ndarray:
        mats = []
        for reg, d in zip(REGISTERS, self.layout.shape):
            f = self.factors.get(reg)
            if f is None:
                mats.append(np.eye(d))
            elif f.ndim == 1:
                mats.append(np.diag(f))
            else:
                mats.append(f)
        P = mats[0]
        for m in mats[1:]:
            P = np.kron(P, m)
        return np.eye(P.shape[0]) - P if self.complement else P


def identity_projector(layout: RegisterLayout) -> Projector:
    return Projector(layout)


def zero_projector(layout: RegisterLayout) -> Projector:
    return Projector(layout, complement=True)


def basis_projector(layout: RegisterLayout, register: str, index: int) -> Projector:
    """|index><index| on one register, identity elsewhere."""
    (axis,) = _axes(register)
    mask = np.zeros(layout.shape[axis])
    mask[index] = 1
    return Projector(layout, {register: mask})


def project(state: StateVector, P: Projector) -> StateVector:
    """P|psi>, generally sub-normalized."""
    if P.layout != state.layout:
        raise LayoutError("projector and state layouts differ")
    return StateVector(state.layout, P.apply_tensor(state.tensor))


def project_prob(state: StateVector, P: Projector) -> float:
    return project(state, P).norm2()


def measure_register(state: StateVector, register: str, rng, force: int | None = None):
    """Computational-basis measurement; returns (outcome, renormalized post-state)."""
    probs = state.marginal(register)
    total = probs.sum()
    if force is None:
        outcome = int(rng.choice(probs.size, p=probs / total))
    else:
        outcome = int(force)
    if probs[outcome] <= 1e-15:
        raise ZeroProbabilityError(f"outcome {outcome} on {register} has probability zero")
    post = project(state, basis_projector(state.layout, register, outcome))
    return outcome, StateVector(state.layout, post.amplitudes / np.sqrt(post.norm2()))


def predicate_projector(V, x: int, theta: int, layout: RegisterLayout) -> Projector:
    """1 (x) 1 (x) Pi_{x,theta} (x) 1."""
    return Projector(layout, {"Z": V.cell(x, theta, layout.dim_z)})


def output_projector(V, x: int, theta: int, layout: RegisterLayout, x_out: int | None = None) -> Projector:
    """G_{x,x_out}^theta = |x_out><x_out| (x) 1 (x) Pi_{x,theta} (x) 1 (x_out defaults to x)."""
    x_out = x if x_out is None else x_out
    mask = np.zeros(layout.dim_x)
    mask[x_out] = 1
    return Projector(layout, {"X": mask, "Z": V.cell(x, theta, layout.dim_z)})
