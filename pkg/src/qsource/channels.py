"""Kraus channels on designated qubits of a larger register.

Channels carry absolute register indices in ``targets``. Application never
builds a superoperator on the whole register: the local superoperator
``sum_K K (x) conj(K)`` is contracted against the target axes only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ._validation import check_rate
from .tensor import DensityMatrix, QubitRegister

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}

TP_ATOL = 1e-10

# single-qubit Pauli products modulo phase
_PRODUCT = {
    (a, b): ("I" if a == b else b if a == "I" else a if b == "I" else ({"X", "Y", "Z"} - {a, b}).pop())
    for a in "IXYZ"
    for b in "IXYZ"
}


# -- Pauli strings -------------------------------------------------------------


@dataclass(frozen=True)
class PauliString:
    """A signed tensor product of single-qubit Paulis on explicit targets."""

    ops: str
    targets: tuple[int, ...]
    sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if len(self.ops) != len(self.targets):
            raise ValueError("ops and targets must have equal length")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"duplicate targets in {self.targets}")
        if any(c not in PAULI for c in self.ops):
            raise ValueError(f"invalid Pauli label {self.ops!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @classmethod
    def from_label(cls, label: str, offset: int = 0, sign: int = 1) -> "PauliString":
        """``"XIZ"`` -> X on qubit ``offset``, Z on qubit ``offset + 2``; identities dropped."""
        pairs = [(c, offset + k) for k, c in enumerate(label) if c != "I"]
        return cls("".join(c for c, _ in pairs), tuple(k for _, k in pairs), sign)

    @classmethod
    def identity(cls) -> "PauliString":
        return cls("", ())

    def as_dict(self) -> dict[int, str]:
        return {t: c for c, t in zip(self.ops, self.targets) if c != "I"}

    @property
    def weight(self) -> int:
        return sum(1 for c in self.ops if c != "I")

    def label(self, n_qubits: int) -> str:
        d = self.as_dict()
        return ("-" if self.sign < 0 else "") + "".join(d.get(k, "I") for k in range(n_qubits))

    def commutes_with(self, other: "PauliString") -> bool:
        a, b = self.as_dict(), other.as_dict()
        anti = sum(1 for k in a.keys() & b.keys() if a[k] != b[k])
        return anti % 2 == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        """Product with the overall phase discarded (Paulis modulo phase)."""
        a, b = self.as_dict(), other.as_dict()
        out = {}
        for k in a.keys() | b.keys():
            c = _PRODUCT[a.get(k, "I"), b.get(k, "I")]
            if c != "I":
                out[k] = c
        keys = sorted(out)
        return PauliString("".join(out[k] for k in keys), tuple(keys))

    def local_matrix(self) -> np.ndarray:
        m = np.array([[1.0 + 0j]])
        for c in self.ops:
            m = np.kron(m, PAULI[c])
        return self.sign * m

    def matrix(self, n_qubits: int) -> np.ndarray:
        d = self.as_dict()
        m = np.array([[1.0 + 0j]])
        for k in range(n_qubits):
            m = np.kron(m, PAULI[d.get(k, "I")])
        return self.sign * m

    def apply_to_vector(self, vec: np.ndarray, n_qubits: int) -> np.ndarray:
        out = vec.reshape((2,) * n_qubits)
        for c, t in zip(self.ops, self.targets):
            if c == "I":
                continue
            out = np.moveaxis(np.tensordot(PAULI[c], out, axes=([1], [t])), 0, t)
        return self.sign * out.reshape(-1)

    def shifted(self, offset: int) -> "PauliString":
        return PauliString(self.ops, tuple(t + offset for t in self.targets), self.sign)


# -- superoperator kernel -----------------------------------------------------


def _axes_perm(n_qubits: int, targets: Sequence[int]) -> list[int]:
    rows = list(targets)
    cols = [n_qubits + t for t in targets]
    used = set(rows) | set(cols)
    return rows + cols + [a for a in range(2 * n_qubits) if a not in used]


def apply_superop_array(
    mat: np.ndarray, n_qubits: int, targets: Sequence[int], superop: np.ndarray
) -> np.ndarray:
    """Contract ``superop`` (acting on vec(row, col) of the targets) with ``mat``."""
    d2 = superop.shape[1]
    perm = _axes_perm(n_qubits, targets)
    t = mat.reshape((2,) * (2 * n_qubits)).transpose(perm).reshape(d2, -1)
    t = (superop @ t).reshape((2,) * (2 * n_qubits))
    return t.transpose(np.argsort(perm)).reshape(mat.shape)


def _check_targets(targets: Sequence[int], n_qubits: int) -> None:
    bad = [t for t in targets if not 0 <= t < n_qubits]
    if bad:
        raise ValueError(f"targets {bad} outside the {n_qubits}-qubit register")


@dataclass(frozen=True, eq=False)
class SuperOperator:
    """A linear map on the operators of ``targets``, stored as a dense matrix.

    Row/column index of the matrix is ``r * d + c`` for operator entry ``(r, c)``.
    """

    matrix: np.ndarray = field(repr=False)
    targets: tuple[int, ...]
    name: str = "superop"

    def apply_array(self, mat: np.ndarray, n_qubits: int) -> np.ndarray:
        return apply_superop_array(mat, n_qubits, self.targets, self.matrix)

    def adjoint_array(self, mat: np.ndarray, n_qubits: int) -> np.ndarray:
        return apply_superop_array(mat, n_qubits, self.targets, self.matrix.conj().T)

    def shifted(self, offset: int) -> "SuperOperator":
        return SuperOperator(self.matrix, tuple(t + offset for t in self.targets), self.name)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """CPTP map ``rho -> sum_K K rho K^dagger`` with all ``K`` acting on ``targets``."""

    kraus_ops: tuple[np.ndarray, ...] = field(repr=False)
    targets: tuple[int, ...]
    name: str = "kraus"

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus_ops)
        targets = tuple(int(t) for t in self.targets)
        if len(set(targets)) != len(targets):
            raise ValueError(f"duplicate targets {targets}")
        d = 2 ** len(targets)
        for k in ops:
            if k.shape != (d, d):
                raise ValueError(f"Kraus operator of shape {k.shape} does not match {len(targets)} targets")
        gram = sum(k.conj().T @ k for k in ops)
        err = np.max(np.abs(gram - np.eye(d)))
        if err > TP_ATOL:
            raise ValueError(f"Kraus operators are not trace preserving (deviation {err:.3e})")
        object.__setattr__(self, "kraus_ops", ops)
        object.__setattr__(self, "targets", targets)

    @cached_property
    def superoperator(self) -> SuperOperator:
        mat = sum(np.kron(k, k.conj()) for k in self.kraus_ops)
        return SuperOperator(mat, self.targets, self.name)

    def apply_array(self, mat: np.ndarray, n_qubits: int) -> np.ndarray:
        return self.superoperator.apply_array(mat, n_qubits)

    def adjoint_array(self, mat: np.ndarray, n_qubits: int) -> np.ndarray:
        return self.superoperator.adjoint_array(mat, n_qubits)

    def shifted(self, offset: int) -> "KrausChannel":
        return KrausChannel(self.kraus_ops, tuple(t + offset for t in self.targets), self.name)


@dataclass(frozen=True)
class NoiseParams:
    q_u: float = 0.0
    q_z: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "q_u", check_rate(self.q_u, "q_u"))
        object.__setattr__(self, "q_z", check_rate(self.q_z, "q_z"))

    @classmethod
    def from_line_cut(cls, q_z: float, p: float) -> "NoiseParams":
        """Point on the ray ``p = 2 q_z / q_u``."""
        if p <= 0:
            raise ValueError("p must be positive")
        return cls(q_u=2.0 * q_z / p, q_z=q_z)


# -- constructors -------------------------------------------------------------


def dephasing_channel(target: int, q_z: float) -> KrausChannel:
    q_z = check_rate(q_z, "q_z")
    return KrausChannel(
        (np.sqrt(1 - q_z) * I2, np.sqrt(q_z) * Z), (target,), name=f"dephase[{target}]"
    )


def depolarizing_1q(target: int, q: float) -> KrausChannel:
    """``(1 - q) rho + q I/2`` on one qubit."""
    q = check_rate(q, "q")
    ops = (np.sqrt(1 - 0.75 * q) * I2,) + tuple(np.sqrt(q / 4) * p for p in (X, Y, Z))
    return KrausChannel(ops, (target,), name=f"depol1[{target}]")


def depolarizing_2q(targets: Sequence[int], q_u: float) -> KrausChannel:
    """Two-qubit Haar twirl with probability ``q_u``, written as 17 Pauli Kraus operators."""
    q_u = check_rate(q_u, "q_u")
    targets = tuple(int(t) for t in targets)
    if len(targets) != 2 or targets[0] == targets[1]:
        raise ValueError(f"depolarizing_2q needs two distinct targets, got {targets}")
    ops = [np.sqrt(1 - q_u) * np.eye(4, dtype=complex)]
    for a, b in itertools.product((I2, X, Y, Z), repeat=2):
        ops.append(np.sqrt(q_u / 16) * np.kron(a, b))
    return KrausChannel(tuple(ops), targets, name=f"depol2[{targets[0]},{targets[1]}]")


def pauli_channel(error: PauliString) -> KrausChannel:
    """Deterministic application of a Pauli string (a unitary channel)."""
    return KrausChannel((error.local_matrix(),), error.targets, name=f"pauli[{error.ops}]")


# -- application --------------------------------------------------------------


def apply_channel(ch, rho: DensityMatrix) -> DensityMatrix:
    n = rho.register.total
    _check_targets(ch.targets, n)
    return DensityMatrix(rho.register, ch.apply_array(rho.matrix, n))


def apply_program(channels: Iterable, rho: DensityMatrix) -> DensityMatrix:
    n = rho.register.total
    mat = rho.matrix
    for ch in channels:
        _check_targets(ch.targets, n)
        mat = ch.apply_array(mat, n)
    return DensityMatrix(rho.register, mat)


def compose_superoperator(channels: Sequence, targets: Sequence[int]) -> SuperOperator:
    """Fuse ``channels`` (applied in order) into one superoperator on ``targets``.

    Every channel must act inside ``targets``. Built by pushing the operator
    basis ``|r><c|`` through the sequence, so cost is ``4^k`` small applications.
    """
    targets = tuple(targets)
    k = len(targets)
    d = 2**k
    local = {t: i for i, t in enumerate(targets)}
    for ch in channels:
        missing = [t for t in ch.targets if t not in local]
        if missing:
            raise ValueError(f"channel {ch.name} acts outside {targets}: {missing}")
    cols = np.empty((d * d, d * d), dtype=complex)
    for j in range(d * d):
        e = np.zeros((d, d), dtype=complex)
        e[j // d, j % d] = 1.0
        for ch in channels:
            sop = ch.superoperator.matrix if isinstance(ch, KrausChannel) else ch.matrix
            e = apply_superop_array(e, k, [local[t] for t in ch.targets], sop)
        cols[:, j] = e.reshape(-1)
    return SuperOperator(cols, targets, name="composed")


# -- ORUM ---------------------------------------------------------------------


def brickwork_bonds(qubits: Sequence[int]) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Even then odd nearest-neighbour bonds of an open chain."""
    q = list(qubits)
    even = [(q[i], q[i + 1]) for i in range(0, len(q) - 1, 2)]
    odd = [(q[i], q[i + 1]) for i in range(1, len(q) - 1, 2)]
    return even, odd


def orum_program(
    register: QubitRegister,
    params: NoiseParams,
    blocks: Sequence[Sequence[int]] | None = None,
) -> list[KrausChannel]:
    """One ORUM time step on the system qubits of ``register``.

    ``blocks`` lists system-relative qubit chains that each receive an
    independent brickwork; by default the whole system is one chain. Within a
    chain the order is even bonds, odd bonds, then dephasing on every qubit.
    """
    if blocks is None:
        blocks = [list(range(register.n_sys))]
    program: list[KrausChannel] = []
    for block in blocks:
        chain = [register.n_ref + k for k in block]
        _check_targets(chain, register.total)
        even, odd = brickwork_bonds(chain)
        program += [depolarizing_2q(b, params.q_u) for b in even]
        program += [depolarizing_2q(b, params.q_u) for b in odd]
        program += [dephasing_channel(k, params.q_z) for k in chain]
    return program


def orum_step(
    rho: DensityMatrix, params: NoiseParams, blocks: Sequence[Sequence[int]] | None = None
) -> DensityMatrix:
    return apply_program(orum_program(rho.register, params, blocks), rho)


def gauge_phases(register: QubitRegister, theta: Sequence[float]) -> np.ndarray:
    """Diagonal of ``prod_j exp(i theta_j Z_j)`` over the system qubits."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (register.n_sys,):
        raise ValueError(f"theta must have length n_sys={register.n_sys}")
    idx = np.arange(register.dim)
    angle = np.zeros(register.dim)
    for j, th in enumerate(theta):
        k = register.n_ref + j
        bit = (idx >> (register.total - 1 - k)) & 1
        angle += th * (1 - 2 * bit)
    return np.exp(1j * angle)


def gauge_transform(rho: DensityMatrix, theta: Sequence[float]) -> DensityMatrix:
    d = gauge_phases(rho.register, theta)
    return DensityMatrix(rho.register, d[:, None] * rho.matrix * d.conj()[None, :])


@dataclass(frozen=True, eq=False)
class ChannelProgram:
    """An ordered channel list bound to the register it acts on."""

    register: QubitRegister
    channels: tuple = ()
    label: str = ""

    def __post_init__(self):
        chans = tuple(self.channels)
        for ch in chans:
            _check_targets(ch.targets, self.register.total)
            bad = [t for t in ch.targets if self.register.is_reference(t)]
            if bad:
                raise ValueError(f"channel {ch.name!r} touches reference qubits {bad}")
        object.__setattr__(self, "channels", chans)

    def __iter__(self):
        return iter(self.channels)

    def __len__(self) -> int:
        return len(self.channels)

    @classmethod
    def orum(
        cls,
        n_sys: int,
        params: NoiseParams,
        n_ref: int | None = None,
        blocks: Sequence[Sequence[int]] | None = None,
        steps: int = 1,
    ) -> "ChannelProgram":
        reg = QubitRegister(n_sys if n_ref is None else n_ref, n_sys)
        chans = orum_program(reg, params, blocks) * steps
        return cls(reg, tuple(chans), label=f"orum(q_u={params.q_u}, q_z={params.q_z})")

    def system_superoperator(self) -> SuperOperator:
        """The whole program as one superoperator on the system qubits (system-local indices)."""
        off = -self.register.n_ref
        return compose_superoperator(
            [ch.shifted(off) for ch in self.channels], tuple(range(self.register.n_sys))
        )
