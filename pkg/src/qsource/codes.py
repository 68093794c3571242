"""Classical and quantum Z2 codes, syndrome recovery and QEC dynamics.

Qubits of a code are numbered ``0 .. n_phys - 1``; block ``I`` of the quantum
code holds qubits ``I*n .. I*n + n - 1``. Syndrome bit ``j`` is 1 when the
state sits in the ``-1`` eigenspace of generator ``j``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from scipy import linalg

from ._validation import check_count, check_odd, check_register_size
from .channels import KrausChannel, NoiseParams, PauliString, orum_program
from .coherent import SourceState, coherent_information_array, parity_states
from .tensor import PureState, QubitRegister, fidelity_with_pure, ptrace_leading

CORRECT_ATOL = 1e-10


def _z_string(qubits: Sequence[int]) -> PauliString:
    qubits = tuple(qubits)
    return PauliString("Z" * len(qubits), qubits)


def _majority_flips(checks: Sequence[int]) -> list[int]:
    """Minority positions of a chain whose neighbour-parity checks are ``checks``.

    ``checks[j] = e[j] ^ e[j+1]``. Of the two consistent patterns the lighter
    one is returned; the chain length is ``len(checks) + 1`` and must be odd.
    """
    e = [0]
    for c in checks:
        e.append(e[-1] ^ int(c))
    if 2 * sum(e) > len(e):
        e = [1 - b for b in e]
    return [k for k, b in enumerate(e) if b]


@dataclass(frozen=True)
class CodeParams:
    n: int
    m: int = 1

    def __post_init__(self):
        check_odd(self.n, "n")
        check_count(self.m, "m", minimum=1)

    @property
    def decodable(self) -> bool:
        """Majority vote across blocks is tie-free only for odd ``m``."""
        return self.m % 2 == 1


@dataclass(frozen=True, eq=False)
class StabilizerCode:
    n_phys: int
    generators: tuple[PauliString, ...]
    logical_x: PauliString
    logical_z: PauliString
    decoder: dict = field(repr=False)
    distance: int
    blocks: tuple[tuple[int, ...], ...] = ()
    name: str = "code"

    def __post_init__(self):
        check_count(self.n_phys, "n_phys", minimum=1)
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if not self.blocks:
            object.__setattr__(self, "blocks", (tuple(range(self.n_phys)),))
        for a, b in itertools.combinations(gens, 2):
            if not a.commutes_with(b):
                raise ValueError(f"generators {a} and {b} anticommute")
        for g in gens:
            if not (g.commutes_with(self.logical_x) and g.commutes_with(self.logical_z)):
                raise ValueError(f"logical operator fails to commute with generator {g}")
        if self.logical_x.commutes_with(self.logical_z):
            raise ValueError("logical X and Z must anticommute")
        expected = set(itertools.product((0, 1), repeat=len(gens)))
        if set(self.decoder) != expected:
            raise ValueError("decoder must cover every syndrome exactly once")
        for s, corr in self.decoder.items():
            if self.syndrome_of(corr) != s:
                raise ValueError(f"correction {corr} does not produce syndrome {s}")

    @property
    def n_generators(self) -> int:
        return len(self.generators)

    def syndrome_of(self, error: PauliString) -> tuple[int, ...]:
        return tuple(0 if g.commutes_with(error) else 1 for g in self.generators)

    def correction(self, syndrome: Sequence[int]) -> PauliString:
        return self.decoder[tuple(int(b) for b in syndrome)]

    @cached_property
    def syndrome_bases(self):
        """``(syndromes, eigenspaces, U, W, sector mask)`` used by the recovery map."""
        spaces = _syndrome_eigenspaces(self)
        n = self.n_phys
        keys = sorted(spaces)
        u = np.hstack([spaces[s] for s in keys])
        w = np.hstack([_real_pauli(self.correction(s), n) @ spaces[s] for s in keys])
        sector = np.concatenate([np.full(spaces[s].shape[1], i) for i, s in enumerate(keys)])
        mask = (sector[:, None] == sector[None, :]).astype(float)
        return keys, spaces, u, w, mask


def _real_pauli(p: PauliString, n: int) -> np.ndarray:
    # Y = i ZX; the dropped phase is global per syndrome sector and cancels in R
    return (p.matrix(n) * (-1j) ** p.ops.count("Y")).real


def _code_generators(n: int, m: int) -> list[PauliString]:
    gens = [
        PauliString("XX", (b * n + j, b * n + j + 1)) for b in range(m) for j in range(n - 1)
    ]
    gens += [_z_string(range(b * n, (b + 2) * n)) for b in range(m - 1)]
    return gens


def _z2_decoder(n: int, m: int) -> dict:
    n_in = n - 1
    table = {}
    for s in itertools.product((0, 1), repeat=m * n_in + m - 1):
        corr = PauliString.identity()
        for b in range(m):
            flips = _majority_flips(s[b * n_in : (b + 1) * n_in])
            corr = corr * _z_string([b * n + k for k in flips])
        for b in _majority_flips(s[m * n_in :]):
            corr = corr * PauliString("X", (b * n,))
        table[s] = corr
    return table


def classical_z2_code(n: int) -> StabilizerCode:
    """Phase-flip repetition code: checks ``X_j X_{j+1}``, majority-vote decoding."""
    n = check_odd(n, "n")
    return StabilizerCode(
        n_phys=n,
        generators=tuple(_code_generators(n, 1)),
        logical_x=PauliString("X", (0,)),
        logical_z=_z_string(range(n)),
        decoder=_z2_decoder(n, 1),
        distance=n,
        name=f"classical_z2({n})",
    )


def quantum_z2_code(params: CodeParams) -> StabilizerCode:
    """``[[m n, 1, min(m, n)]]`` code: ``m`` phase-flip blocks glued by ``Z^n Z^n`` checks."""
    if not params.decodable:
        raise ValueError(f"m={params.m} is even; block majority vote would tie")
    n, m = params.n, params.m
    return StabilizerCode(
        n_phys=n * m,
        generators=tuple(_code_generators(n, m)),
        logical_x=PauliString("X" * m, tuple(b * n for b in range(m))),
        logical_z=_z_string(range(n)),
        decoder=_z2_decoder(n, m),
        distance=min(n, m),
        blocks=tuple(tuple(range(b * n, (b + 1) * n)) for b in range(m)),
        name=f"quantum_z2({n},{m})",
    )


def logical_basis(code: StabilizerCode) -> tuple[np.ndarray, np.ndarray]:
    """``|0_L> = |even>^(x)m`` and ``|1_L> = |odd>^(x)m`` in the zero-phase gauge."""
    n = len(code.blocks[0])
    even, odd = parity_states(n)
    zero, one = np.ones(1, dtype=complex), np.ones(1, dtype=complex)
    for _ in code.blocks:
        zero, one = np.kron(zero, even), np.kron(one, odd)
    return zero, one


def encode_logical(code: StabilizerCode) -> SourceState:
    """``(|0>_R |0_L> + |1>_R |1_L>) / sqrt(2)`` with one reference qubit."""
    check_register_size(1 + code.n_phys)
    zero, one = logical_basis(code)
    psi = np.concatenate([zero, one]) / np.sqrt(2)
    return SourceState(PureState(QubitRegister(1, code.n_phys), psi), "Z2", (code.name,))


def codespace_projector(code: StabilizerCode) -> np.ndarray:
    d = 2**code.n_phys
    proj = np.eye(d, dtype=complex)
    for g in code.generators:
        proj = proj @ (np.eye(d) + g.matrix(code.n_phys)) / 2
    return proj


# -- recovery -----------------------------------------------------------------


def _syndrome_eigenspaces(code: StabilizerCode) -> dict[tuple[int, ...], np.ndarray]:
    """Orthonormal bases of the joint eigenspaces, keyed by syndrome."""
    n, r = code.n_phys, code.n_generators
    d = 2**n
    if r == 0:
        return {(): np.eye(d)}
    # distinct weights make every syndrome a distinct eigenvalue of M
    m_op = sum((2.0**j) * g.matrix(n).real for j, g in enumerate(code.generators))
    ev, vecs = linalg.eigh(m_op)
    top = 2**r - 1
    labels = np.rint((top - ev) / 2).astype(int)
    spaces = {}
    for s_int in np.unique(labels):
        bits = tuple((int(s_int) >> j) & 1 for j in range(r))
        spaces[bits] = vecs[:, labels == s_int]
    return spaces


def _to_system_last(mat: np.ndarray, n_qubits: int, targets: Sequence[int]):
    targets = list(targets)
    others = [k for k in range(n_qubits) if k not in targets]
    order = others + targets
    perm = order + [n_qubits + k for k in order]
    d_o, d_t = 2 ** len(others), 2 ** len(targets)
    t = mat.reshape((2,) * (2 * n_qubits)).transpose(perm).reshape(d_o, d_t, d_o, d_t)
    return t, perm


def _from_system_last(t: np.ndarray, perm: list[int], shape) -> np.ndarray:
    n2 = len(perm)
    return t.reshape((2,) * n2).transpose(np.argsort(perm)).reshape(shape)


def _sandwich(left: np.ndarray, t: np.ndarray, right: np.ndarray) -> np.ndarray:
    """``(I (x) left) T (I (x) right)`` for ``T`` shaped ``(d_o, d_t, d_o, d_t)``."""
    return np.einsum("ab,ibjc,cd->iajd", left, t, right, optimize=True)


@dataclass(frozen=True, eq=False)
class RecoveryChannel:
    """Project onto syndrome sectors and apply the decoder's correction.

    ``R(rho) = sum_s C_s P_s rho P_s C_s^dagger``. Evaluated in the syndrome
    eigenbasis ``U``: ``R(rho) = W (mask * U^dagger rho U) W^dagger`` with
    ``W = [C_s V_s]``; the Kraus list is only materialised on request.
    """

    code: StabilizerCode
    targets: tuple[int, ...] = ()
    name: str = "recovery"

    def __post_init__(self):
        if not self.targets:
            object.__setattr__(self, "targets", tuple(range(self.code.n_phys)))
        if len(self.targets) != self.code.n_phys:
            raise ValueError("one target per physical qubit is required")

    @property
    def _bases(self):
        return self.code.syndrome_bases

    @property
    def syndromes(self) -> list[tuple[int, ...]]:
        return self._bases[0]

    def projector(self, syndrome: Sequence[int]) -> np.ndarray:
        v = self._bases[1][tuple(syndrome)]
        return v @ v.T

    @property
    def kraus_ops(self) -> tuple[np.ndarray, ...]:
        n, spaces = self.code.n_phys, self._bases[1]
        # C_s Pi_s = (C_s V_s) V_s^T with V_s the (real) syndrome eigenbasis
        return tuple(
            (self.code.correction(s).matrix(n) @ spaces[s]) @ spaces[s].T for s in self.syndromes
        )

    def as_kraus_channel(self) -> KrausChannel:
        return KrausChannel(self.kraus_ops, self.targets, self.name)

    def shifted(self, offset: int) -> "RecoveryChannel":
        return RecoveryChannel(self.code, tuple(t + offset for t in self.targets), self.name)

    def apply_array(self, mat: np.ndarray, n_qubits: int) -> np.ndarray:
        _, _, u, w, mask = self._bases
        t, perm = _to_system_last(mat, n_qubits, self.targets)
        t = _sandwich(u.T, t, u) * mask[None, :, None, :]
        t = _sandwich(w, t, w.T)
        return _from_system_last(t, perm, mat.shape)

    def adjoint_array(self, mat: np.ndarray, n_qubits: int) -> np.ndarray:
        _, _, u, w, mask = self._bases
        t, perm = _to_system_last(mat, n_qubits, self.targets)
        t = _sandwich(w.T, t, w) * mask[None, :, None, :]
        t = _sandwich(u, t, u.T)
        return _from_system_last(t, perm, mat.shape)


def recovery_channel(code: StabilizerCode, offset: int = 0) -> RecoveryChannel:
    """Recovery acting on qubits ``offset .. offset + n_phys - 1`` of a register."""
    return RecoveryChannel(code, tuple(range(offset, offset + code.n_phys)))


def correctability_check(code: StabilizerCode, error: PauliString) -> bool:
    """True iff recovery after ``error`` restores the encoded state to fidelity > 1 - 1e-10."""
    bad = [t for t in error.targets if not 0 <= t < code.n_phys]
    if bad:
        raise ValueError(f"error acts outside the code on qubits {bad}")
    src = encode_logical(code)
    psi = src.psi_rs.amplitudes.reshape(2, -1)
    _, _, u, w, mask = code.syndrome_bases
    sector = _sector_index(mask)
    # F = sum_s |<psi| C_s P_s E |psi>|^2, evaluated column-wise in the syndrome basis
    phi = np.stack([error.apply_to_vector(row, code.n_phys) for row in psi])
    overlap = (phi @ u) * (psi.conj() @ w)
    amp = overlap.sum(axis=0)
    per_sector = np.bincount(sector, amp.real) + 1j * np.bincount(sector, amp.imag)
    return float(np.sum(np.abs(per_sector) ** 2)) > 1.0 - CORRECT_ATOL


def _sector_index(mask: np.ndarray) -> np.ndarray:
    return np.argmax(mask, axis=0)


# -- dynamics -----------------------------------------------------------------


class DynamicsRecord(NamedTuple):
    t: int
    i_c: float
    purity_sys: float


def run_dynamics(
    code: StabilizerCode, params: NoiseParams, t_max: int, qec_enabled: bool = True
) -> list[DynamicsRecord]:
    """Evolve the encoded source through ``t_max`` ORUM steps.

    Each block gets its own brickwork per step; with QEC the recovery closes
    the step. Row ``t = 0`` is the noiseless encoded state.
    """
    t_max = check_count(t_max, "t_max")
    src = encode_logical(code)
    reg = src.register
    step = orum_program(reg, params, blocks=[list(b) for b in code.blocks])
    recovery = recovery_channel(code, offset=reg.n_ref) if qec_enabled else None
    a = src.psi_rs.amplitudes
    rho = np.outer(a, a.conj())

    def record(t: int) -> DynamicsRecord:
        ic = coherent_information_array(rho, reg.n_ref).i_c
        sys = ptrace_leading(rho, 2**reg.n_ref)
        return DynamicsRecord(t, ic, float(np.vdot(sys, sys).real))

    out = [record(0)]
    for t in range(1, t_max + 1):
        for ch in step:
            rho = ch.apply_array(rho, reg.total)
        if recovery is not None:
            rho = recovery.apply_array(rho, reg.total)
        out.append(record(t))
    return out
