"""Purified sources and the coherent information ``I_c = S(rho'_S) - S(rho'_RS)``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ._validation import check_count, check_rate
from .channels import depolarizing_1q
from .tensor import (
    DensityMatrix,
    PureState,
    QubitRegister,
    entropy_array,
    parity_of_index,
    ptrace_leading,
)

LABELS = ("MaximallyMixed", "Cat", "Z2", "Custom")


@dataclass(frozen=True, eq=False)
class SourceState:
    """A purification ``psi_rs`` of a source density matrix on the system qubits."""

    psi_rs: PureState
    label: str = "Custom"
    params: tuple = ()

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown source label {self.label!r}")

    @property
    def register(self) -> QubitRegister:
        return self.psi_rs.register

    def system_density(self) -> DensityMatrix:
        reg = self.register
        psi = self.psi_rs.amplitudes.reshape(2**reg.n_ref, 2**reg.n_sys)
        # Tr_R |psi><psi| = Psi^T conj(Psi)
        return DensityMatrix(QubitRegister(0, reg.n_sys), psi.T @ psi.conj())


@dataclass(frozen=True)
class CoherentInfoResult:
    i_c: float
    s_out_system: float
    s_out_joint: float


def maximally_mixed_source(n_sys: int) -> SourceState:
    n_sys = check_count(n_sys, "n_sys", minimum=1)
    d = 2**n_sys
    psi = np.zeros(d * d, dtype=complex)
    psi[np.arange(d) * d + np.arange(d)] = d**-0.5
    return SourceState(PureState(QubitRegister(n_sys, n_sys), psi), "MaximallyMixed", (n_sys,))


def cat_source(n: int) -> SourceState:
    n = check_count(n, "n", minimum=1)
    d = 2**n
    psi = np.zeros(2 * d, dtype=complex)
    psi[0] = psi[2 * d - 1] = 2**-0.5
    return SourceState(PureState(QubitRegister(1, n), psi), "Cat", (n,))


def parity_states(n_sys: int, phases=None) -> tuple[np.ndarray, np.ndarray]:
    """``|even>`` and ``|odd>`` with per-basis-state phases (ascending basis label)."""
    n_sys = check_count(n_sys, "n_sys", minimum=1)
    half = 2 ** (n_sys - 1)
    par = parity_of_index(n_sys)
    if phases is None:
        phases = (np.zeros(half), np.zeros(half))
    even_ph, odd_ph = (np.asarray(p, dtype=float) for p in phases)
    if even_ph.shape != (half,) or odd_ph.shape != (half,):
        raise ValueError(f"each phase vector must have length 2^(n_sys-1) = {half}")
    even = np.zeros(2**n_sys, dtype=complex)
    odd = np.zeros(2**n_sys, dtype=complex)
    even[par == 0] = np.exp(1j * even_ph) / np.sqrt(half)
    odd[par == 1] = np.exp(1j * odd_ph) / np.sqrt(half)
    return even, odd


def z2_source(n_sys: int, phases=None) -> SourceState:
    """``(|0>_R |even> + |1>_R |odd>) / sqrt(2)``; zero phases give the X-basis cat."""
    even, odd = parity_states(n_sys, phases)
    psi = np.concatenate([even, odd]) / np.sqrt(2)
    return SourceState(PureState(QubitRegister(1, n_sys), psi), "Z2", (n_sys,))


def _check_program(program: Sequence, register: QubitRegister) -> None:
    for ch in program:
        for t in ch.targets:
            if register.is_reference(t):
                raise ValueError(f"channel {getattr(ch, 'name', ch)!r} touches reference qubit {t}")
            if not 0 <= t < register.total:
                raise ValueError(f"channel target {t} outside the {register.total}-qubit register")


def output_state(src: SourceState, program: Sequence) -> np.ndarray:
    """Joint output matrix ``(id_R (x) N)(|psi><psi|)`` as a plain array."""
    reg = src.register
    _check_program(program, reg)
    a = src.psi_rs.amplitudes
    rho = np.outer(a, a.conj())
    for ch in program:
        rho = ch.apply_array(rho, reg.total)
    return rho


def coherent_information_array(rho_joint: np.ndarray, n_ref: int) -> CoherentInfoResult:
    s_joint = entropy_array(rho_joint)
    s_sys = entropy_array(ptrace_leading(rho_joint, 2**n_ref))
    return CoherentInfoResult(s_sys - s_joint, s_sys, s_joint)


def coherent_information(src: SourceState, program: Sequence = ()) -> CoherentInfoResult:
    rho = output_state(src, program)
    return coherent_information_array(rho, src.register.n_ref)


# -- cat crossover sweep --------------------------------------------------------


class CatSweepRow(NamedTuple):
    n: int
    q: float
    ic_per_use: float
    is_argmax: bool


def cat_ic_per_use(n: int, q: float) -> float:
    """Per-use coherent information of the ``n``-qubit cat source through ``U_1^{(x)n}``."""
    src = cat_source(n) if n > 1 else maximally_mixed_source(1)
    program = [depolarizing_1q(src.register.n_ref + k, q) for k in range(n)]
    return coherent_information(src, program).i_c / n


def cat_crossover_sweep(n_max: int, qs: Sequence[float], include_even: bool = False) -> list[CatSweepRow]:
    """Tabulate per-use ``I_c`` of cat sources, flagging the best odd ``n`` at each ``q``.

    ``n = 1`` is the maximally mixed single-qubit source. Even ``n`` rows are
    only emitted with ``include_even`` and never carry the argmax flag.
    """
    n_max = check_count(n_max, "n_max", minimum=1)
    if n_max > 7:
        raise ValueError("n_max is limited to 7")
    qs = [check_rate(q, "q") for q in qs]
    ns = [n for n in range(1, n_max + 1) if include_even or n % 2 == 1]
    rows: list[CatSweepRow] = []
    for q in qs:
        vals = {n: cat_ic_per_use(n, q) for n in ns}
        odd = {n: v for n, v in vals.items() if n % 2 == 1}
        best = max(odd, key=lambda n: (odd[n], -n))
        rows += [CatSweepRow(n, q, vals[n], n == best) for n in ns]
    return rows
