"""Gradient ascent of the coherent information over purified sources.

The trainable object is the joint pure state ``psi_RS`` (reference and system
of equal size). Each step moves along the sphere-projected gradient and
renormalizes; a halving line search keeps the ``I_c`` trace monotone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_count, check_positive
from .channels import ChannelProgram, apply_superop_array
from .coherent import coherent_information
from .tensor import (
    DensityMatrix,
    PureState,
    QubitRegister,
    entropy_array,
    neg_log2_array,
    parity_of_index,
    ptrace_leading,
)

log = logging.getLogger(__name__)

FD_STEP = 1e-5
MAX_HALVINGS = 40

NOCODING_TOL = 1e-3
PURITY_TOL = 0.02
OFFBLOCK_TOL = 1e-3


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float = 0.05
    max_iters: int = 50_000
    window: int = 200
    tol: float = 1e-9
    restarts: int = 5
    seed: int = 0
    gradient: str = "analytic"


@dataclass(frozen=True, eq=False)
class OptResult:
    psi_opt: PureState
    i_c: float
    q1: float
    iterations: int
    converged: bool
    trace: np.ndarray = field(repr=False)
    purity_opt: float
    rho_opt: DensityMatrix = field(repr=False)
    restart_ic: tuple[float, ...] = ()


@dataclass(frozen=True)
class SourcePhase:
    label: str
    purity: float
    i_c: float
    offblock: float = 0.0


def random_state(register: QubitRegister, seed) -> PureState:
    """Haar-distributed pure state: i.i.d. complex normal amplitudes, normalized."""
    rng = np.random.default_rng(seed)
    amps = rng.standard_normal(register.dim) + 1j * rng.standard_normal(register.dim)
    return PureState.from_unnormalized(register, amps)


class CoherentInfoObjective:
    """``I_c(psi)`` and its Wirtinger gradient for a fixed channel program.

    The whole program is fused into one superoperator on the system qubits so
    each evaluation costs one joint and one system eigendecomposition.
    """

    def __init__(self, program: ChannelProgram):
        self.program = program
        reg = program.register
        self.n_ref, self.n_sys = reg.n_ref, reg.n_sys
        self.d_ref, self.d_sys = 2**reg.n_ref, 2**reg.n_sys
        self.total = reg.total
        self._sys_targets = list(reg.sys_qubits)
        self._sop = program.system_superoperator().matrix
        self._sop_adj = self._sop.conj().T

    def _joint(self, psi: np.ndarray) -> np.ndarray:
        rho = np.outer(psi, psi.conj())
        return apply_superop_array(rho, self.total, self._sys_targets, self._sop)

    def value(self, psi: np.ndarray) -> float:
        """``I_c`` of the (possibly unnormalized) ``psi psi^dagger``."""
        joint = self._joint(psi)
        return entropy_array(ptrace_leading(joint, self.d_ref)) - entropy_array(joint)

    def value_and_grad(self, psi: np.ndarray) -> tuple[float, np.ndarray]:
        """Return ``(I_c, dI_c/d conj(psi))``.

        With ``L = -log2`` on the clipped support,
        ``dI_c/d conj(psi) = [I_R (x) A_S^dag(L(rho'_S)) - A^dag(L(rho'_RS))] psi``.
        The ``1/ln 2`` trace terms cancel between the two entropies because
        both adjoint maps are unital.
        """
        joint = self._joint(psi)
        s_joint, l_joint = neg_log2_array(joint)
        s_sys, l_sys = neg_log2_array(ptrace_leading(joint, self.d_ref))
        a_sys = (self._sop_adj @ l_sys.reshape(-1)).reshape(self.d_sys, self.d_sys)
        a_joint = apply_superop_array(l_joint, self.total, self._sys_targets, self._sop_adj)
        psi_m = psi.reshape(self.d_ref, self.d_sys)
        grad = (psi_m @ a_sys.T).reshape(-1) - a_joint @ psi
        return s_sys - s_joint, grad

    def fd_grad(self, psi: np.ndarray, step: float = FD_STEP) -> np.ndarray:
        """Central differences on real and imaginary parts, as a Wirtinger gradient."""
        grad = np.empty(psi.shape, dtype=complex)
        for k in range(psi.size):
            e = np.zeros(psi.shape, dtype=complex)
            e[k] = step
            d_re = (self.value(psi + e) - self.value(psi - e)) / (2 * step)
            d_im = (self.value(psi + 1j * e) - self.value(psi - 1j * e)) / (2 * step)
            grad[k] = 0.5 * (d_re + 1j * d_im)
        return grad


def tangent(psi: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Project out the radial component so the step stays on the unit sphere."""
    return grad - np.vdot(psi, grad).real * psi


def ic_gradient(psi: PureState, program: ChannelProgram, mode: str = "analytic") -> np.ndarray:
    if not np.isclose(np.linalg.norm(psi.amplitudes), 1.0, atol=1e-12):
        raise ValueError("ic_gradient needs a normalized state")
    if psi.register != program.register:
        raise ValueError("state and program registers differ")
    obj = CoherentInfoObjective(program)
    if mode == "analytic":
        return obj.value_and_grad(np.array(psi.amplitudes))[1]
    if mode in ("fd", "finite-difference"):
        return obj.fd_grad(np.array(psi.amplitudes))
    raise ValueError(f"unknown gradient mode {mode!r}")


def _ascend(obj: CoherentInfoObjective, psi: np.ndarray, cfg: OptimizerConfig):
    fd = cfg.gradient != "analytic"
    if fd:
        val, grad = obj.value(psi), obj.fd_grad(psi)
    else:
        val, grad = obj.value_and_grad(psi)
    trace = [val]
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        step = tangent(psi, grad)
        eta = cfg.learning_rate
        for _ in range(MAX_HALVINGS):
            cand = psi + eta * step
            cand /= np.linalg.norm(cand)
            if fd:
                cval = obj.value(cand)
            else:
                cval, cgrad = obj.value_and_grad(cand)
            if cval >= val:
                break
            eta *= 0.5
        else:
            # no ascent direction survives at machine precision: a stationary point
            converged = True
            it -= 1
            break
        psi, val = cand, cval
        grad = obj.fd_grad(psi) if fd else cgrad
        trace.append(val)
        if it >= cfg.window and trace[-1] - trace[-1 - cfg.window] < cfg.tol:
            converged = True
            break
    return psi, val, it, converged, np.array(trace)


def ascend_from(
    psi: PureState, program: ChannelProgram, config: OptimizerConfig | None = None
) -> tuple[PureState, float, int, bool]:
    """Run one ascent from a given state; returns ``(psi, i_c, iterations, converged)``."""
    if psi.register != program.register:
        raise ValueError("state and program registers differ")
    out, val, iters, conv, _ = _ascend(
        CoherentInfoObjective(program), np.array(psi.amplitudes), config or OptimizerConfig()
    )
    return PureState.from_unnormalized(psi.register, out), float(val), int(iters), bool(conv)


def classify_source(
    rho_opt: DensityMatrix,
    i_c: float,
    nocoding_tol: float = NOCODING_TOL,
    purity_tol: float = PURITY_TOL,
    offblock_tol: float = OFFBLOCK_TOL,
) -> SourcePhase:
    """Label an optimal source as MaximallyMixed, Z2, NoCoding or Other.

    The Z2 test uses entry magnitudes only, which are unchanged by the
    diagonal gauge transformations.
    """
    m = rho_opt.matrix
    n = rho_opt.register.total
    pur = float(np.vdot(m, m).real)
    mags = np.abs(m)
    par = parity_of_index(n)
    cross = par[:, None] != par[None, :]
    total = mags.sum()
    offblock = float(mags[cross].sum() / total) if total > 0 else 0.0
    if i_c < nocoding_tol:
        label = "NoCoding"
    elif abs(pur - 2.0**-n) < purity_tol:
        label = "MaximallyMixed"
    elif abs(pur - 0.5) < purity_tol and offblock < offblock_tol:
        label = "Z2"
    else:
        label = "Other"
    return SourcePhase(label, pur, float(i_c), offblock)


class SourceOptimizer(BaseEstimator):
    """Find the source maximizing single-use coherent information of a channel program.

    ``fit`` takes a :class:`ChannelProgram` whose register has as many
    reference as system qubits. After fitting, ``psi_`` holds the best
    purification over ``restarts`` random starts and ``phase_`` its label.

    Parameters
    ----------
    learning_rate : float
        Base step along the sphere-projected Wirtinger gradient.
    max_iters : int
        Iteration cap per restart; hitting it is reported, not raised.
    window, tol : int, float
        Converged once ``I_c`` rises by less than ``tol`` over ``window`` steps.
    restarts : int
        Independent random initializations; the best ``I_c`` wins.
    random_state : int
        Seed; restart ``r`` uses the ``r``-th spawned child seed.
    gradient : {"analytic", "fd"}
    """

    def __init__(
        self,
        learning_rate: float = 0.05,
        max_iters: int = 50_000,
        window: int = 200,
        tol: float = 1e-9,
        restarts: int = 5,
        random_state: int = 0,
        gradient: str = "analytic",
    ):
        self.learning_rate = learning_rate
        self.max_iters = max_iters
        self.window = window
        self.tol = tol
        self.restarts = restarts
        self.random_state = random_state
        self.gradient = gradient

    def _config(self) -> OptimizerConfig:
        if self.gradient not in ("analytic", "fd"):
            raise ValueError(f"gradient must be 'analytic' or 'fd', got {self.gradient!r}")
        return OptimizerConfig(
            learning_rate=check_positive(self.learning_rate, "learning_rate"),
            max_iters=check_count(self.max_iters, "max_iters", minimum=1),
            window=check_count(self.window, "window", minimum=1),
            tol=check_positive(self.tol, "tol"),
            restarts=check_count(self.restarts, "restarts", minimum=1),
            seed=check_count(self.random_state, "random_state"),
            gradient=self.gradient,
        )

    def fit(self, X: ChannelProgram, y=None) -> "SourceOptimizer":
        if not isinstance(X, ChannelProgram):
            raise TypeError("SourceOptimizer.fit expects a ChannelProgram")
        reg = X.register
        if reg.n_ref != reg.n_sys:
            raise ValueError("the optimizer needs n_ref == n_sys")
        cfg = self._config()
        obj = CoherentInfoObjective(X)
        seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
        best = None
        restart_ic = []
        for r, ss in enumerate(seeds):
            psi0 = random_state(reg, np.random.default_rng(ss)).amplitudes.copy()
            psi, val, iters, conv, trace = _ascend(obj, psi0, cfg)
            restart_ic.append(val)
            log.debug("restart %d: I_c=%.10f iters=%d converged=%s", r, val, iters, conv)
            if best is None or val > best[1]:
                best = (psi, val, iters, conv, trace)
        psi, val, iters, conv, trace = best
        state = PureState.from_unnormalized(reg, psi)
        d_ref = 2**reg.n_ref
        pm = state.amplitudes.reshape(d_ref, -1)
        rho_opt = DensityMatrix(QubitRegister(0, reg.n_sys), pm.T @ pm.conj())
        purity = float(np.vdot(rho_opt.matrix, rho_opt.matrix).real)

        self.result_ = OptResult(
            psi_opt=state,
            i_c=float(val),
            q1=float(val) / reg.n_sys,
            iterations=int(iters),
            converged=bool(conv),
            trace=trace,
            purity_opt=purity,
            rho_opt=rho_opt,
            restart_ic=tuple(float(v) for v in restart_ic),
        )
        self.psi_ = state
        self.i_c_ = self.result_.i_c
        self.q1_ = self.result_.q1
        self.n_iter_ = self.result_.iterations
        self.converged_ = self.result_.converged
        self.trace_ = trace
        self.purity_ = purity
        self.rho_opt_ = rho_opt
        self.phase_ = classify_source(rho_opt, self.i_c_)
        return self

    def score(self, X: ChannelProgram, y=None) -> float:
        """Coherent information of the fitted source through ``X``."""
        check_is_fitted(self, "psi_")
        from .coherent import SourceState

        if X.register != self.psi_.register:
            raise ValueError("program register does not match the fitted source")
        return coherent_information(SourceState(self.psi_), X).i_c


def optimize_source(program: ChannelProgram, config: OptimizerConfig | None = None) -> OptResult:
    config = config or OptimizerConfig()
    est = SourceOptimizer(
        learning_rate=config.learning_rate,
        max_iters=config.max_iters,
        window=config.window,
        tol=config.tol,
        restarts=config.restarts,
        random_state=config.seed,
        gradient=config.gradient,
    )
    return est.fit(program).result_


class SourcePhaseClassifier(BaseEstimator):
    """Threshold classifier over ``(rho_opt, i_c)`` pairs or :class:`OptResult` objects."""

    def __init__(self, nocoding_tol=NOCODING_TOL, purity_tol=PURITY_TOL, offblock_tol=OFFBLOCK_TOL):
        self.nocoding_tol = nocoding_tol
        self.purity_tol = purity_tol
        self.offblock_tol = offblock_tol

    def fit(self, X=None, y=None):
        # stateless; thresholds are hyperparameters
        self.classes_ = np.array(["MaximallyMixed", "NoCoding", "Other", "Z2"])
        return self

    def predict(self, X) -> np.ndarray:
        labels = []
        for item in X:
            rho, i_c = (item.rho_opt, item.i_c) if isinstance(item, OptResult) else item
            labels.append(
                classify_source(rho, i_c, self.nocoding_tol, self.purity_tol, self.offblock_tol).label
            )
        return np.array(labels)
