"""Coherent-information sources for noisy qubit chains.

Dense density-matrix simulation of dephasing and depolarizing channels,
closed-form baselines, gradient-ascent source optimization and Z2 codes.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover - running from a source tree
    __version__ = "0.0.0"

from ._validation import PSDViolationError
from .analytic import binary_entropy, ic_maximally_mixed_dephasing, ic_z2_dephasing
from .channels import (
    ChannelProgram,
    KrausChannel,
    NoiseParams,
    PauliString,
    dephasing_channel,
    depolarizing_1q,
    depolarizing_2q,
    orum_step,
)
from .codes import (
    CodeParams,
    StabilizerCode,
    classical_z2_code,
    correctability_check,
    encode_logical,
    quantum_z2_code,
    recovery_channel,
    run_dynamics,
)
from .coherent import (
    SourceState,
    cat_crossover_sweep,
    cat_source,
    coherent_information,
    maximally_mixed_source,
    z2_source,
)
from .optimizer import (
    OptimizerConfig,
    SourceOptimizer,
    SourcePhaseClassifier,
    classify_source,
    ic_gradient,
    optimize_source,
)
from .scan import scan_phase_diagram
from .tensor import (
    DensityMatrix,
    PureState,
    QubitRegister,
    outer_product,
    partial_trace,
    purity,
    von_neumann_entropy,
)

__all__ = [name for name in dir() if not name.startswith("_")]
