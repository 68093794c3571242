"""Phase-diagram scans over (q_u, q_z) with deterministic, order-preserving fan-out."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from ._validation import check_count, check_positive, check_rate
from .channels import ChannelProgram, NoiseParams
from .optimizer import OptimizerConfig, classify_source, optimize_source


@dataclass(frozen=True)
class ScanRow:
    q_u: float
    q_z: float
    n: int
    seed: int
    ic_max: float
    q1: float
    purity: float
    phase: str
    iterations: int
    wall_ms: float | None
    converged: bool


COLUMNS = tuple(ScanRow.__dataclass_fields__)


def linspace(lo: float, hi: float, steps: int) -> list[float]:
    steps = check_count(steps, "steps", minimum=1)
    if steps == 1:
        if lo != hi:
            raise ValueError("a single-step grid needs min == max")
        return [float(lo)]
    if hi < lo:
        raise ValueError(f"grid max {hi} is below min {lo}")
    return [float(x) for x in np.linspace(lo, hi, steps)]


def grid_points(qu_values: Sequence[float], qz_values: Sequence[float]) -> list[NoiseParams]:
    """Row-major lattice: ``q_u`` is the slow index."""
    return [NoiseParams(q_u=qu, q_z=qz) for qu in qu_values for qz in qz_values]


def line_cut_points(qz_values: Sequence[float], p: float) -> list[NoiseParams]:
    """Points on the ray ``q_u = 2 q_z / p``."""
    p = check_positive(p, "p")
    return [NoiseParams.from_line_cut(check_rate(qz, "q_z"), p) for qz in qz_values]


def _run_point(args: tuple[NoiseParams, int, OptimizerConfig, bool]) -> ScanRow:
    params, n_sys, cfg, timing = args
    with threadpool_limits(limits=1):
        start = time.perf_counter()
        res = optimize_source(ChannelProgram.orum(n_sys, params), cfg)
        elapsed = (time.perf_counter() - start) * 1e3
    phase = classify_source(res.rho_opt, res.i_c)
    return ScanRow(
        q_u=params.q_u,
        q_z=params.q_z,
        n=n_sys,
        seed=cfg.seed,
        ic_max=res.i_c,
        q1=res.q1,
        purity=res.purity_opt,
        phase=phase.label,
        iterations=res.iterations,
        wall_ms=elapsed if timing else None,
        converged=res.converged,
    )


def scan_phase_diagram(
    points: Iterable[NoiseParams],
    n_sys: int,
    config: OptimizerConfig | None = None,
    threads: int = 1,
    timing: bool = False,
) -> list[ScanRow]:
    """Optimize the source at every point; rows come back in input order.

    Every point uses the same seed, so a one-point scan reproduces a direct
    ``optimize_source`` call. Wall time is recorded only with ``timing``
    because it would break byte-identical output.
    """
    config = config or OptimizerConfig()
    n_sys = check_count(n_sys, "n_sys", minimum=1)
    threads = check_count(threads, "threads", minimum=1)
    jobs = [(p, n_sys, config, timing) for p in points]
    if threads == 1 or len(jobs) <= 1:
        return [_run_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        # map yields in submission order regardless of completion order
        return list(pool.map(_run_point, jobs))


def row_dict(row: ScanRow) -> dict:
    return asdict(row)
