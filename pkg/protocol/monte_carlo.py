"""
monte_carlo.py
==============

Monte Carlo ensembles of measurement cycles.

Every shot draws from its own counter-based random stream keyed by
(master_seed, shot index), so an ensemble is identical whether it runs in
one process or is split across a worker pool.

Author: Dênio Barbosa Júnior
Created: 2026-10-13
"""

import time
from dataclasses import dataclass, field, replace
from multiprocessing import Pool
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from magnetometer.config import SimConfig
from protocol.sequences import PROTOCOL_RUNNERS, ShotRecord, run_calibration_shot


Runner = Callable[..., ShotRecord]


def shot_rng(master_seed: int, shot_index: int) -> np.random.Generator:
    """
    Random generator of one shot.

    Philox keyed by master_seed in the high 64 bits and the shot index in
    the low 64 bits.
    """
    if not 0 <= master_seed < 2**64 or not 0 <= shot_index < 2**64:
        raise ValueError("master_seed and shot_index must fit in 64 unsigned bits")
    return np.random.Generator(np.random.Philox(key=(master_seed << 64) | shot_index))


def derive_seed(master_seed: int, *labels: int) -> int:
    """Independent 64-bit seed for a sub-run (sweep point, reference ensemble)."""
    sequence = np.random.SeedSequence([master_seed, *labels])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _run_chunk(task: Tuple[Runner, SimConfig, int, Sequence[int]]) -> List[ShotRecord]:
    runner, config, master_seed, indices = task
    return [runner(config, shot_rng(master_seed, int(i)), int(i)) for i in indices]


@dataclass
class ShotEnsemble:
    """
    Records of all shots of one Monte Carlo run.

    Attributes:
        protocol: Protocol name
        master_seed: Seed of the per-shot streams
        config_hash: Hash of the configuration that produced the run
        records: Shot records ordered by shot index
    """

    protocol: str
    master_seed: int
    config_hash: str
    records: List[ShotRecord] = field(default_factory=list)

    @property
    def n_shots(self) -> int:
        return len(self.records)

    def pulse_ids(self) -> List[str]:
        return list(self.records[0].outcomes) if self.records else []

    def outcomes(self, pulse_id: str) -> np.ndarray:
        """(S2c, S2s) of every shot for one pulse, shape (n_shots, 2)."""
        if pulse_id not in self.pulse_ids():
            raise ValueError(f"Unknown pulse '{pulse_id}'. Available: {self.pulse_ids()}")
        return np.array([record.outcomes[pulse_id] for record in self.records], dtype=float)

    def to_frame(self) -> pd.DataFrame:
        """One row per shot and measured pulse: shot_id, pulse_id, s2c, s2s."""
        rows = [
            {"shot_id": record.shot_id, "pulse_id": pulse_id, "s2c": s2c, "s2s": s2s}
            for record in self.records
            for pulse_id, (s2c, s2s) in record.outcomes.items()
        ]
        return pd.DataFrame(rows, columns=["shot_id", "pulse_id", "s2c", "s2s"])

    def summary(self) -> Dict[str, Dict[str, Optional[float]]]:
        """
        Per-pulse means and variances with standard errors.

        Variances and their errors are None for a single shot.
        """
        n = self.n_shots
        result: Dict[str, Dict[str, Optional[float]]] = {}
        for pulse_id in self.pulse_ids():
            data = self.outcomes(pulse_id)
            stats: Dict[str, Optional[float]] = {"n_shots": float(n)}
            for column, name in enumerate(("s2c", "s2s")):
                values = data[:, column]
                stats[f"mean_{name}"] = float(np.mean(values))
                if n > 1:
                    var = float(np.var(values, ddof=1))
                    stats[f"var_{name}"] = var
                    stats[f"stderr_mean_{name}"] = float(np.sqrt(var / n))
                    stats[f"stderr_var_{name}"] = float(var * np.sqrt(2.0 / (n - 1)))
                else:
                    stats[f"var_{name}"] = None
                    stats[f"stderr_mean_{name}"] = None
                    stats[f"stderr_var_{name}"] = None
            result[pulse_id] = stats
        return result


def monte_carlo(
    protocol: Union[str, Runner],
    config: SimConfig,
    n_shots: Optional[int] = None,
    master_seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> ShotEnsemble:
    """
    Run an ensemble of independent measurement cycles.

    Args:
        protocol: Protocol name ("pn", "entangled", "calibration") or a
            module-level runner with signature (config, rng, shot_id)
        config: Simulation configuration
        n_shots: Number of shots (config.n_shots when omitted)
        master_seed: Seed of the per-shot streams (config.master_seed)
        workers: Worker processes (config.workers)

    Returns:
        Ensemble ordered by shot index, identical for any worker count

    Raises:
        ValueError: If n_shots < 1 or the protocol is unknown
    """
    n_shots = config.n_shots if n_shots is None else n_shots
    master_seed = config.master_seed if master_seed is None else master_seed
    workers = config.workers if workers is None else workers
    if n_shots < 1:
        raise ValueError(f"n_shots must be at least 1, got {n_shots}")
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers}")

    if isinstance(protocol, str):
        if protocol not in PROTOCOL_RUNNERS:
            raise ValueError(f"Unknown protocol '{protocol}'. Choose from {list(PROTOCOL_RUNNERS)}")
        runner = PROTOCOL_RUNNERS[protocol]
        name = protocol
    else:
        runner = protocol
        name = getattr(protocol, "__name__", "custom")

    logger.info(f"Running {n_shots} shots of '{name}' with {workers} worker(s), seed {master_seed}")
    start = time.time()

    chunks = [chunk for chunk in np.array_split(np.arange(n_shots), workers) if len(chunk)]
    tasks = [(runner, config, master_seed, chunk.tolist()) for chunk in chunks]
    if workers > 1 and len(tasks) > 1:
        with Pool(processes=len(tasks)) as pool:
            results = pool.map(_run_chunk, tasks)
    else:
        results = [_run_chunk(task) for task in tasks]

    records = [record for chunk in results for record in chunk]
    logger.info(f"Finished {n_shots} shots of '{name}' in {time.time() - start:.1f}s")
    return ShotEnsemble(
        protocol=name,
        master_seed=master_seed,
        config_hash=config.config_hash(),
        records=records,
    )


@dataclass
class CalibrationResult:
    """
    Outcome of the coupling calibration.

    Attributes:
        kappa_squared: Estimated kappa^2
        stderr: Standard error of the estimate (0 on the analytic path)
        n_shots: Shots used (0 on the analytic path)
        ensemble: Shot ensemble behind the estimate, if any
    """

    kappa_squared: float
    stderr: float
    n_shots: int
    ensemble: Optional[ShotEnsemble] = field(default=None, repr=False)


def run_calibration_protocol(
    config: SimConfig,
    n_shots: Optional[int] = None,
    master_seed: Optional[int] = None,
    workers: Optional[int] = None,
    analytic: bool = False,
) -> CalibrationResult:
    """
    Estimate kappa^2 of the readout probe from the S2s mean.

    kappa^2 = mean(S2s) / (sqrt(eta) <S3c>). Extra decoherence during the
    pulses biases the estimate low.

    Raises:
        ValueError: For a zero S3c input or the one-cell configuration
    """
    config = replace(config, readout_path="mode", readout_model="lumped")
    if config.ensemble.gamma_extra > 0:
        logger.warning(
            f"gamma_extra = {config.ensemble.gamma_extra:g} s^-1 biases the kappa^2 estimate low"
        )
    scale = np.sqrt(config.probe2.eta_detection) * config.calibration_s3c
    if analytic:
        record = run_calibration_shot(config, None)
        return CalibrationResult(
            kappa_squared=float(record.outcomes["pulse2"][1] / scale), stderr=0.0, n_shots=0
        )

    ensemble = monte_carlo("calibration", config, n_shots, master_seed, workers)
    s2s = ensemble.outcomes("pulse2")[:, 1]
    stderr = float(np.std(s2s, ddof=1) / np.sqrt(len(s2s))) if len(s2s) > 1 else float("nan")
    estimate = float(np.mean(s2s) / scale)
    logger.info(f"Calibrated kappa^2 = {estimate:.4f} from {len(s2s)} shots")
    return CalibrationResult(
        kappa_squared=estimate, stderr=stderr / abs(scale), n_shots=len(s2s), ensemble=ensemble,
    )
