"""
config.py
=========

Configuration settings for the magnetometer simulator.

This module contains every tunable parameter of a run: physical constants,
ensemble properties, probe pulses, the RF pulse, lock-in sampling, sweep
grids and output settings. All values are SI (seconds, tesla, hertz,
rad/s). Two factory functions return the built-in profiles shipped as
``profiles/baseline.yml`` and ``profiles/entanglement.yml``.

Author: Dênio Barbosa Júnior
Created: 2026-10-12
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from magnetometer import __version__


CELL_CONFIGS = ("one", "two")
PROTOCOLS = ("pn", "entangled", "calibration")
MODE_SIGNS = ("rising", "falling")
READOUT_PATHS = ("mode", "time")
READOUT_MODELS = ("lumped", "temporal")
SWEEP_VARIABLES = ("delay", "rf.duration")
SWEEP_METHODS = ("analytic", "monte_carlo")

# 15 mW of 852 nm light
PHOTONS_PER_SECOND = 15e-3 / (6.62607015e-34 * 299792458.0 / 852e-9)


@dataclass
class PhysicalConstants:
    """
    Atomic constants of the cesium ground state used by the model.

    Attributes:
        gyromagnetic_ratio: Gamma in rad s^-1 T^-1
        spin: Total angular momentum F of the probed hyperfine level
    """

    gyromagnetic_ratio: float = 2.2e10
    spin: float = 4.0

    def validate(self) -> None:
        if self.gyromagnetic_ratio <= 0:
            raise ValueError(f"gyromagnetic_ratio must be positive, got {self.gyromagnetic_ratio}")
        if self.spin <= 0:
            raise ValueError(f"spin must be positive, got {self.spin}")


@dataclass
class EnsembleParams:
    """
    Atomic ensemble properties.

    Attributes:
        n_atoms_per_cell: Atoms in each cell
        n_cells: 1 or 2
        t2_dark: Transverse lifetime without probe light, seconds
        gamma_swap: Probe-induced swap rate, s^-1
        gamma_extra: Probe-induced extra decoherence rate, s^-1
        beta0: Excess initial noise fraction above projection noise
        optical_depth: Resonant optical depth (reported only)
    """

    n_atoms_per_cell: float = 7.2e11
    n_cells: int = 2
    t2_dark: float = 32e-3
    gamma_swap: float = 430.0
    gamma_extra: float = 70.0
    beta0: float = 0.10
    optical_depth: float = 75.0

    @property
    def n_total(self) -> float:
        return self.n_atoms_per_cell * self.n_cells

    @property
    def gamma_total(self) -> float:
        return self.gamma_swap + self.gamma_extra

    @property
    def initial_variance(self) -> float:
        """Pumped-state quadrature variance in normalized units."""
        return (1.0 + self.beta0) * 0.5

    def macroscopic_spin(self, spin: float) -> float:
        """J_x = F * N_total for a fully oriented ensemble."""
        return spin * self.n_total

    def validate(self) -> None:
        if self.n_atoms_per_cell <= 0:
            raise ValueError(f"n_atoms_per_cell must be positive, got {self.n_atoms_per_cell}")
        if self.n_cells not in (1, 2):
            raise ValueError(f"n_cells must be 1 or 2, got {self.n_cells}")
        if self.t2_dark <= 0:
            raise ValueError(f"t2_dark must be positive, got {self.t2_dark}")
        for name in ("gamma_swap", "gamma_extra", "beta0", "optical_depth"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")


@dataclass
class ProbeParams:
    """
    One probe light pulse.

    Attributes:
        duration: Pulse length T, seconds
        photon_number: Photons in the pulse, used to convert normalized
            Stokes outcomes to photon units and as the time-domain flux
        detuning: Probe detuning, Hz (reported only, xi_squared is given)
        xi_squared: Tensor-to-vector polarizability ratio factor, > 0
        eta_detection: Detection efficiency in [0, 1]
        mode_gamma: Exponential rate of the detected temporal mode, s^-1
        mode_sign: "falling" (exp(-gamma t)) or "rising" (exp(+gamma t))
    """

    duration: float = 3e-3
    photon_number: float = PHOTONS_PER_SECOND * 3e-3
    detuning: float = 850e6
    xi_squared: float = 1.0 / 6.3
    eta_detection: float = 0.8
    mode_gamma: float = 500.0
    mode_sign: str = "falling"

    @property
    def photon_rate(self) -> float:
        return self.photon_number / self.duration

    def validate(self) -> None:
        if self.duration <= 0:
            raise ValueError(f"probe duration must be positive, got {self.duration}")
        if self.photon_number < 0:
            raise ValueError(f"photon_number must be non-negative, got {self.photon_number}")
        if self.xi_squared <= 0:
            raise ValueError(f"xi_squared must be positive, got {self.xi_squared}")
        if not 0.0 <= self.eta_detection <= 1.0:
            raise ValueError(f"eta_detection must be in [0, 1], got {self.eta_detection}")
        if self.mode_gamma < 0:
            raise ValueError(f"mode_gamma must be non-negative, got {self.mode_gamma}")
        if self.mode_sign not in MODE_SIGNS:
            raise ValueError(f"mode_sign must be one of {MODE_SIGNS}, got '{self.mode_sign}'")


@dataclass
class RFPulse:
    """
    Square RF pulse resonant with the Larmor precession.

    Attributes:
        amplitude: B_RF in tesla
        duration: tau in seconds
        phase: RF phase; 0 displaces the z quadrature, pi/2 the y quadrature
        carrier: Angular frequency in rad/s; None means the Larmor
            frequency of the bias field
    """

    amplitude: float = 36e-15
    duration: float = 15e-3
    phase: float = 0.0
    carrier: Optional[float] = None

    @property
    def bandwidth(self) -> float:
        """Detection bandwidth delta of a tau-long square pulse, Hz."""
        return 0.88 / self.duration

    def validate(self) -> None:
        if self.amplitude < 0:
            raise ValueError(f"RF amplitude must be non-negative, got {self.amplitude}")
        if self.duration <= 0:
            raise ValueError(f"RF duration must be positive, got {self.duration}")
        if self.carrier is not None and self.carrier <= 0:
            raise ValueError(f"RF carrier must be positive, got {self.carrier}")


@dataclass
class LockinParams:
    """
    Time-domain synthesis and demodulation settings.

    Attributes:
        sample_rate: Samples per second; None means 16 samples per carrier cycle
        detection_bandwidth: Detector bandwidth above the carrier, Hz
    """

    sample_rate: Optional[float] = None
    detection_bandwidth: float = 0.0

    def validate(self) -> None:
        if self.sample_rate is not None and self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.detection_bandwidth < 0:
            raise ValueError(
                f"detection_bandwidth must be non-negative, got {self.detection_bandwidth}"
            )


@dataclass
class SweepSpec:
    """
    Parameter sweep definition.

    Attributes:
        variable: "delay" or "rf.duration"
        values: Grid values in seconds
        method: "analytic" (exact moments) or "monte_carlo"
    """

    variable: str = "delay"
    values: List[float] = field(
        default_factory=lambda: [0.1e-3, 1e-3, 2e-3, 4e-3, 8e-3]
    )
    method: str = "monte_carlo"

    def validate(self) -> None:
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(
                f"Invalid sweep variable '{self.variable}'. Choose from {SWEEP_VARIABLES}"
            )
        if not self.values:
            raise ValueError("Sweep grid is empty")
        floor = 0.0 if self.variable == "delay" else np.finfo(float).tiny
        if min(self.values) < floor:
            raise ValueError(f"Sweep values for '{self.variable}' out of range: {self.values}")
        if self.method not in SWEEP_METHODS:
            raise ValueError(f"Sweep method must be one of {SWEEP_METHODS}, got '{self.method}'")


@dataclass
class OutputSpec:
    """
    Where and what to write.

    Attributes:
        out_dir: Output directory
        write_time_series: Also export synthesized photocurrent traces
        copy_data_dictionary: Copy the output schema next to the results
    """

    out_dir: str = "results"
    write_time_series: bool = False
    copy_data_dictionary: bool = True


@dataclass
class SimConfig:
    """
    Complete configuration of a simulator run.

    Attributes:
        constants: Atomic constants
        ensemble: Ensemble properties
        probe1: Entangling (first) probe pulse
        probe2: Readout (second) probe pulse
        rf: RF pulse
        lockin: Time-domain synthesis settings
        sweep: Sweep definition, used by the sweep command
        output: Output settings
        protocol: "pn", "entangled" or "calibration"
        cell_config: "two" (back-action evading) or "one"
        n_shots: Monte Carlo shots per ensemble
        master_seed: Seed of the per-shot random streams
        workers: Worker processes for Monte Carlo
        pump_duration: Optical pumping time, seconds
        delay: Dark time between entangling probe and RF pulse, seconds
        b_dc: Bias field, tesla
        calibration_s3c: Mean of the S3 input quadrature in the calibration
            protocol, normalized units
        readout_path: "mode" (Gaussian level) or "time" (lock-in synthesis)
        readout_model: "lumped" single-pass probe or "temporal" sliced probe
        n_slices: Slices of the temporal probe model
        mode_gamma_grid: Candidate mode rates for optimization, s^-1

    Example:
        >>> config = SimConfig()
        >>> round(config.carrier_frequency() / (2 * np.pi) / 1e3)
        322
    """

    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    ensemble: EnsembleParams = field(default_factory=EnsembleParams)
    probe1: ProbeParams = field(
        default_factory=lambda: ProbeParams(
            duration=2e-3, photon_number=PHOTONS_PER_SECOND * 2e-3, mode_sign="rising"
        )
    )
    probe2: ProbeParams = field(default_factory=ProbeParams)
    rf: RFPulse = field(default_factory=RFPulse)
    lockin: LockinParams = field(default_factory=LockinParams)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    output: OutputSpec = field(default_factory=OutputSpec)

    protocol: str = "pn"
    cell_config: str = "two"
    n_shots: int = 10000
    master_seed: int = 20250207
    workers: int = 1
    pump_duration: float = 6e-3
    delay: float = 0.1e-3
    b_dc: float = 0.92e-4
    calibration_s3c: float = float(np.sqrt(0.5))
    readout_path: str = "mode"
    readout_model: str = "lumped"
    n_slices: int = 40
    mode_gamma_grid: List[float] = field(
        default_factory=lambda: [float(g) for g in np.arange(200.0, 2000.0 + 1.0, 100.0)]
    )

    def carrier_frequency(self) -> float:
        """RF carrier in rad/s, the Larmor frequency unless set explicitly."""
        if self.rf.carrier is not None:
            return self.rf.carrier
        return self.constants.gyromagnetic_ratio * self.b_dc

    def sample_rate(self) -> float:
        if self.lockin.sample_rate is not None:
            return self.lockin.sample_rate
        return 16.0 * self.carrier_frequency() / (2.0 * np.pi)

    def cycle_time(self, protocol: Optional[str] = None) -> float:
        """Duration of one measurement cycle of ``protocol``, seconds."""
        protocol = protocol or self.protocol
        cycle = self.pump_duration + self.rf.duration + self.probe2.duration
        if protocol == "entangled":
            cycle += self.probe1.duration + self.delay
        elif protocol == "calibration":
            cycle = self.pump_duration + 2 * self.probe2.duration
        return cycle

    def validate(self) -> None:
        """
        Check every section.

        Raises:
            ValueError: Naming the offending field
        """
        for section in (self.constants, self.ensemble, self.probe1, self.probe2,
                        self.rf, self.lockin, self.sweep):
            section.validate()
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"protocol must be one of {PROTOCOLS}, got '{self.protocol}'")
        if self.cell_config not in CELL_CONFIGS:
            raise ValueError(f"cell_config must be one of {CELL_CONFIGS}, got '{self.cell_config}'")
        if self.cell_config == "one" and self.ensemble.n_cells != 1:
            raise ValueError("cell_config 'one' requires ensemble.n_cells = 1")
        if self.cell_config == "two" and self.ensemble.n_cells != 2:
            raise ValueError("cell_config 'two' requires ensemble.n_cells = 2")
        if self.n_shots < 1:
            raise ValueError(f"n_shots must be at least 1, got {self.n_shots}")
        if self.master_seed < 0:
            raise ValueError(f"master_seed must be non-negative, got {self.master_seed}")
        if self.workers < 1:
            raise ValueError(f"workers must be at least 1, got {self.workers}")
        if self.pump_duration < 0 or self.delay < 0:
            raise ValueError("pump_duration and delay must be non-negative")
        if self.b_dc < 0:
            raise ValueError(f"b_dc must be non-negative, got {self.b_dc}")
        if self.readout_path not in READOUT_PATHS:
            raise ValueError(f"readout_path must be one of {READOUT_PATHS}, got '{self.readout_path}'")
        if self.readout_model not in READOUT_MODELS:
            raise ValueError(
                f"readout_model must be one of {READOUT_MODELS}, got '{self.readout_model}'"
            )
        if self.n_slices < 1:
            raise ValueError(f"n_slices must be at least 1, got {self.n_slices}")
        if not self.mode_gamma_grid or min(self.mode_gamma_grid) < 0:
            raise ValueError("mode_gamma_grid must be a non-empty list of non-negative rates")

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form of the configuration, output section excluded."""
        settings = self.to_dict()
        settings.pop("output")
        payload = json.dumps(settings, sort_keys=True, default=float)
        return hashlib.sha256(f"{__version__}:{payload}".encode("utf-8")).hexdigest()


def baseline_config() -> SimConfig:
    """Parameters of the projection-noise-limited demonstration."""
    return SimConfig()


def entanglement_config() -> SimConfig:
    """
    Parameters of the entanglement-assisted demonstration.

    Half the atom number per cell and a weaker readout coupling
    (kappa^2 = 3.1 for the 3 ms readout) with a 0.88 ms RF pulse.
    """
    return SimConfig(
        ensemble=EnsembleParams(
            n_atoms_per_cell=3.6e11, gamma_swap=112.9, gamma_extra=100.0
        ),
        rf=RFPulse(duration=0.88e-3),
        protocol="entangled",
        delay=0.1e-3,
        sweep=SweepSpec(variable="delay", values=[0.1e-3, 1e-3, 2e-3, 4e-3, 8e-3]),
    )
