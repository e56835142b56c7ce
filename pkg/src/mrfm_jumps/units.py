"""Conversion between laboratory (SI) parameters and the dimensionless model.

Time is measured in units of the inverse cantilever angular frequency,
``tau = omega_c * t``, and the cantilever coordinate in units of the
zero-point length ``X0 = sqrt(hbar * omega_c / k_c)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

# CODATA 2018
ELECTRON_GYROMAGNETIC_RATIO = 1.76085963023e11  # rad s^-1 T^-1
HBAR = 1.054571817e-34  # J s
BOHR_MAGNETON = 9.2740100783e-24  # J/T


@dataclass(frozen=True)
class PhysicalParams:
    """Experimental inputs in SI units.

    Defaults are the OSCAR single-spin experiment: 6.6 kHz cantilever,
    k_c = 6e-4 N/m, B_1 = 0.3 mT, |dB_z/dx| = 4.3e5 T/m, 10 nm tip
    amplitude and a 1 pm random tip vibration.

    ``noise_field`` overrides the random-field amplitude directly (tesla);
    when it is ``None`` the amplitude is ``field_gradient *
    noise_vibration_amplitude``.
    """

    cantilever_frequency: float = 6.6e3
    spring_constant: float = 6e-4
    rf_field: float = 3e-4
    field_gradient: float = 4.3e5
    ct_amplitude: float = 10e-9
    noise_vibration_amplitude: float = 1e-12
    gyromagnetic_ratio: float = ELECTRON_GYROMAGNETIC_RATIO
    reduced_planck: float = HBAR
    bohr_magneton: float = BOHR_MAGNETON
    noise_field: float | None = None

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None and f.name == "noise_field":
                continue
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{f.name} must be a positive finite number, got {value!r}")

    @property
    def angular_frequency(self) -> float:
        return 2.0 * math.pi * self.cantilever_frequency

    @property
    def random_field(self) -> float:
        """Amplitude of the random z-field in tesla."""
        if self.noise_field is not None:
            return self.noise_field
        return self.field_gradient * self.noise_vibration_amplitude


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless constants of the jump model.

    Parameters
    ----------
    epsilon : float
        rf-field strength, gamma * B_1 / omega_c.
    eta : float
        Spin-cantilever coupling.
    delta_amp : float
        Amplitude of the telegraph random field.
    tau0 : float
        Mean time between telegraph kicks.
    dtau : float
        Half-width of the kick interval jitter, ``0 <= dtau <= tau0``.
    x_m : float
        Cantilever amplitude in units of X0.
    domega : float
        Relative cantilever frequency shift caused by the spin.
    """

    epsilon: float
    eta: float
    delta_amp: float
    tau0: float
    dtau: float
    x_m: float
    domega: float

    def __post_init__(self):
        for name in ("epsilon", "eta", "delta_amp", "tau0", "dtau", "x_m", "domega"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise ValueError(f"{name} must be a finite number, got {value!r}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.x_m <= 0:
            raise ValueError("x_m must be > 0")
        if self.tau0 <= 0:
            raise ValueError("tau0 must be > 0")
        for name in ("eta", "delta_amp", "domega"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0 <= self.dtau <= self.tau0:
            raise ValueError(f"dtau must lie in [0, tau0], got dtau={self.dtau}, tau0={self.tau0}")

    @property
    def tau_rabi(self) -> float:
        """Rabi period 2*pi/epsilon."""
        return 2.0 * math.pi / self.epsilon

    @classmethod
    def reference(cls, **overrides) -> "ModelParams":
        """Rounded reference constants with Delta=100, tau0=0.01, dtau=tau0/4."""
        values = dict(
            epsilon=1270.0,
            eta=0.078,
            delta_amp=100.0,
            tau0=0.01,
            dtau=0.0025,
            x_m=1.2e5,
            domega=4.2e-7,
        )
        values.update(overrides)
        return cls(**values)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["tau_rabi"] = self.tau_rabi
        return d


def quantum_units(phys: PhysicalParams) -> tuple[float, float]:
    """Return the zero-point length X0 (m) and momentum P0 (N s)."""
    x0 = math.sqrt(phys.reduced_planck * phys.angular_frequency / phys.spring_constant)
    return x0, phys.reduced_planck / x0


def to_dimensionless(
    phys: PhysicalParams, tau0: float | None = None, dtau: float | None = None
) -> ModelParams:
    """Convert laboratory parameters to :class:`ModelParams`.

    ``tau0`` defaults to the Rabi period and ``dtau`` to ``tau0 / 4``.
    """
    omega = phys.angular_frequency
    gamma = phys.gyromagnetic_ratio
    x0, _ = quantum_units(phys)
    epsilon = gamma * phys.rf_field / omega
    eta = gamma * math.sqrt(phys.reduced_planck / (phys.spring_constant * omega)) * phys.field_gradient / 2.0
    delta = gamma * phys.random_field / omega
    domega = 2.0 * phys.field_gradient * phys.bohr_magneton / (
        math.pi * phys.ct_amplitude * phys.spring_constant
    )
    if tau0 is None:
        tau0 = 2.0 * math.pi / epsilon
    if dtau is None:
        dtau = tau0 / 4.0
    return ModelParams(
        epsilon=epsilon,
        eta=eta,
        delta_amp=delta,
        tau0=tau0,
        dtau=dtau,
        x_m=phys.ct_amplitude / x0,
        domega=domega,
    )


def dimensionless_time_to_seconds(tau, phys: PhysicalParams):
    return tau / phys.angular_frequency


def seconds_to_dimensionless_time(t, phys: PhysicalParams):
    return t * phys.angular_frequency


# flat configuration keys -> PhysicalParams fields
PHYSICAL_KEYS = {
    "f_c_hz": "cantilever_frequency",
    "k_c_n_per_m": "spring_constant",
    "b1_tesla": "rf_field",
    "grad_t_per_m": "field_gradient",
    "x_m_meters": "ct_amplitude",
    "noise_amp_meters": "noise_vibration_amplitude",
    "noise_field_tesla": "noise_field",
    "gamma_rad_per_s_t": "gyromagnetic_ratio",
    "hbar_j_s": "reduced_planck",
    "mu_b_j_per_t": "bohr_magneton",
}


def physical_from_mapping(values: dict) -> PhysicalParams:
    """Build :class:`PhysicalParams` from flat configuration keys."""
    unknown = set(values) - set(PHYSICAL_KEYS)
    if unknown:
        raise KeyError(f"unknown physical keys: {sorted(unknown)}")
    return PhysicalParams(**{PHYSICAL_KEYS[k]: float(v) for k, v in values.items()})


def conversion_report(phys: PhysicalParams) -> dict:
    """Key-value summary of the conversion, SI inputs included."""
    x0, p0 = quantum_units(phys)
    model = to_dimensionless(phys)
    report = {f"{key}": getattr(phys, attr) for key, attr in PHYSICAL_KEYS.items()}
    report["noise_field_tesla"] = phys.random_field
    report.update(
        omega_c_rad_per_s=phys.angular_frequency,
        X0_m=x0,
        P0_n_s=p0,
        epsilon=model.epsilon,
        eta=model.eta,
        delta=model.delta_amp,
        x_m=model.x_m,
        domega=model.domega,
        tau_rabi=model.tau_rabi,
    )
    return report
