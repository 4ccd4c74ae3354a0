"""
Domain models shared by the cavtool packages.

These are plain value objects: the optics, cavity, emitter and coupling
packages compute with them, and the persistence layer reads and writes them.
Units are fixed per field (nm for optical thicknesses and wavelengths, µm for
cavity lengths, 1/s for rates, ns for correlation times, mW for power).
"""

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ConfigError, InvalidArgumentError
from .quantity import Quantity


def _require(data: dict[str, Any], keys: list[str], what: str) -> None:
    missing = [key for key in keys if key not in data]
    if missing:
        raise ConfigError(f"invalid {what}", missing=missing)


@dataclass(frozen=True, eq=False)
class IndexTable:
    """
    Tabulated complex refractive index, linearly interpolated in wavelength.

    Values outside the table are clamped to the end points.
    """

    wavelengths_nm: np.ndarray
    n_real: np.ndarray
    n_imag: np.ndarray

    def __post_init__(self) -> None:
        wl = np.asarray(self.wavelengths_nm, dtype=float)
        if wl.ndim != 1 or wl.size < 2 or np.any(np.diff(wl) <= 0):
            raise InvalidArgumentError("index table wavelengths must be strictly increasing")
        if np.any(np.asarray(self.n_real) <= 0):
            raise InvalidArgumentError("index table real parts must be positive")
        if np.any(np.asarray(self.n_imag) < 0):
            raise InvalidArgumentError("index table imaginary parts must be non-negative")

    def at(self, wavelength: float) -> complex:
        re = np.interp(wavelength, self.wavelengths_nm, self.n_real)
        im = np.interp(wavelength, self.wavelengths_nm, self.n_imag)
        return complex(re, im)

    def to_dict(self) -> dict[str, Any]:
        return {
            "wavelengths_nm": [float(x) for x in self.wavelengths_nm],
            "n_real": [float(x) for x in self.n_real],
            "n_imag": [float(x) for x in self.n_imag],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "IndexTable":
        _require(data, ["wavelengths_nm", "n_real"], "index table")
        n_real = np.asarray(data["n_real"], dtype=float)
        return cls(
            wavelengths_nm=np.asarray(data["wavelengths_nm"], dtype=float),
            n_real=n_real,
            n_imag=np.asarray(data.get("n_imag", np.zeros_like(n_real)), dtype=float),
        )


Index = complex | float | IndexTable


def index_at(index: Index, wavelength: float) -> complex:
    """Resolve a constant or tabulated index at one wavelength."""
    if isinstance(index, IndexTable):
        return index.at(wavelength)
    return complex(index)


def _check_index(index: Index, what: str) -> None:
    if isinstance(index, IndexTable):
        return
    n = complex(index)
    if n.real <= 0:
        raise InvalidArgumentError(f"{what} must have a positive real part, got {n}")
    if n.imag < 0:
        raise InvalidArgumentError(f"{what} must have a non-negative imaginary part, got {n}")


def _index_to_dict(index: Index) -> Any:
    if isinstance(index, IndexTable):
        return {"table": index.to_dict()}
    n = complex(index)
    return {"n_real": n.real, "n_imag": n.imag}


def _index_from_dict(data: Any) -> Index:
    if isinstance(data, (int, float)):
        return complex(data)
    if "table" in data:
        return IndexTable.from_dict(data["table"])
    return complex(float(data["n_real"]), float(data.get("n_imag", 0.0)))


@dataclass(frozen=True)
class Layer:
    """A homogeneous planar film."""

    thickness: float  # nm
    refractive_index: Index  # complex, or tabulated against wavelength

    def __post_init__(self) -> None:
        if not np.isfinite(self.thickness) or self.thickness < 0:
            raise InvalidArgumentError(f"layer thickness must be >= 0 nm, got {self.thickness}")
        _check_index(self.refractive_index, "layer index")

    def index_at(self, wavelength: float) -> complex:
        return index_at(self.refractive_index, wavelength)

    def to_dict(self) -> dict[str, Any]:
        return {"thickness_nm": self.thickness, **_index_to_dict(self.refractive_index)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Layer":
        _require(data, ["thickness_nm"], "layer")
        if "n_real" not in data and "table" not in data:
            raise ConfigError("invalid layer", missing=["n_real"])
        return cls(float(data["thickness_nm"]), _index_from_dict(data))


@dataclass(frozen=True)
class LayerStack:
    """
    Ordered films between a semi-infinite incident medium and an exit medium.

    Layers are listed from the incident side. An ``exit_medium_index`` of
    None terminates the stack on a perfect electric conductor.
    """

    incident_medium_index: Index
    layers: tuple[Layer, ...] = ()
    exit_medium_index: Index | None = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(self.layers))
        _check_index(self.incident_medium_index, "incident medium index")
        if self.exit_medium_index is not None:
            _check_index(self.exit_medium_index, "exit medium index")

    @property
    def total_thickness(self) -> float:
        return float(sum(layer.thickness for layer in self.layers))

    @property
    def is_lossless(self) -> bool:
        """True when every constant index is real (tabulated media are checked per wavelength)."""
        media = [self.incident_medium_index, *(layer.refractive_index for layer in self.layers)]
        if self.exit_medium_index is not None:
            media.append(self.exit_medium_index)
        for medium in media:
            if isinstance(medium, IndexTable):
                if np.any(medium.n_imag != 0):
                    return False
            elif complex(medium).imag != 0:
                return False
        return True

    def to_dict(self) -> dict[str, Any]:
        return {
            "incident_index": _index_to_dict(self.incident_medium_index),
            "exit_index": None
            if self.exit_medium_index is None
            else _index_to_dict(self.exit_medium_index),
            "layers": [layer.to_dict() for layer in self.layers],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "LayerStack":
        _require(data, ["incident_index", "exit_index", "layers"], "stack")
        exit_index = data["exit_index"]
        return cls(
            incident_medium_index=_index_from_dict(data["incident_index"]),
            layers=tuple(Layer.from_dict(item) for item in data["layers"]),
            exit_medium_index=None if exit_index is None else _index_from_dict(exit_index),
        )


@dataclass(frozen=True)
class StackResponse:
    """Reflection and transmission of a stack at one wavelength."""

    r: complex
    t: complex
    R: float
    T: float
    phase_on_reflection: float  # rad, principal branch

    def to_dict(self) -> dict[str, Any]:
        return {
            "R": self.R,
            "T": self.T,
            "phase_on_reflection_rad": self.phase_on_reflection,
            "r_real": self.r.real,
            "r_imag": self.r.imag,
        }


@dataclass(frozen=True)
class InterfaceMark:
    """Field intensity and standing-wave character at one interface."""

    position: float  # nm
    intensity: float
    kind: str  # "node", "antinode" or "neither"


@dataclass(frozen=True, eq=False)
class FieldProfile:
    """
    Sampled |E(z)|² along the stack axis.

    Position 0 is the first interface; the incident medium occupies z < 0.
    ``index`` holds the real refractive index at each sample for ε = n²
    weighting.
    """

    positions: np.ndarray  # nm
    intensity: np.ndarray
    index: np.ndarray
    interfaces: tuple[InterfaceMark, ...] = field(default_factory=tuple)

    def intensity_at(self, position: float) -> float:
        return float(np.interp(position, self.positions, self.intensity))

    def scaled(self, factor: float) -> "FieldProfile":
        return FieldProfile(
            self.positions,
            self.intensity * factor,
            self.index,
            tuple(
                InterfaceMark(mark.position, mark.intensity * factor, mark.kind)
                for mark in self.interfaces
            ),
        )

    def rows(self) -> list[tuple[float, float]]:
        return [(float(z), float(i)) for z, i in zip(self.positions, self.intensity, strict=True)]


@dataclass(frozen=True)
class CavityGeometry:
    """Plano-concave cavity with a membrane bonded to the flat mirror."""

    radius_of_curvature: float  # µm
    air_gap: float  # µm, fiber mirror to diamond surface
    membrane_thickness: float  # nm
    membrane_index: float
    emitter_depth: float  # nm, measured from the mirror-diamond interface
    wavelength: float  # nm

    def __post_init__(self) -> None:
        if self.air_gap <= 0:
            raise InvalidArgumentError(f"air gap must be positive, got {self.air_gap} um")
        if self.radius_of_curvature <= 0:
            raise InvalidArgumentError(
                f"radius of curvature must be positive, got {self.radius_of_curvature} um"
            )
        if self.membrane_thickness < 0:
            raise InvalidArgumentError(
                f"membrane thickness must be >= 0, got {self.membrane_thickness} nm"
            )
        if self.membrane_index <= 0:
            raise InvalidArgumentError(f"membrane index must be positive, got {self.membrane_index}")
        if not 0 <= self.emitter_depth <= self.membrane_thickness:
            raise InvalidArgumentError(
                f"emitter depth {self.emitter_depth} nm lies outside the "
                f"{self.membrane_thickness} nm membrane"
            )
        if self.wavelength <= 0:
            raise InvalidArgumentError(f"wavelength must be positive, got {self.wavelength} nm")

    @property
    def equivalent_length(self) -> float:
        """Air gap plus the membrane thickness reduced by its index (µm)."""
        return self.air_gap + self.membrane_thickness / self.membrane_index * 1e-3

    def to_dict(self) -> dict[str, Any]:
        return {
            "R_um": self.radius_of_curvature,
            "air_gap_um": self.air_gap,
            "t_d_nm": self.membrane_thickness,
            "n_d": self.membrane_index,
            "emitter_depth_nm": self.emitter_depth,
            "lambda_nm": self.wavelength,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CavityGeometry":
        _require(
            data,
            ["R_um", "air_gap_um", "t_d_nm", "n_d", "emitter_depth_nm", "lambda_nm"],
            "geometry",
        )
        return cls(
            radius_of_curvature=float(data["R_um"]),
            air_gap=float(data["air_gap_um"]),
            membrane_thickness=float(data["t_d_nm"]),
            membrane_index=float(data["n_d"]),
            emitter_depth=float(data["emitter_depth_nm"]),
            wavelength=float(data["lambda_nm"]),
        )


@dataclass(frozen=True, order=True)
class ModeIndex:
    """Longitudinal order m and transverse order q = n_x + n_y."""

    longitudinal: int
    transverse_order: int = 0

    def __post_init__(self) -> None:
        if self.longitudinal < 1:
            raise InvalidArgumentError(f"longitudinal order must be >= 1, got {self.longitudinal}")
        if self.transverse_order < 0:
            raise InvalidArgumentError(
                f"transverse order must be >= 0, got {self.transverse_order}"
            )

    def label(self) -> str:
        return f"m{self.longitudinal}_q{self.transverse_order}"


@dataclass(frozen=True)
class GaussianMode:
    waist_radius: float  # µm
    rayleigh_range: float  # µm
    gouy_phase_per_pass: float  # rad
    waist_position: float  # µm from the flat mirror

    def to_dict(self) -> dict[str, Any]:
        return {
            "waist_radius_um": self.waist_radius,
            "waist_diameter_um": 2 * self.waist_radius,
            "rayleigh_range_um": self.rayleigh_range,
            "gouy_phase_per_pass_rad": self.gouy_phase_per_pass,
            "waist_position_um": self.waist_position,
        }


@dataclass(frozen=True)
class CavitySpectralParams:
    finesse: float
    fsr: float  # THz
    linewidth_fwhm: float  # GHz
    effective_length: float  # µm

    def to_dict(self) -> dict[str, Any]:
        return {
            "finesse": self.finesse,
            "fsr_THz": self.fsr,
            "linewidth_fwhm_GHz": self.linewidth_fwhm,
            "effective_length_um": self.effective_length,
        }


@dataclass(frozen=True)
class ThreeLevelRates:
    """Transition rates among ground (1), excited (2) and dark (3) states, in 1/s."""

    k12: float  # pump
    k21: float  # radiative decay
    k23: float  # shelving
    k31: float  # deshelving

    def __post_init__(self) -> None:
        for name in ("k12", "k21", "k23", "k31"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise InvalidArgumentError(f"{name} must be a finite rate >= 0, got {value}")
        if self.k21 <= 0:
            raise InvalidArgumentError(f"k21 must be positive, got {self.k21}")

    def scaled(self, factor: float) -> "ThreeLevelRates":
        return ThreeLevelRates(
            self.k12 * factor, self.k21 * factor, self.k23 * factor, self.k31 * factor
        )

    def to_dict(self) -> dict[str, Any]:
        return {"k12": self.k12, "k21": self.k21, "k23": self.k23, "k31": self.k31}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ThreeLevelRates":
        _require(data, ["k12", "k21", "k23", "k31"], "rates")
        return cls(float(data["k12"]), float(data["k21"]), float(data["k23"]), float(data["k31"]))


@dataclass(frozen=True)
class G2Model:
    """Parameters of the background-diluted autocorrelation."""

    sigma: float  # S/(S+B)
    a: float  # bunching amplitude
    tau1: float  # ns, antibunching time
    tau2: float  # ns, bunching time

    def __post_init__(self) -> None:
        if not 0 < self.sigma <= 1:
            raise InvalidArgumentError(f"sigma must lie in (0, 1], got {self.sigma}")
        if self.a < 0:
            raise InvalidArgumentError(f"bunching amplitude must be >= 0, got {self.a}")
        if self.tau1 <= 0 or self.tau2 <= 0:
            raise InvalidArgumentError(
                f"correlation times must be positive, got {self.tau1}, {self.tau2}"
            )

    def as_vector(self) -> np.ndarray:
        return np.array([self.sigma, self.a, self.tau1, self.tau2])

    def to_dict(self) -> dict[str, Any]:
        return {"sigma": self.sigma, "a": self.a, "tau1_ns": self.tau1, "tau2_ns": self.tau2}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "G2Model":
        _require(data, ["sigma", "a", "tau1_ns", "tau2_ns"], "g2 model")
        return cls(
            float(data["sigma"]), float(data["a"]), float(data["tau1_ns"]), float(data["tau2_ns"])
        )


@dataclass(frozen=True)
class SaturationParams:
    I_inf: float  # counts/s
    P_sat: float  # mW
    c_bg: float = 0.0  # counts/(s mW)

    def __post_init__(self) -> None:
        if self.I_inf < 0:
            raise InvalidArgumentError(f"I_inf must be >= 0, got {self.I_inf}")
        if self.P_sat <= 0:
            raise InvalidArgumentError(f"P_sat must be positive, got {self.P_sat}")
        if self.c_bg < 0:
            raise InvalidArgumentError(f"c_bg must be >= 0, got {self.c_bg}")

    def to_dict(self) -> dict[str, Any]:
        return {"I_inf": self.I_inf, "P_sat_mW": self.P_sat, "c_bg": self.c_bg}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SaturationParams":
        _require(data, ["I_inf", "P_sat_mW"], "saturation parameters")
        return cls(float(data["I_inf"]), float(data["P_sat_mW"]), float(data.get("c_bg", 0.0)))


@dataclass(frozen=True)
class PopulationState:
    p_ground: float
    p_excited: float
    p_dark: float

    def __post_init__(self) -> None:
        total = self.p_ground + self.p_excited + self.p_dark
        if abs(total - 1.0) > 1e-9:
            raise InvalidArgumentError(f"populations must sum to 1, got {total}")

    def as_vector(self) -> np.ndarray:
        return np.array([self.p_ground, self.p_excited, self.p_dark])

    def to_dict(self) -> dict[str, Any]:
        return {"p_ground": self.p_ground, "p_excited": self.p_excited, "p_dark": self.p_dark}


@dataclass(frozen=True)
class CouplingReport:
    """Derived emitter-cavity figures, each with its propagated interval."""

    free_rate: Quantity  # photons/s
    cavity_rate: Quantity  # photons/s
    beta: Quantity
    purcell: Quantity
    spectral_density_free: Quantity  # photons/(s GHz)
    spectral_density_cav: Quantity  # photons/(s GHz)
    enhancement_ratio: Quantity
    quantum_efficiency: Quantity
    lifetime_reduction: Quantity
    zpl_fraction_enhanced: Quantity

    def to_dict(self) -> dict[str, Any]:
        return {
            "free_rate": self.free_rate.to_dict(),
            "cavity_rate": self.cavity_rate.to_dict(),
            "beta": self.beta.to_dict(),
            "purcell": self.purcell.to_dict(),
            "spectral_density_free": self.spectral_density_free.to_dict(),
            "spectral_density_cav": self.spectral_density_cav.to_dict(),
            "enhancement_ratio": self.enhancement_ratio.to_dict(),
            "quantum_efficiency": self.quantum_efficiency.to_dict(),
            "lifetime_reduction": self.lifetime_reduction.to_dict(),
            "zpl_fraction_enhanced": self.zpl_fraction_enhanced.to_dict(),
        }
