"""
Command implementations behind the cavtool CLI.

Each ``run_*`` function reads a CommandConfig, computes, writes its outputs
through a ResultStore and returns a CommandOutcome. The click layer only
parses options, maps errors to exit codes and echoes the summary.
"""

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from cav_cavity import (
    DispersionMap,
    cavity_spectral_params,
    dispersion_scan,
    gaussian_mode,
    mode_branches,
)
from cav_cavity.dispersion import DEFAULT_HALFWIDTH, TRANSVERSE_ORDERS
from cav_common.constants import (
    DESIGN_WAVELENGTH_NM,
    EMITTER_LIFETIME_NS,
    EXCITATION_WAVELENGTH_NM,
    constants_metadata,
)
from cav_common.errors import ConfigError, DegenerateRatesError, InvalidArgumentError
from cav_common.models import G2Model, SaturationParams
from cav_common.store import ResultStore
from cav_coupling import CouplingInputs, EmitterProperties, beta_depth_scan, build_report
from cav_emitter import PowerDependentRates, rates_to_g2_params
from cav_fitting import (
    FitResult,
    GaussianPeak,
    fit_g2,
    fit_gaussian_peaks,
    fit_rate_model,
    fit_saturation,
    g2_objective,
    gaussian_objective,
    poisson_weights,
    saturation_objective,
    synth_g2,
    synth_peaks,
    synth_saturation,
)
from cav_optics import field_profile, spectrum, stack_response
from cav_persistence import file_digest, read_columns

from . import __version__
from .config import CommandConfig, parse_grid, parse_mode

logger = logging.getLogger(__name__)

DEFAULT_BRANCH_MODES = ([15, 0], [15, 1], [16, 0], [16, 1])
DEFAULT_SPECTRUM = {"start": 450.0, "stop": 750.0, "step": 1.0}
FIT_KINDS = ("g2", "saturation", "peaks", "rates")
FIT_COLUMNS = {
    "g2": ("tau_ns", "g2"),
    "saturation": ("power_mW", "counts_per_s"),
    "peaks": ("position", "counts"),
}
SYNTH_KINDS = ("g2", "saturation", "peaks")


@dataclass
class CommandOutcome:
    """What a command wrote and whether its numerics converged."""

    outputs: list[str] = field(default_factory=list)
    summary: list[str] = field(default_factory=list)
    converged: bool = True


def _metadata(config: CommandConfig, name: str, seed: int) -> dict[str, Any]:
    """The provenance blocks written into every JSON report."""
    return {
        "constants": constants_metadata(config.constants),
        "command": {
            "name": name,
            "config_file": config.path.name,
            "config_sha256": file_digest(config.path),
            "seed": seed,
            "version": __version__,
        },
    }


def _finish(store: ResultStore, outcome: CommandOutcome) -> CommandOutcome:
    outcome.outputs = store.list_outputs()
    return outcome


# ============================================================================
# stack
# ============================================================================


def run_stack(config: CommandConfig, store: ResultStore, seed: int = 0) -> CommandOutcome:
    """Evaluate or design a stack; write its spectrum, field profile and report."""
    if ("stack" in config.data) == ("design" in config.data):
        raise ConfigError(f"{config.path}: give exactly one of 'stack' or 'design'")
    design = None
    if "design" in config.data:
        design = config.design(config.data["design"])
        stack = design.stack
    else:
        stack = config.stack(config.data["stack"], "stack")
        if stack is None:
            raise ConfigError(f"{config.path}: 'stack' must not be null")

    wavelengths = config.grid("spectrum_nm", DEFAULT_SPECTRUM)
    curves = spectrum(stack, wavelengths)
    store.write_csv(
        "spectrum.csv",
        ["wavelength_nm", "R", "T", "phase_rad"],
        zip(curves["wavelength"], curves["R"], curves["T"], curves["phase"], strict=True),
    )

    field_config = config.get("field", {})
    field_wavelength = float(field_config.get("wavelength_nm", DESIGN_WAVELENGTH_NM))
    profile = field_profile(
        stack,
        field_wavelength,
        float(field_config.get("sampling_nm", 1.0)),
        incident_extent=field_config.get("incident_extent_nm"),
        exit_extent=field_config.get("exit_extent_nm"),
    )
    store.write_csv(
        "field.csv",
        ["z_nm", "intensity"],
        profile.rows(),
    )

    report_wavelengths = config.get(
        "report_wavelengths_nm", [DESIGN_WAVELENGTH_NM, EXCITATION_WAVELENGTH_NM]
    )
    responses = {
        format(float(wl), "g"): stack_response(stack, float(wl)).to_dict() for wl in report_wavelengths
    }
    report = {
        **_metadata(config, "stack", seed),
        "stack": stack.to_dict(),
        "design": None if design is None else design.to_dict(),
        "responses": responses,
        "field_wavelength_nm": field_wavelength,
        "interfaces": [
            {"position_nm": mark.position, "intensity": mark.intensity, "kind": mark.kind}
            for mark in profile.interfaces
        ],
    }
    store.write_json("stack.json", report)

    outcome = CommandOutcome()
    for key, response in responses.items():
        outcome.summary.append(f"T({key} nm) = {response['T']:.6g}")
    if design is not None:
        outcome.summary.append(f"{design.pairs} pairs, {design.termination}-terminated")
    return _finish(store, outcome)


# ============================================================================
# dispersion
# ============================================================================


def _branch_rows(branches: Mapping, wavelengths: np.ndarray) -> list[tuple]:
    rows = []
    for mode, gaps in branches.items():
        for wavelength, gap in zip(wavelengths, gaps, strict=True):
            if np.isfinite(gap):
                rows.append((mode.longitudinal, mode.transverse_order, float(wavelength), float(gap)))
    return rows


def run_dispersion(
    config: CommandConfig, store: ResultStore, seed: int = 0, threads: int = 1
) -> CommandOutcome:
    """Resonance map over air gap × wavelength plus fitted branch curves."""
    cavity = config.cavity()
    mode = gaussian_mode(cavity.geometry)
    air_gaps = config.grid("air_gaps_um")
    wavelengths = config.grid("wavelengths_nm")
    orders = tuple(int(q) for q in config.get("transverse_orders", TRANSVERSE_ORDERS))
    include_gouy = bool(config.get("include_gouy", True))

    result: DispersionMap = dispersion_scan(
        cavity,
        air_gaps,
        wavelengths,
        transverse_orders=orders,
        halfwidth=float(config.get("halfwidth_um", DEFAULT_HALFWIDTH)),
        include_gouy=include_gouy,
        threads=threads,
    )
    store.write_csv("dispersion_map.csv", ["air_gap_um", "lambda_nm", "value"], result.rows())
    store.write_csv(
        "resonances.csv",
        ["m", "q", "lambda_nm", "air_gap_um"],
        (
            (r.mode.longitudinal, r.mode.transverse_order, r.wavelength, r.air_gap)
            for r in result.resonances
        ),
    )

    modes = [parse_mode(spec) for spec in config.get("modes", DEFAULT_BRANCH_MODES)]
    branches = mode_branches(cavity, modes, wavelengths, include_gouy)
    store.write_csv("branches.csv", ["m", "q", "lambda_nm", "air_gap_um"], _branch_rows(branches, wavelengths))

    try:
        spectral = cavity_spectral_params(cavity).to_dict()
    except InvalidArgumentError as e:
        logger.warning(f"Skipping spectral parameters: {e}")
        spectral = None
    summary_branches = {}
    for branch_mode, gaps in branches.items():
        finite = gaps[np.isfinite(gaps)]
        summary_branches[branch_mode.label()] = {
            "points": int(finite.size),
            "min_air_gap_um": float(finite.min()) if finite.size else None,
            "max_air_gap_um": float(finite.max()) if finite.size else None,
        }
    store.write_json(
        "dispersion.json",
        {
            **_metadata(config, "dispersion", seed),
            "geometry": cavity.geometry.to_dict(),
            "gaussian_mode": mode.to_dict(),
            "spectral_params": spectral,
            "grid": {"air_gaps": int(air_gaps.size), "wavelengths": int(wavelengths.size)},
            "resonance_count": len(result.resonances),
            "branches": summary_branches,
        },
    )
    outcome = CommandOutcome(
        summary=[
            f"{len(result.resonances)} resonances on a {air_gaps.size}x{wavelengths.size} grid",
            f"waist diameter {2 * mode.waist_radius:.4g} um",
        ]
    )
    return _finish(store, outcome)


# ============================================================================
# fit
# ============================================================================


def _weights(config: CommandConfig, y: np.ndarray) -> np.ndarray | None:
    scheme = config.get("weights", "uniform")
    if scheme == "uniform":
        return None
    if scheme == "poisson":
        return poisson_weights(y)
    raise ConfigError(f"{config.path}: weights must be 'uniform' or 'poisson', got {scheme!r}")


def _read_xy(config: CommandConfig, kind: str) -> tuple[np.ndarray, np.ndarray]:
    config.require("data")
    columns = config.get("columns", {})
    x_name = columns.get("x", FIT_COLUMNS[kind][0])
    y_name = columns.get("y", FIT_COLUMNS[kind][1])
    data = read_columns(config.resolve(config.data["data"]), [x_name, y_name])
    return data[x_name], data[y_name]


def _fit_curve(
    config: CommandConfig, kind: str
) -> tuple[FitResult, dict[str, Any], np.ndarray, np.ndarray, np.ndarray]:
    """Run a g2, saturation or peaks fit; returns result, model, x, y and prediction."""
    x, y = _read_xy(config, kind)
    weights = _weights(config, y)
    initial = config.get("initial")
    if kind == "g2":
        model, result = fit_g2(
            x,
            y,
            weights=weights,
            initial=None if initial is None else G2Model.from_dict(initial),
            power_label=str(config.get("label", "")),
        )
        return result, model.to_dict(), x, y, g2_objective(model.as_vector(), x)
    if kind == "saturation":
        params, result = fit_saturation(
            x,
            y,
            weights=weights,
            initial=None if initial is None else SaturationParams.from_dict(initial),
            fit_background=bool(config.get("fit_background", True)),
        )
        predicted = saturation_objective(np.array([params.I_inf, params.P_sat, params.c_bg]), x)
        return result, params.to_dict(), x, y, predicted
    peaks, result = fit_gaussian_peaks(x, y, int(config.get("n_peaks", 1)), weights=weights)
    model = {
        "offset": float(result.params[0]),
        "peaks": [dict(peak.to_dict(), fwhm=peak.fwhm) for peak in peaks],
    }
    return result, model, x, y, gaussian_objective(result.params, x)


def _fit_rates(config: CommandConfig, store: ResultStore) -> tuple[FitResult, dict[str, Any]]:
    config.require("powers_mW", "g2_params", "initial")
    powers = np.asarray(config.data["powers_mW"], dtype=float)
    models = [G2Model.from_dict(item) for item in config.data["g2_params"]]
    k21 = float(config.get("k21", 1 / (float(config.get("lifetime_ns", EMITTER_LIFETIME_NS)) * 1e-9)))
    initial = PowerDependentRates.from_dict({"k21": k21, **config.data["initial"]})
    fitted, result = fit_rate_model(
        powers,
        models,
        k21,
        initial,
        fit_shelving_slope=bool(config.get("fit_shelving_slope", True)),
        fit_deshelving_slope=bool(config.get("fit_deshelving_slope", False)),
    )
    rows = []
    for power, observed in zip(powers, models, strict=True):
        try:
            predicted = rates_to_g2_params(fitted.at(float(power)))
        except (InvalidArgumentError, DegenerateRatesError):
            predicted = (np.nan, np.nan, np.nan)
        observed_values = (observed.a, observed.tau1, observed.tau2)
        for name, obs, pred in zip(("a", "tau1_ns", "tau2_ns"), observed_values, predicted, strict=True):
            rows.append((float(power), name, obs, pred, obs - pred))
    store.write_csv("residuals_rates.csv", ["power_mW", "parameter", "observed", "model", "residual"], rows)
    return result, fitted.to_dict()


def run_fit(config: CommandConfig, store: ResultStore, seed: int = 0) -> CommandOutcome:
    """Fit measured data; a non-converged fit still writes its report."""
    config.require("kind")
    kind = config.data["kind"]
    if kind not in FIT_KINDS:
        raise ConfigError(f"{config.path}: kind must be one of {', '.join(FIT_KINDS)}, got {kind!r}")

    provenance: dict[str, Any] = {}
    if kind == "rates":
        result, model = _fit_rates(config, store)
    else:
        result, model, x, y, predicted = _fit_curve(config, kind)
        store.write_csv(
            f"residuals_{kind}.csv",
            ["x", "observed", "model", "residual"],
            zip(x, y, predicted, y - predicted, strict=True),
        )
        data_path = config.resolve(config.data["data"])
        provenance = {"file": data_path.name, "sha256": file_digest(data_path), "points": int(x.size)}

    store.write_json(
        f"fit_{kind}.json",
        {**_metadata(config, "fit", seed), "kind": kind, "fit": result.to_dict(), "model": model, "data": provenance},
    )
    outcome = CommandOutcome(converged=result.converged)
    outcome.summary.append(
        f"{kind} fit {'converged' if result.converged else 'did NOT converge'}: {result.message}"
    )
    for name, value, error in zip(result.names, result.params, result.errors, strict=True):
        outcome.summary.append(f"  {name} = {value:.6g} +/- {error:.2g}")
    outcome.summary.extend(f"  warning: {warning}" for warning in result.warnings)
    return _finish(store, outcome)


# ============================================================================
# report
# ============================================================================


def run_report(config: CommandConfig, store: ResultStore, seed: int = 0) -> CommandOutcome:
    """Derived-quantity chain with first-order and optional Monte Carlo intervals."""
    config.require("inputs")
    inputs = CouplingInputs.from_dict(config.data["inputs"], xi=config.constant("debye_waller"))
    report = build_report(inputs)
    data: dict[str, Any] = {
        **_metadata(config, "report", seed),
        "inputs": {name: quantity.to_dict() for name, quantity in sorted(inputs.as_inputs().items())},
        "report": report.to_dict(),
    }
    if config.get("monte_carlo", False):
        samples = int(config.get("samples", 10_000))
        data["monte_carlo"] = build_report(inputs, monte_carlo=True, samples=samples, seed=seed).to_dict()
        data["monte_carlo_samples"] = samples
    store.write_json("coupling_report.json", data)

    outcome = CommandOutcome()
    for name in ("beta", "purcell", "enhancement_ratio", "quantum_efficiency", "lifetime_reduction"):
        quantity = getattr(report, name)
        outcome.summary.append(
            f"{name} = {quantity.value:.4g} +{quantity.sigma_plus:.2g}/-{quantity.sigma_minus:.2g}"
        )
    return _finish(store, outcome)


# ============================================================================
# beta-scan
# ============================================================================


def run_beta_scan(
    config: CommandConfig, store: ResultStore, seed: int = 0, threads: int = 1
) -> CommandOutcome:
    """β over membrane thickness and emitter depth, with depth-spread bands."""
    cavity = config.cavity()
    thicknesses = config.grid("thicknesses_nm")
    depths = config.grid("depths_nm")
    mode = parse_mode(config.get("mode", [15, 0]))
    emitter = EmitterProperties.from_dict(
        {"xi": config.constant("debye_waller"), **config.get("emitter", {})}
    )
    band = config.get("band", {})
    center = float(band.get("center_nm", (depths.min() + depths.max()) / 2))
    sigma = float(band.get("sigma_nm", max((depths.max() - depths.min()) / 4, 1e-9)))

    scan = beta_depth_scan(
        cavity,
        thicknesses,
        depths,
        mode=mode,
        emitter=emitter,
        implanted_face=str(config.get("implanted_face", "air")),
        sampling=float(config.get("sampling_nm", 1.0)),
        threads=threads,
    )
    bands = scan.bands(center, sigma)
    store.write_csv("beta_scan.csv", ["t_d_nm", "depth_nm", "beta"], scan.rows())
    band_keys = list(bands[0])
    store.write_csv("beta_bands.csv", band_keys, ([row[key] for key in band_keys] for row in bands))

    column = int(np.argmin(np.abs(scan.depths - center)))
    store.write_json(
        "beta_scan.json",
        {
            **_metadata(config, "beta-scan", seed),
            "mode": mode.label(),
            "emitter": emitter.to_dict(),
            "implanted_face": scan.implanted_face,
            "band": {"center_nm": center, "sigma_nm": sigma},
            "air_gaps_um": [float(gap) for gap in scan.air_gaps],
            "peak_thicknesses_nm": [float(t) for t in scan.peak_thicknesses(column)],
            "antinode_thicknesses_nm": [float(t) for t in scan.antinode_thicknesses()],
            "beta_min": float(scan.beta.min()),
            "beta_max": float(scan.beta.max()),
        },
    )
    outcome = CommandOutcome(
        summary=[
            f"{thicknesses.size} thicknesses x {depths.size} depths",
            f"beta in [{scan.beta.min():.4%}, {scan.beta.max():.4%}]",
        ]
    )
    return _finish(store, outcome)


# ============================================================================
# synth
# ============================================================================


def _synth_dataset(dataset: Mapping[str, Any], rng: np.random.Generator) -> tuple[list[str], list[tuple]]:
    kind = dataset.get("kind")
    if kind not in SYNTH_KINDS:
        raise ConfigError(f"synthetic dataset kind must be one of {', '.join(SYNTH_KINDS)}, got {kind!r}")
    noise = float(dataset.get("noise", 0.01))
    if kind == "g2":
        if "truth" not in dataset or "taus_ns" not in dataset:
            raise ConfigError("invalid g2 dataset", missing=[k for k in ("truth", "taus_ns") if k not in dataset])
        x = parse_grid(dataset["taus_ns"], "taus_ns")
        y = synth_g2(G2Model.from_dict(dataset["truth"]), x, noise, rng)
    elif kind == "saturation":
        if "truth" not in dataset or "powers_mW" not in dataset:
            raise ConfigError(
                "invalid saturation dataset", missing=[k for k in ("truth", "powers_mW") if k not in dataset]
            )
        x = parse_grid(dataset["powers_mW"], "powers_mW")
        y = synth_saturation(SaturationParams.from_dict(dataset["truth"]), x, noise, rng)
    else:
        if "peaks" not in dataset or "positions" not in dataset:
            raise ConfigError(
                "invalid peaks dataset", missing=[k for k in ("peaks", "positions") if k not in dataset]
            )
        x = parse_grid(dataset["positions"], "positions")
        try:
            peaks = [GaussianPeak(float(p["center"]), float(p["width"]), float(p["amplitude"])) for p in dataset["peaks"]]
        except (KeyError, TypeError, ValueError):
            raise ConfigError("each synthetic peak needs center, width and amplitude")
        y = synth_peaks(peaks, x, float(dataset.get("offset", 0.0)), noise, rng)
    return list(FIT_COLUMNS[kind]), list(zip(x, y, strict=True))


def run_synth(config: CommandConfig, store: ResultStore, seed: int = 0) -> CommandOutcome:
    """Seeded synthetic datasets in the column layout the fit command reads."""
    config.require("datasets")
    datasets = config.data["datasets"]
    if not isinstance(datasets, list) or not datasets or not all(isinstance(d, Mapping) for d in datasets):
        raise ConfigError(f"{config.path}: 'datasets' must be a non-empty list of objects")
    names = [str(d.get("file", f"{d.get('kind')}.csv")) for d in datasets]
    if len(set(names)) != len(names):
        raise ConfigError(f"{config.path}: synthetic dataset file names must be unique")

    manifest = []
    for index, (dataset, name) in enumerate(zip(datasets, names, strict=True)):
        rng = np.random.default_rng([seed, index])
        header, rows = _synth_dataset(dataset, rng)
        store.write_csv(name, header, rows)
        manifest.append({"file": name, "kind": dataset["kind"], "rows": len(rows), "parameters": dataset})
    store.write_json("synth.json", {**_metadata(config, "synth", seed), "datasets": manifest})
    return _finish(store, CommandOutcome(summary=[f"{len(manifest)} synthetic datasets, seed {seed}"]))
