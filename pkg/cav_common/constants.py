"""
Versioned physical and design constants.

Everything here is echoed into report metadata, so a change to any value
must bump CONSTANTS_VERSION.
"""

from typing import Any

from scipy import constants as sc

CONSTANTS_VERSION = "1.0"

SPEED_OF_LIGHT = sc.c  # m/s

# Refractive indices near 603 nm
N_AIR = 1.0
N_DIAMOND = 2.41
N_SIO2 = 1.46
N_TA2O5 = 2.10

DEBYE_WALLER = 0.6  # GeV zero-phonon-line fraction
DESIGN_WAVELENGTH_NM = 603.0
EXCITATION_WAVELENGTH_NM = 532.0

# Emitter defaults used by the funneling simulation
EMITTER_LIFETIME_NS = 6.0
EMITTER_LINEWIDTH_THZ = 5.22
DIPOLE_ORIENTATION_FACTOR = 1.0  # in-plane dipole summed over both polarization modes

# Convergence settings
RESONANCE_PHASE_TOL = 1e-9  # rad
FIT_MAX_ITERATIONS = 200


def constants_metadata(overrides: dict[str, Any] | None = None) -> dict[str, Any]:
    """
    Return the constants block written into every report.

    Args:
        overrides: Config-level overrides, recorded alongside the defaults

    Returns:
        JSON-serializable dictionary
    """
    block: dict[str, Any] = {
        "version": CONSTANTS_VERSION,
        "speed_of_light_m_per_s": SPEED_OF_LIGHT,
        "n_air": N_AIR,
        "n_diamond": N_DIAMOND,
        "n_sio2": N_SIO2,
        "n_ta2o5": N_TA2O5,
        "debye_waller": DEBYE_WALLER,
        "design_wavelength_nm": DESIGN_WAVELENGTH_NM,
        "excitation_wavelength_nm": EXCITATION_WAVELENGTH_NM,
        "dipole_orientation_factor": DIPOLE_ORIENTATION_FACTOR,
    }
    if overrides:
        block["overrides"] = dict(sorted(overrides.items()))
    return block
