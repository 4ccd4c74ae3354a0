"""
cavtool layered-optics module.

Normal-incidence transfer matrices for planar dielectric stacks: Fresnel
coefficients, reflectance/transmittance/phase, standing-wave field
profiles, and quarter-wave Bragg mirror design.
"""

from .design import (
    MirrorDesign,
    bragg_layers,
    design_bragg_mirror,
    design_dual_band_mirror,
    stop_band_halfwidth,
)
from .field import Segment, field_at, field_profile, segments
from .transfer import (
    concatenate,
    fresnel_coefficients,
    incident_amplitudes,
    interface_matrix,
    layer_phase,
    propagation_matrix,
    reverse,
    spectrum,
    stack_response,
    system_matrix,
    with_media,
)

__all__ = [
    "MirrorDesign",
    "Segment",
    "bragg_layers",
    "concatenate",
    "design_bragg_mirror",
    "design_dual_band_mirror",
    "field_at",
    "field_profile",
    "fresnel_coefficients",
    "incident_amplitudes",
    "interface_matrix",
    "layer_phase",
    "propagation_matrix",
    "reverse",
    "segments",
    "spectrum",
    "stack_response",
    "stop_band_halfwidth",
    "system_matrix",
    "with_media",
]
