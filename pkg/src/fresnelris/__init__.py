"""Location-driven beamforming for near-field RIS links via Fresnel-zone geometry."""

__version__ = "0.1.0"
