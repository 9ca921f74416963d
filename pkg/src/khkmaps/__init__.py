"""Kahan-Hirota-Kimura maps of planar vector fields: construction, invariant
fibrations, Moebius conjugates and exact verification of integrability claims."""

__version__ = "0.1.0"
