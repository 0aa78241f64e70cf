"""Numerics for the model knot solution of the reduced KW equations on the half-space."""
from .model import PHI1_SIGN, Group, ModelParams

__all__ = ["PHI1_SIGN", "Group", "ModelParams"]
