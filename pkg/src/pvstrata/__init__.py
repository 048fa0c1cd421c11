"""Exact certification of the stratifications of two prehomogeneous vector spaces:
GL3 x GL3 x GL2 on Aff3 (x) Aff3 (x) Aff2 and GL6 x GL2 on Wedge2(Aff6) (x) Aff2."""

__version__ = "0.1.0"
