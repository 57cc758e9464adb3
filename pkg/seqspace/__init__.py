"""Seqspace - Norms, duality and contractive projections in Lorentz and Orlicz sequence spaces"""

__version__ = "0.1.0"
