"""Tolerance-aware manufacturability assessment toolkit.

Spline-network binary classifier over parametric machining designs,
trained on synthetically generated data labeled by a design-for-
manufacturing rule engine, with attribution, spline-curve, and latent
views for design refinement.
"""

__version__ = "0.1.0"
