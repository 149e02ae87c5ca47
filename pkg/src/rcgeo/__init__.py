"""Numerical Riemann-Cartan geometry engine.

Evaluates moving-frame ambient geometries (flat metric-compatible
connections with torsion), hypersurface invariants (second fundamental
form, Weingarten map, Gauss map), tensor calculus on the surface, and a
catalog of machine-checked structural identities relating them.
"""

__version__ = "0.1.0"
