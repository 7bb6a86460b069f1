"""Numerical laboratory for systolically free metric families.

The package constructs an explicit family of metrics on the cylinder
T^2 x [0, 2j] whose two-dimensional stable mass grows like j^2 while its
volume grows like j, assembles the family into closed 3- and 4-tori, and
verifies the resulting systolic-freedom estimates with independent
discrete oracles (lattice enumeration, quadrature, linear programming).
"""

__version__ = "0.1.0"
