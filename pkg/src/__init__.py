"""
tqftkit
Exact finite and abelian TQFT invariants: Gauss sums, discriminant forms, pointed modular data,
surgery and anomaly invariants, finite gauge theory and finite path integrals
"""

__version__ = "0.1.0"
