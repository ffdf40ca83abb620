"""CKKS kernel library with a multi-chiplet performance simulator.

Modules: modarith (primes, Barrett reduction, twiddles), polykernel
(reference and hierarchical NTT, automorphism, MAS), trivium (keystream),
ckks (the homomorphic routines), chipletsim (event-driven model),
analytic (closed forms), verify (oracle suites), cli.
"""

__version__ = "0.1.0"
