"""Matrix-weight machinery on dyadic grids.

Young/Orlicz norms, shifted dyadic grids, reducing operators, matrix weight
constants (A_p, A_{p,q}, Orlicz bumps), the associated maximal / averaging /
sparse / fractional-integral operators, and a verification harness that checks
the weighted norm inequalities numerically at desk scale.
"""

from .backend import backend_name

__version__ = "0.1.0"

__all__ = ["backend_name", "__version__"]
