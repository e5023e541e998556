"""Three-peakon dynamics of the Degasperis-Procesi equation.

Modules: ``polycalc`` (polynomials, partial fractions, exponential sums),
``spectral`` (forward spectral map), ``dynamics`` (ODE integration),
``closedform`` (semi-analytic three-peakon solution), ``events``
(collisions and shocks), ``classify`` (mass signatures and the eigenvalue
portrait), ``verify`` (identity suite), ``io`` and ``cli``.
"""

from .errors import PeakonError
from .spectral import PeakonState

__all__ = ["PeakonError", "PeakonState"]
__version__ = "0.1.0"
