"""Self-adjoint extensions of singular Sturm-Liouville operators.

Endpoint classification, generalized boundary values, Friedrichs and
Krein-von Neumann extensions, and eigenvalues by shooting.
"""

__version__ = "0.1.0"

from .boundary import BoundaryData, BoundaryFrame, boundary_frame, boundary_values
from .classify import DeficiencyIndex, EndpointClass, SolutionPair, classify_endpoint, deficiency_index, principal_pair
from .coeffs import Bessel, BlackHole, Generic, Jacobi, SLProblem, eval_coefficients, make_problem
from .errors import (DeficiencyMismatch, IntegrationError, LimitPointError, MathematicalRefusal, NotBoundedBelow,
                     NotInMaximalDomain, NotStrictlyPositive, NumericalFailure, ParameterError, SLError)
from .extensions import (ExtensionSpec, PositivityReport, coupled, friedrichs, krein, no_conditions,
                         rk_from_null_basis, rk_from_principal, separated, strict_positivity_gate)
from .spectra import SpectralResult, TransferMatrix, characteristic, eigenvalues, kernel_dimension, transfer_matrix
