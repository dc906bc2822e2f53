"""qmarg: multiqubit state families, reduced density matrices, and
certificates for whether a marginal set pins down the global state."""

from qmarg._backend import KERNEL_BACKEND
from qmarg.policy import DEFAULT_POLICY, NumericPolicy, policy_with_tol

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "DEFAULT_POLICY", "NumericPolicy",
           "policy_with_tol", "__version__"]
