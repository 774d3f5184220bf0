"""Exception taxonomy shared by the library and the CLI.

CLI exit-code mapping:
    0  success
    1  invariant failure (verify checks, solver non-convergence)
    2  model-condition violation (existence sign condition, bad V data, lambda <= 0)
    3  I/O problems
"""


class ZhkError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class InvalidParameterError(ZhkError, ValueError):
    """Malformed or out-of-domain input (Im tau <= 0, n < 1, off-lattice vector, ...)."""

    exit_code = 2


class ModelConditionError(ZhkError):
    """A model-level condition is violated (sign condition for existence, lambda <= 0,
    V'(0) >= 0 or V''(0) <= 0, self-dual request where the operation is ill-posed)."""

    exit_code = 2


class ConvergenceError(ZhkError):
    """An iterative procedure failed to reach its tolerance (Newton, series truncation,
    quadrature refinement)."""

    exit_code = 1


class ResonanceError(ZhkError):
    """The pinned resolvent was requested at (n/b)chi within 1e-6 of a higher Landau
    level n(2m+1), m >= 1."""

    exit_code = 2


class InKernelError(ZhkError):
    """Resolvent right-hand side lies (numerically) in the kernel direction psi0."""

    exit_code = 2


class DegenerateBoundaryError(ZhkError):
    """Winding-number contour passes too close to a zero of the field."""

    exit_code = 1


class ConstraintViolationError(ZhkError):
    """Energy evaluation requested on a state violating the magnetic constraint."""

    exit_code = 1
