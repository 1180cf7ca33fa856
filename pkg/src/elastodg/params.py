"""Physical and discretization parameters of the elastic Helmholtz problem.

The time-harmonic displacement u solves

    -omega^2 rho u - div sigma(u) = f   in the unit square (-1/2, 1/2)^2,
    i omega A u + sigma(u) n      = g   on the boundary,

with sigma(u) = 2 mu eps(u) + lam div(u) I.  A single frozen dataclass
carries the material constants, the absorbing-boundary matrix A and the
interior-penalty weights so that every module consumes one object.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Symmetrization parameter of the incomplete interior-penalty form.  The
# method is only defined for eta = -1; it is a named constant, not a knob.
ETA = -1.0


def _identity2() -> np.ndarray:
    a = np.eye(2)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ProblemParams:
    """Coefficients of the continuous problem and of the penalized form.

    Parameters
    ----------
    omega : float
        Angular frequency, > 0.
    rho : float
        Mass density, > 0.
    lam, mu : float
        Lame coefficients, > 0.
    A : (2, 2) ndarray
        Impedance matrix of the absorbing condition; symmetric positive
        definite, identity by default.
    gamma0, gamma1 : float
        Penalty weights on displacement jumps (gamma0 > 0) and traction
        jumps (gamma1 >= 0) across interior edges.
    eta : float
        Symmetrization parameter; fixed at -1 and validated.
    """

    omega: float
    rho: float = 1.0
    lam: float = 1.0
    mu: float = 1.0
    A: np.ndarray = field(default_factory=_identity2)
    gamma0: float = 10.0
    gamma1: float = 0.1
    eta: float = ETA

    def __post_init__(self) -> None:
        for name in ("omega", "rho", "lam", "mu", "gamma0"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.gamma1 < 0.0:
            raise ValueError(f"gamma1 must be nonnegative, got {self.gamma1!r}")
        if self.eta != ETA:
            raise ValueError("eta is fixed at -1 for this method")
        a = np.asarray(self.A, dtype=float)
        if a.shape != (2, 2):
            raise ValueError(f"A must be 2x2, got shape {a.shape}")
        if not np.allclose(a, a.T, rtol=0.0, atol=1e-12):
            raise ValueError("A must be symmetric")
        # SPD check for a symmetric 2x2: positive trace and determinant.
        if not (np.trace(a) > 0.0 and np.linalg.det(a) > 0.0):
            raise ValueError("A must be positive definite")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "A", a)

    @property
    def xi(self) -> float:
        """Penalty-dependent constant 1 + 1/gamma0 of the stability bound."""
        return 1.0 + 1.0 / self.gamma0

    def c_sta(self, h: float) -> float:
        """Stability constant xi/omega + 1/(omega^2 h) + 1/(omega^3 h^2 gamma1).

        Diagnostic only; infinite when gamma1 = 0.
        """
        w = self.omega
        tail = np.inf if self.gamma1 == 0.0 else 1.0 / (w**3 * h**2 * self.gamma1)
        return self.xi / w + 1.0 / (w**2 * h) + tail
