"""Closed-form trivial solutions used as integrator-independent references.

All families share ``kappa = tanh(rho)`` and ``zeta = sqrt(E0) sech(rho)``.

* Ellis-Bronnikov: ``w = +-1``, ``r = r0 cosh(rho)``, ``E0 = 1``.
* Abelian: ``w = 0``, ``r0 >= 1``,
  ``r = r0 cosh(rho) cos(arctan(sinh rho) / r0)``, ``E0 = 1 - 1/r0^2``.
* Cylindrical fixed point: ``r = 1``, ``w = 0``, ``E0 = 0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from phantomeym.errors import DomainError
from phantomeym.model import InitialData, OrbitState


class Family(enum.Enum):
    ELLIS_BRONNIKOV = "EllisBronnikov"
    ABELIAN = "Abelian"
    CYLINDRICAL = "CylindricalFixedPoint"


@dataclass(frozen=True)
class OracleKind:
    family: Family
    r0: float = 1.0
    sign: int = 1  # sign of w for Ellis-Bronnikov

    def __post_init__(self):
        if not (math.isfinite(self.r0) and self.r0 > 0):
            raise DomainError(f"r0 must be positive, got {self.r0}")
        if self.family is Family.ABELIAN and self.r0 < 1:
            raise DomainError(f"abelian solution needs r0 >= 1, got {self.r0}")
        if self.family is Family.CYLINDRICAL and self.r0 != 1:
            raise DomainError("the cylindrical fixed point has r0 = 1")
        if self.sign not in (1, -1):
            raise DomainError("sign must be +1 or -1")

    @classmethod
    def ellis_bronnikov(cls, r0, sign=1) -> OracleKind:
        return cls(Family.ELLIS_BRONNIKOV, float(r0), sign)

    @classmethod
    def abelian(cls, r0) -> OracleKind:
        return cls(Family.ABELIAN, float(r0))

    @classmethod
    def cylindrical(cls) -> OracleKind:
        return cls(Family.CYLINDRICAL, 1.0)

    @classmethod
    def constant_w(cls, r0, w0) -> OracleKind:
        """Constant-``w`` solution with ``U0 = 0``; ``w0`` in ``{-1, 0, 1}``."""
        if w0 in (1, -1):
            return cls.ellis_bronnikov(r0, int(w0))
        if w0 == 0:
            return cls.cylindrical() if r0 == 1 else cls.abelian(r0)
        raise DomainError(f"constant w must be -1, 0 or 1, got {w0}")

    @property
    def w(self) -> float:
        return float(self.sign) if self.family is Family.ELLIS_BRONNIKOV else 0.0

    @property
    def data(self) -> InitialData:
        return InitialData(self.r0, self.w, 0.0)

    @property
    def E0(self) -> float:
        if self.family is Family.ELLIS_BRONNIKOV:
            return 1.0
        return 1.0 - 1.0 / self.r0**2


def oracle_states(kind: OracleKind, rho) -> np.ndarray:
    """Closed-form states at each ``rho`` as an ``(m, 6)`` array."""
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    if not np.all(np.isfinite(rho)):
        raise DomainError("rho must be finite")
    t = np.tanh(rho)
    sech = 1.0 / np.cosh(rho)
    out = np.empty((rho.size, 6))
    out[:, 3] = 0.0
    out[:, 4] = t
    out[:, 5] = math.sqrt(kind.E0) * sech
    if kind.family is Family.ELLIS_BRONNIKOV:
        out[:, 0] = kind.r0 * np.cosh(rho)
        out[:, 1] = t
        out[:, 2] = kind.sign
    elif kind.family is Family.CYLINDRICAL:
        out[:, 0] = 1.0
        out[:, 1] = 0.0
        out[:, 2] = 0.0
    else:
        theta = np.arctan(np.sinh(rho)) / kind.r0
        if kind.r0 == 1.0:
            out[:, 0] = 1.0  # cosh * cos(arctan(sinh)) == 1, exactly
            out[:, 1] = 0.0
        else:
            out[:, 0] = kind.r0 * np.cosh(rho) * np.cos(theta)
            out[:, 1] = t - sech * np.tan(theta) / kind.r0
        out[:, 2] = 0.0
    return out


def oracle_state(kind: OracleKind, rho: float) -> OrbitState:
    return OrbitState.from_array(rho, oracle_states(kind, [rho])[0])


class MassCharges(NamedTuple):
    m_infty: float
    alpha: float
    beta: float


def _abelian_charges_at(r0, rho):
    """``(r(1 - N^2), r zeta)`` at large ``rho`` without cancellation."""
    theta = math.atan(math.sinh(rho)) / r0
    sech = 1.0 / math.cosh(rho)
    t = math.tanh(rho)
    N = t - sech * math.tan(theta) / r0
    one_minus_t = 2.0 / (math.exp(2.0 * rho) + 1.0)
    one_minus_N = one_minus_t + sech * math.tan(theta) / r0
    r = r0 * math.cosh(rho) * math.cos(theta)
    return r * (1.0 + N) * one_minus_N, math.sqrt(1.0 - 1.0 / r0**2) * r0 * math.cos(theta)


def oracle_mass_charges(kind: OracleKind, rho: float = 40.0) -> MassCharges:
    """Limits ``(m_infty, alpha, beta)`` of ``(r(1-N^2)/2, r zeta, r(1-N^2))``.

    Exact for Ellis-Bronnikov; for the abelian family the closed forms are
    evaluated at ``rho``, ``rho - 2`` and ``rho - 4`` and extrapolated in
    ``e^{-rho}``.
    """
    if kind.family is Family.ELLIS_BRONNIKOV:
        return MassCharges(0.0, kind.r0, 0.0)
    if kind.family is Family.CYLINDRICAL or kind.r0 == 1.0:
        raise DomainError("the cylindrical solution is not asymptotically flat")
    pts = [rho - 4.0, rho - 2.0, rho]
    vals = np.array([_abelian_charges_at(kind.r0, p) for p in pts])
    q = math.exp(-2.0)
    # two Richardson passes for errors ~ c1 e^{-rho} + c2 e^{-2 rho}
    r1 = (vals[1:] - q * vals[:-1]) / (1.0 - q)
    q2 = q * q
    beta, alpha = (r1[1] - q2 * r1[0]) / (1.0 - q2)
    return MassCharges(0.5 * float(beta), float(alpha), float(beta))
