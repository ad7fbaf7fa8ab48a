"""Phase-space types and the first-order haunted SU(2) EYM system.

The dependent variables are ``r`` (areal radius), ``N = r'/r``, the
Yang-Mills potential ``w``, ``U = w'/r``, ``kappa = tau' + N`` and the phantom
term ``zeta = pi0 / (r e^tau)``; primes are derivatives in the radial
coordinate ``rho``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from phantomeym import kernels
from phantomeym.errors import DomainError, InadmissibleDataError

STATE_FIELDS = ("r", "N", "w", "U", "kappa", "zeta")


@dataclass(frozen=True)
class OrbitState:
    rho: float
    r: float
    N: float
    w: float
    U: float
    kappa: float
    zeta: float

    @classmethod
    def from_array(cls, rho, y) -> OrbitState:
        return cls(float(rho), *(float(v) for v in y))

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.N, self.w, self.U, self.kappa, self.zeta])

    def replace(self, **changes) -> OrbitState:
        fields = dict(self.__dict__)
        fields.update(changes)
        return OrbitState(**fields)


@dataclass(frozen=True)
class InitialData:
    """Shooting parameters ``(r0, w0, U0)``; ``E0`` is always derived."""

    r0: float
    w0: float
    U0: float

    @property
    def E0(self) -> float:
        return energy(self.r0, self.w0, self.U0)

    @property
    def admissible(self) -> bool:
        return (
            all(math.isfinite(v) for v in (self.r0, self.w0, self.U0))
            and self.r0 > 0
            and abs(self.w0) <= 1
            and self.E0 >= 0
        )

    def validate(self) -> InitialData:
        if not all(math.isfinite(v) for v in (self.r0, self.w0, self.U0)):
            raise InadmissibleDataError(f"non-finite initial data {self}")
        if self.r0 <= 0:
            raise InadmissibleDataError(f"r0 must be positive, got {self.r0}")
        if abs(self.w0) > 1:
            raise InadmissibleDataError(f"|w0| must be <= 1, got {self.w0}")
        if self.E0 < 0:
            raise InadmissibleDataError(f"E0 = {self.E0:.6g} < 0 for {self}")
        return self

    def mirrored(self) -> InitialData:
        """Datum whose forward orbit is the backward orbit of ``self``."""
        return InitialData(self.r0, self.w0, -self.U0)


class EnergyPair(NamedTuple):
    E: float
    F: float


def energy(r, w, U):
    q = (1.0 - w * w) / r
    return 1.0 + 2.0 * U * U - q * q


def _checked(state: OrbitState) -> np.ndarray:
    y = state.as_array()
    if not (np.all(np.isfinite(y)) and math.isfinite(state.rho)):
        raise DomainError(f"non-finite state {state}")
    if y[0] <= 0:
        raise DomainError(f"r must be positive, got {y[0]}")
    return y


def rhs(state: OrbitState) -> np.ndarray:
    """Derivative ``(r', N', w', U', kappa', zeta')`` at ``state``."""
    return np.asarray(kernels.rhs(_checked(state)))


def constraint_residual(state: OrbitState) -> float:
    """``zeta^2 - (1 + 2U^2 - (1-w^2)^2/r^2 - 2 kappa N + N^2)``; zero on solutions."""
    return float(kernels.constraint(_checked(state)))


def energies(state: OrbitState) -> EnergyPair:
    _checked(state)
    E = energy(state.r, state.w, state.U)
    wdot = state.r * state.U
    F = 2.0 * wdot * wdot - (1.0 - state.w**2) ** 2
    return EnergyPair(E, F)


def initial_state(data: InitialData) -> OrbitState:
    data.validate()
    return OrbitState(0.0, data.r0, 0.0, data.w0, data.U0, 0.0, math.sqrt(data.E0))


class SecondOrderResiduals(NamedTuple):
    """Pointwise residuals on the interior of a uniform grid."""

    rho: np.ndarray
    yang_mills: np.ndarray
    einstein_tau: np.ndarray
    einstein_r: np.ndarray
    constraint: np.ndarray

    def max_abs(self) -> float:
        return float(
            max(np.max(np.abs(a)) for a in (self.yang_mills, self.einstein_tau, self.einstein_r, self.constraint))
        )


def _centered(f, h, order):
    """First and second derivatives on the interior (drops order//2 points per side)."""
    if order == 2:
        d1 = (f[2:] - f[:-2]) / (2 * h)
        d2 = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
    elif order == 4:
        d1 = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
        d2 = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h**2)
    else:
        raise ValueError(f"unsupported finite-difference order {order}")
    return d1, d2


def second_order_residuals(rho, tau, r, w, pi0=None, order=4) -> SecondOrderResiduals:
    """Residuals of the original second-order system in ``(tau, r, w)``.

    Derivatives come from centered finite differences of the given ``order``
    on a uniform ``rho`` grid. ``pi0`` defaults to ``r0 e^{tau0} sqrt(E0)``
    read off at the grid point ``rho = 0``.
    """
    rho, tau, r, w = (np.asarray(a, dtype=float) for a in (rho, tau, r, w))
    if not (rho.shape == tau.shape == r.shape == w.shape) or rho.ndim != 1:
        raise DomainError("rho, tau, r, w must be 1-d arrays of equal length")
    if rho.size < max(5, order + 1):
        raise DomainError(f"grid too short ({rho.size} points)")
    if np.any(r <= 0):
        raise DomainError("r must be positive on the whole grid")
    h = rho[1] - rho[0]
    if not np.allclose(np.diff(rho), h, rtol=1e-9, atol=1e-12 * (1 + np.abs(rho).max())):
        raise DomainError("grid must be uniformly spaced")

    k = order // 2
    inner = slice(k, rho.size - k)
    dtau, ddtau = _centered(tau, h, order)
    dr, ddr = _centered(r, h, order)
    dw, ddw = _centered(w, h, order)
    t, rr, ww = tau[inner], r[inner], w[inner]

    if pi0 is None:
        i0 = int(np.argmin(np.abs(rho)))
        if abs(rho[i0]) > 1e-12 * (1 + abs(h)) or not (k <= i0 < rho.size - k):
            raise DomainError("pi0 not given and rho = 0 is not an interior grid point")
        j = i0 - k
        E0 = energy(rr[j], ww[j], dw[j] / rr[j])
        pi0 = rr[j] * math.exp(t[j]) * math.sqrt(max(E0, 0.0))

    pot = (1 - ww**2) ** 2 / rr**2
    ym = ddw + (dtau - dr / rr) * dw + ww * (1 - ww**2)
    e_tau = ddtau + dtau**2 + dr * dtau / rr - 2 * dw**2 / rr**2 - pot
    e_r = ddr / rr + dr * dtau / rr - 1 + pot
    phantom = (pi0 / (rr * np.exp(t))) ** 2
    e_c = 1 + 2 * dw**2 / rr**2 - pot - (dr / rr) * (dr / rr + 2 * dtau) - phantom
    return SecondOrderResiduals(rho[inner], ym, e_tau, e_r, e_c)
