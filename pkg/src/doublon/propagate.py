"""Deterministic unitary propagation of sparse Hamiltonians.

Chebyshev expansion of exp(-iHt): an explicit polynomial scheme whose
truncation error falls off super-exponentially once the polynomial order
exceeds the scaled step R*dt, so norm and energy are conserved to machine
precision without renormalization.  Single-threaded sparse products keep the
evolution bitwise reproducible for a fixed configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import jv


class NormDriftError(RuntimeError):
    """The propagated state norm drifted beyond the contract tolerance."""


def spectral_bounds(H: sp.spmatrix) -> tuple[float, float]:
    """Gershgorin bounds [lo, hi] enclosing the spectrum of Hermitian H."""
    csr = H.tocsr()
    diag = csr.diagonal().real
    absrow = np.abs(csr).sum(axis=1).A1 if hasattr(np.abs(csr).sum(axis=1), "A1") else np.asarray(np.abs(csr).sum(axis=1)).ravel()
    radius = absrow - np.abs(diag)
    return float((diag - radius).min()), float((diag + radius).max())


def _chebyshev_coefficients(center: float, half_width: float, dt: float) -> np.ndarray:
    """Expansion coefficients of exp(-i H dt) in T_k((H - c)/R)."""
    x = half_width * dt
    # Bessel tail: J_k(x) is negligible for k beyond x by a safety band
    n_terms = int(np.ceil(x + 25.0 + 12.0 * x ** (1.0 / 3.0)))
    k = np.arange(n_terms)
    coeff = 2.0 * (-1j) ** k * jv(k, x)
    coeff[0] *= 0.5
    coeff *= np.exp(-1j * center * dt)
    # trim trailing terms below double precision
    keep = n_terms
    mag = np.abs(coeff)
    while keep > 2 and mag[keep - 1] < 1e-17 and mag[keep - 2] < 1e-17:
        keep -= 1
    return coeff[:keep]


@dataclass
class ChebyshevPropagator:
    """Fixed-step propagator psi(t + dt) = exp(-i H dt) psi(t)."""

    H: sp.csr_matrix
    dt: float
    center: float
    half_width: float
    coeff: np.ndarray

    @classmethod
    def build(cls, H, dt: float, bounds: tuple[float, float] | None = None):
        csr = sp.csr_matrix(H, dtype=complex)
        if bounds is None:
            lo, hi = spectral_bounds(csr)
        else:
            lo, hi = bounds
        center = 0.5 * (hi + lo)
        half_width = 0.5 * (hi - lo) * (1.0 + 1e-9) + 1e-12
        coeff = _chebyshev_coefficients(center, half_width, dt)
        return cls(csr, float(dt), center, half_width, coeff)

    @property
    def terms(self) -> int:
        return len(self.coeff)

    def step(self, psi: np.ndarray) -> np.ndarray:
        """One Chebyshev step; cost = (terms - 1) sparse products."""
        c = self.center
        r = self.half_width
        t0 = psi
        t1 = (self.H @ psi - c * psi) / r
        out = self.coeff[0] * t0 + self.coeff[1] * t1
        for a in self.coeff[2:]:
            t2 = 2.0 * ((self.H @ t1) - c * t1) / r - t0
            out += a * t2
            t0, t1 = t1, t2
        return out


def evolve_fixed_step(
    H,
    psi0: np.ndarray,
    t_end: float,
    dt_store: float,
    observer=None,
    norm_tol: float = 1e-8,
):
    """Propagate psi0 to t_end, calling ``observer(t, psi)`` every dt_store.

    Returns (times, final_state, norm_drift_series).  Raises NormDriftError
    if |  ||psi|| - 1 | exceeds norm_tol at any stored time; renormalization
    is never applied, the drift is a diagnostic of the propagation itself.
    """
    n_steps = int(round(t_end / dt_store))
    if abs(n_steps * dt_store - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ValueError(f"t_end={t_end} is not a multiple of dt_store={dt_store}")
    prop = ChebyshevPropagator.build(H, dt_store)
    psi = np.asarray(psi0, dtype=complex).copy()
    times = np.linspace(0.0, t_end, n_steps + 1)
    drift = np.empty(n_steps + 1)
    drift[0] = abs(np.linalg.norm(psi) - 1.0)
    if observer is not None:
        observer(0.0, psi)
    for i in range(1, n_steps + 1):
        psi = prop.step(psi)
        drift[i] = abs(np.linalg.norm(psi) - 1.0)
        if drift[i] > norm_tol:
            raise NormDriftError(
                f"norm drift {drift[i]:.3e} beyond {norm_tol:.1e} at t={times[i]:.6g}"
            )
        if observer is not None:
            observer(times[i], psi)
    return times, psi, drift
