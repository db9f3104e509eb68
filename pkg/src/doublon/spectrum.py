"""Exact two-excitation spectra of the bare waveguide.

Numeric oracle for the closed-form band theory: diagonalize the two-photon
Hamiltonian, label eigenstates by center-of-mass momentum (periodic case),
and classify doublons by their double-occupancy weight.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse.linalg as spla

from .basis import TwoPhotonBasis
from .hamiltonian import build_two_photon_hamiltonian, translation_two_photon
from .params import Boundary, WaveguideParams

DENSE_LIMIT = 120  # largest N that goes through the dense eigensolver


class StateClass(enum.Enum):
    DOUBLON = "doublon"
    SCATTERING = "scattering"


class SolverError(RuntimeError):
    pass


@dataclass
class SpectrumResult:
    params: WaveguideParams
    eigenvalues: np.ndarray  # sorted ascending
    bunching: np.ndarray  # B = sum_n |psi(n,n)|^2 per eigenstate
    momentum: np.ndarray | None  # K in [0, pi) per eigenstate, periodic only
    classification: np.ndarray | None  # StateClass per eigenstate, or None
    eigenvectors: np.ndarray | None  # columns, basis = TwoPhotonBasis

    @property
    def doublon_mask(self) -> np.ndarray:
        if self.classification is None:
            raise ValueError("spectrum not classified yet")
        return self.classification == StateClass.DOUBLON

    def doublon_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[self.doublon_mask]


def _momentum_labels(
    basis: TwoPhotonBasis, evals: np.ndarray, evecs: np.ndarray, tol: float = 1e-8
) -> tuple[np.ndarray, np.ndarray]:
    """K label per eigenstate from the two-site translation eigenvalue.

    Rotates each degenerate energy cluster (K and pi-K partners) into the
    translation eigenbasis: the projected T2 is unitary, so its symmetric and
    antisymmetric parts are commuting Hermitian observables (cos and sin of
    the translation angle) that split the cluster orthonormally.  Returns the
    labels and the rotated (complex) eigenvector matrix; K = angle/2 mod pi.
    """
    T2 = translation_two_photon(basis, shift=2)
    n = len(evals)
    K = np.empty(n)
    out = np.asarray(evecs, dtype=complex).copy()
    scale = max(1.0, float(np.abs(evals).max()))
    i = 0
    while i < n:
        j = i + 1
        while j < n and evals[j] - evals[j - 1] < tol * scale:
            j += 1
        block = out[:, i:j]
        tsub = block.conj().T @ (T2 @ block)
        cos_part = 0.5 * (tsub + tsub.conj().T)
        cvals, rot = np.linalg.eigh(cos_part)
        # split each cos-degenerate group by the sin part (K vs pi - K)
        a = 0
        d = j - i
        while a < d:
            bnd = a + 1
            while bnd < d and cvals[bnd] - cvals[bnd - 1] < 1e-9:
                bnd += 1
            if bnd - a > 1:
                sub = rot[:, a:bnd]
                sin_part = sub.conj().T @ ((tsub - tsub.conj().T) / 2j) @ sub
                _, rot2 = np.linalg.eigh(sin_part)
                rot[:, a:bnd] = sub @ rot2
            a = bnd
        block = block @ rot
        tsub = rot.conj().T @ tsub @ rot
        # shifting the lattice by +2 multiplies e^{iK x_c} by e^{-2iK}
        theta = np.angle(np.diag(tsub))
        kloc = (-theta / 2.0) % np.pi
        order = np.argsort(kloc)
        K[i:j] = kloc[order]
        out[:, i:j] = block[:, order]
        i = j
    return K, out


def two_excitation_spectrum(
    p: WaveguideParams,
    k_how_many: int | str = "all",
    with_vectors: bool = True,
) -> SpectrumResult:
    """Spectrum of the bare two-photon Hamiltonian.

    ``k_how_many="all"`` uses the dense solver (N <= 120); an integer selects
    that many smallest-algebraic eigenpairs through the iterative solver.
    Periodic lattices additionally get center-of-mass momentum labels.
    """
    b = TwoPhotonBasis(p.N)
    H = build_two_photon_hamiltonian(p, b)
    if k_how_many == "all":
        if p.N > DENSE_LIMIT:
            raise SolverError(
                f"full spectrum at N={p.N} exceeds the dense-path limit "
                f"{DENSE_LIMIT}; request a partial spectrum instead"
            )
        evals, evecs = np.linalg.eigh(H.as_dense())
    else:
        k = int(k_how_many)
        try:
            evals, evecs = spla.eigsh(H.as_csr(), k=k, which="SA")
        except spla.ArpackNoConvergence as exc:
            res = getattr(exc, "eigenvalues", None)
            raise SolverError(
                f"iterative eigensolver did not converge for N={p.N}, k={k}; "
                f"converged count: {0 if res is None else len(res)}"
            ) from exc
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]

    momentum = None
    if p.boundary is Boundary.PERIODIC:
        momentum, evecs = _momentum_labels(b, evals, evecs)
    bunching = np.sum(np.abs(evecs[b.diagonal_indices, :]) ** 2, axis=0)
    return SpectrumResult(
        params=p,
        eigenvalues=evals,
        bunching=bunching,
        momentum=momentum,
        classification=None,
        eigenvectors=evecs if with_vectors else None,
    )


def classify_doublons(s: SpectrumResult, threshold: float = 0.5) -> SpectrumResult:
    """Classify each eigenstate as Doublon or Scattering.

    Doublon iff the bunching weight B >= threshold; when U_c > 4J the
    eigenvalue must additionally lie outside the scattering band [-4J, 4J].
    Ties (B == threshold) classify as Doublon.
    """
    p = s.params
    cls = np.where(s.bunching >= threshold, StateClass.DOUBLON, StateClass.SCATTERING)
    if p.U_c > 4.0 * p.J:
        inside = np.abs(s.eigenvalues) <= 4.0 * p.J
        cls = np.where(inside, StateClass.SCATTERING, cls)
    return replace(s, classification=cls)


def residual_norms(s: SpectrumResult) -> np.ndarray:
    """||H v - E v|| per retained eigenpair (solver sanity)."""
    if s.eigenvectors is None:
        raise ValueError("eigenvectors were not retained")
    b = TwoPhotonBasis(s.params.N)
    H = build_two_photon_hamiltonian(s.params, b).as_csr()
    R = H @ s.eigenvectors - s.eigenvectors * s.eigenvalues[None, :]
    return np.linalg.norm(R, axis=0)
