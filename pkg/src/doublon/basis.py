"""State-space enumeration for the double-excitation sector.

Two-photon states are stored on the ordered pairs (m, n) with m <= n; the
doubly occupied state |n,n> is the normalized (a_n^dag)^2 |vac> / sqrt(2), so
all bosonic sqrt(2) factors live in matrix elements, never in state norms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True, eq=False)
class TwoPhotonBasis:
    """Ordered site pairs (m, n), m <= n, in lexicographic order."""

    N: int

    @property
    def dim(self) -> int:
        return self.N * (self.N + 1) // 2

    def index(self, m: int, n: int) -> int:
        if m > n:
            m, n = n, m
        if not 0 <= m <= n < self.N:
            raise IndexError(f"pair ({m}, {n}) outside lattice of {self.N} sites")
        # row m starts after sum_{j<m} (N - j) previous rows
        return m * self.N - m * (m - 1) // 2 + (n - m)

    @cached_property
    def m_of(self) -> np.ndarray:
        m = np.concatenate([np.full(self.N - j, j) for j in range(self.N)])
        m.flags.writeable = False
        return m

    @cached_property
    def n_of(self) -> np.ndarray:
        n = np.concatenate([np.arange(j, self.N) for j in range(self.N)])
        n.flags.writeable = False
        return n

    def pair(self, idx: int) -> tuple[int, int]:
        return int(self.m_of[idx]), int(self.n_of[idx])

    @cached_property
    def diagonal_indices(self) -> np.ndarray:
        """Indices of the doubly occupied states |n,n>, n = 0..N-1."""
        idx = np.array([self.index(n, n) for n in range(self.N)])
        idx.flags.writeable = False
        return idx

    def symmetrized_amplitudes(self, coeffs: np.ndarray) -> np.ndarray:
        """Full (N, N) amplitude grid A(m, n) from basis coefficients.

        A(m, n) = c(min, max) for m != n and A(n, n) = sqrt(2) c(n, n), so that
        <a_n^dag a_m^dag a_m a_n> = |A(m, n)|^2 and a_n |psi> = sum_m A(m,n)|m>.
        """
        A = np.zeros((self.N, self.N), dtype=coeffs.dtype)
        A[self.m_of, self.n_of] = coeffs
        A[self.n_of, self.m_of] = coeffs
        d = np.arange(self.N)
        A[d, d] *= np.sqrt(2.0)
        return A


@dataclass(frozen=True, eq=False)
class DoubleExcitationBasis:
    """Three blocks: emitter pairs, emitter x photon, and two photons.

    Block (a): {(i, j) : i < j} both emitters excited, field in vacuum.
    Block (b): {(i, n)} emitter i excited plus one photon at site n, i-major.
    Block (c): a TwoPhotonBasis.
    """

    n_emitters: int
    photons: TwoPhotonBasis

    def __post_init__(self) -> None:
        if self.n_emitters < 1:
            raise ValueError("need at least one emitter")

    @property
    def N(self) -> int:
        return self.photons.N

    @property
    def n_pairs(self) -> int:
        e = self.n_emitters
        return e * (e - 1) // 2

    @property
    def offset_pairs(self) -> int:
        return 0

    @property
    def offset_emitter_photon(self) -> int:
        return self.n_pairs

    @property
    def offset_two_photon(self) -> int:
        return self.n_pairs + self.n_emitters * self.N

    @property
    def dim(self) -> int:
        return self.offset_two_photon + self.photons.dim

    def pair_list(self) -> list[tuple[int, int]]:
        e = self.n_emitters
        return [(i, j) for i in range(e) for j in range(i + 1, e)]

    def index_pair(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        if i == j or not 0 <= i < j < self.n_emitters:
            raise IndexError(f"bad emitter pair ({i}, {j})")
        e = self.n_emitters
        return i * e - i * (i + 1) // 2 + (j - i - 1)

    def index_emitter_photon(self, i: int, n: int) -> int:
        if not 0 <= i < self.n_emitters:
            raise IndexError(f"emitter index {i} out of range")
        if not 0 <= n < self.N:
            raise IndexError(f"site {n} out of range")
        return self.offset_emitter_photon + i * self.N + n

    def index_two_photon(self, m: int, n: int) -> int:
        return self.offset_two_photon + self.photons.index(m, n)

    def label(self, idx: int):
        """Round-trip label for a flat index."""
        if idx < 0 or idx >= self.dim:
            raise IndexError(idx)
        if idx < self.offset_emitter_photon:
            return ("pair",) + self.pair_list()[idx]
        if idx < self.offset_two_photon:
            rel = idx - self.offset_emitter_photon
            return ("emitter_photon", rel // self.N, rel % self.N)
        rel = idx - self.offset_two_photon
        return ("two_photon",) + self.photons.pair(rel)

    def block_slices(self) -> dict[str, slice]:
        return {
            "pairs": slice(0, self.offset_emitter_photon),
            "emitter_photon": slice(self.offset_emitter_photon, self.offset_two_photon),
            "two_photon": slice(self.offset_two_photon, self.dim),
        }
