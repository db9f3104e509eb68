"""Sparse Hamiltonian assembly for the waveguide and the hybrid system.

Conventions: rotating frame of the cavity frequency (cavity on-site energy
is zero); each excited emitter contributes its omega to the diagonal after
dropping the constant -sum_i omega_i / 2 offset of the sigma_z terms.  The
Kerr term contributes -U_n on each doubly occupied site.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import DoubleExcitationBasis, TwoPhotonBasis
from .params import Boundary, EmitterSet, WaveguideParams

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class SparseOperator:
    """Coordinate-form real operator with a hermiticity flag."""

    dim: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    hermitian: bool = True

    @classmethod
    def from_coo(cls, dim, rows, cols, vals, hermitian=True) -> "SparseOperator":
        m = sp.coo_matrix(
            (np.asarray(vals, dtype=float), (rows, cols)), shape=(dim, dim)
        )
        m.sum_duplicates()
        m.eliminate_zeros()
        return cls(dim, m.row.copy(), m.col.copy(), m.data.copy(), hermitian)

    @property
    def nnz(self) -> int:
        return len(self.vals)

    def as_csr(self, dtype=float) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.vals.astype(dtype), (self.rows, self.cols)),
            shape=(self.dim, self.dim),
        )

    def as_dense(self, dtype=float) -> np.ndarray:
        return self.as_csr(dtype=dtype).toarray()

    def hermiticity_defect(self) -> float:
        """max |H - H^T| entrywise; 0.0 exactly for symmetric real storage."""
        m = self.as_csr()
        d = m - m.T
        return 0.0 if d.nnz == 0 else float(np.abs(d.data).max())


def _hop_targets(src: np.ndarray, shift: int, p: WaveguideParams):
    """Shift one photon by one site, honouring the boundary condition."""
    tgt = src + shift
    if p.boundary is Boundary.PERIODIC:
        return tgt % p.N, np.ones(len(src), dtype=bool)
    keep = (tgt >= 0) & (tgt < p.N)
    return tgt, keep


def build_two_photon_hamiltonian(
    p: WaveguideParams, b: TwoPhotonBasis
) -> SparseOperator:
    """Bose-Hubbard Hamiltonian restricted to the two-photon sector.

    Hopping -J between neighbouring pair states with a sqrt(2) enhancement on
    any matrix element that touches a doubly occupied site; diagonal -U_n on
    |n,n>.
    """
    if b.N != p.N:
        raise ValueError(f"basis built for N={b.N}, parameters have N={p.N}")
    m0, n0 = b.m_of, b.n_of
    idx0 = np.arange(b.dim)
    src_diag = m0 == n0

    rows, cols, vals = [], [], []

    # one-photon moves; diagonal sources enumerate each target twice, so the
    # per-move weight 1/sqrt(2) sums back to the full sqrt(2) element
    for which, shift in (("m", -1), ("m", +1), ("n", -1), ("n", +1)):
        if which == "m":
            moved, keep = _hop_targets(m0, shift, p)
            tm, tn = moved, n0
        else:
            moved, keep = _hop_targets(n0, shift, p)
            tm, tn = m0, moved
        lo = np.minimum(tm, tn)
        hi = np.maximum(tm, tn)
        tgt_diag = lo == hi
        # halving is exact in binary floats, so the duplicate pair of moves
        # from a diagonal source sums to exactly -J*sqrt(2), bit-identical to
        # the single mirrored element; storage stays symmetric to the last ulp
        amp = np.full(b.dim, -p.J)
        amp[src_diag] *= SQRT2 * 0.5
        amp[tgt_diag] *= SQRT2
        lo, hi, amp, srcs = lo[keep], hi[keep], amp[keep], idx0[keep]
        tidx = lo * p.N - lo * (lo - 1) // 2 + (hi - lo)
        rows.append(tidx)
        cols.append(srcs)
        vals.append(amp)

    # attractive Kerr diagonal on double occupancy
    u = p.u_profile()
    rows.append(b.diagonal_indices)
    cols.append(b.diagonal_indices)
    vals.append(-u)

    return SparseOperator.from_coo(
        b.dim, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )


def build_full_hamiltonian(
    p: WaveguideParams, e: EmitterSet, b: DoubleExcitationBasis
) -> SparseOperator:
    """Hybrid Hamiltonian on the double-excitation sector.

    Couples emitter pairs to emitter-photon states with the per-emitter g,
    and emitter-photon states to the two-photon sector with g (sqrt(2) when
    the created photon doubles an occupied site).  Excitation number is
    conserved by construction: no entries leave the sector.
    """
    if b.N != p.N:
        raise ValueError(f"basis built for N={b.N}, parameters have N={p.N}")
    if b.n_emitters != len(e):
        raise ValueError(
            f"basis expects {b.n_emitters} emitters, got {len(e)}"
        )
    e.validate_sites(p)

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []

    def add(r, c, v):
        rows.append(np.atleast_1d(np.asarray(r, dtype=int)))
        cols.append(np.atleast_1d(np.asarray(c, dtype=int)))
        vals.append(np.atleast_1d(np.asarray(v, dtype=float)))

    # block (a): emitter-pair diagonal
    for i, j in b.pair_list():
        add(b.index_pair(i, j), b.index_pair(i, j), e[i].omega + e[j].omega)

    # block (b) diagonal and photon hopping within each emitter slice
    sites = np.arange(p.N)
    for i, em in enumerate(e):
        base = b.index_emitter_photon(i, 0)
        if em.omega != 0.0:
            add(base + sites, base + sites, np.full(p.N, em.omega))
        tgt, keep = _hop_targets(sites, +1, p)
        add(base + tgt[keep], base + sites[keep], np.full(keep.sum(), -p.J))
        add(base + sites[keep], base + tgt[keep], np.full(keep.sum(), -p.J))

    # block (a) <-> (b): emitter j de-excites, photon created at its site
    for i, j in b.pair_list():
        pa = b.index_pair(i, j)
        for keep, partner in ((i, j), (j, i)):
            row = b.index_emitter_photon(keep, e[partner].site)
            add(row, pa, e[partner].g)
            add(pa, row, e[partner].g)

    # block (b) <-> (c): emitter i de-excites, photon created at its site
    for i, em in enumerate(e):
        src = b.index_emitter_photon(i, 0) + sites
        lo = np.minimum(em.site, sites)
        hi = np.maximum(em.site, sites)
        tgt = b.offset_two_photon + lo * p.N - lo * (lo - 1) // 2 + (hi - lo)
        amp = np.where(sites == em.site, em.g * SQRT2, em.g)
        add(tgt, src, amp)
        add(src, tgt, amp)

    # block (c): the waveguide two-photon Hamiltonian
    wg = build_two_photon_hamiltonian(p, b.photons)
    add(wg.rows + b.offset_two_photon, wg.cols + b.offset_two_photon, wg.vals)

    return SparseOperator.from_coo(
        b.dim, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )


def translation_two_photon(b: TwoPhotonBasis, shift: int = 2) -> sp.csr_matrix:
    """Permutation operator translating both photons by ``shift`` sites."""
    N = b.N
    tm = (b.m_of + shift) % N
    tn = (b.n_of + shift) % N
    lo, hi = np.minimum(tm, tn), np.maximum(tm, tn)
    tidx = lo * N - lo * (lo - 1) // 2 + (hi - lo)
    return sp.csr_matrix(
        (np.ones(b.dim), (tidx, np.arange(b.dim))), shape=(b.dim, b.dim)
    )
