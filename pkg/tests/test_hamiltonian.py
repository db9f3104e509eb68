"""Hamiltonian assembly against an independent dense Fock-space oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doublon import (
    Boundary,
    DoubleExcitationBasis,
    Emitter,
    EmitterSet,
    StaggerPhase,
    TwoPhotonBasis,
    WaveguideParams,
    build_full_hamiltonian,
    build_two_photon_hamiltonian,
)
from doublon.hamiltonian import translation_two_photon


def dense_fock_oracle(p, emitters):
    """Second-quantized construction on the truncated full Fock space.

    Independent of the sparse builder: explicit bosonic matrices per site,
    qubit raising/lowering, Kronecker products, then projection onto the
    double-excitation basis.
    """
    nmax = 3
    N = p.N
    E = len(emitters)
    a = np.diag(np.sqrt(np.arange(1, nmax)), 1)
    Iq, If = np.eye(2), np.eye(nmax)
    sm = np.array([[0.0, 1.0], [0.0, 0.0]])  # basis order (g, e)

    def kron_all(ops):
        out = ops[0]
        for o in ops[1:]:
            out = np.kron(out, o)
        return out

    def site_op(op, k):
        return kron_all([Iq] * E + [op if j == k else If for j in range(N)])

    def qub_op(op, q):
        return kron_all([op if j == q else Iq for j in range(E)] + [If] * N)

    dim = 2**E * nmax**N
    H = np.zeros((dim, dim))
    bonds = [(n, n + 1) for n in range(N - 1)]
    if p.boundary is Boundary.PERIODIC:
        bonds.append((N - 1, 0))
    for n, m in bonds:
        H += -p.J * (site_op(a, n).T @ site_op(a, m) + site_op(a, m).T @ site_op(a, n))
    for n in range(N):
        ad, an = site_op(a, n).T, site_op(a, n)
        H += -0.5 * p.u_site(n) * (ad @ ad @ an @ an)
    for q, em in enumerate(emitters):
        H += em.omega * qub_op(np.diag([0.0, 1.0]), q)
        H += em.g * (
            qub_op(sm.T, q) @ site_op(a, em.site)
            + qub_op(sm, q) @ site_op(a, em.site).T
        )

    def fock_vec(excited, photons):
        occ = [0] * N
        for s in photons:
            occ[s] += 1
        vs = [np.eye(2)[1 if q in excited else 0] for q in range(E)]
        for n in range(N):
            v = np.zeros(nmax)
            v[occ[n]] = 1.0
            vs.append(v)
        out = kron_all([v.reshape(-1, 1) for v in vs]).ravel()
        return out / np.linalg.norm(out)

    tpb = TwoPhotonBasis(N)
    if E == 0:
        labels = [("two_photon", int(m), int(n)) for m, n in zip(tpb.m_of, tpb.n_of)]
        basis = tpb
    else:
        basis = DoubleExcitationBasis(E, tpb)
        labels = [basis.label(idx) for idx in range(basis.dim)]
    cols = []
    for lab in labels:
        if lab[0] == "pair":
            cols.append(fock_vec({lab[1], lab[2]}, []))
        elif lab[0] == "emitter_photon":
            cols.append(fock_vec({lab[1]}, [lab[2]]))
        else:
            cols.append(fock_vec(set(), [lab[1], lab[2]]))
    V = np.array(cols).T
    return V.T @ H @ V, basis


def test_two_photon_dimension():
    p = WaveguideParams(N=8, U_c=0.0)
    H = build_two_photon_hamiltonian(p, TwoPhotonBasis(8))
    assert H.dim == 36


def test_free_boson_spectrum():
    # U = 0, periodic: eigenvalues are sums -2J(cos k1 + cos k2) over
    # bosonic momentum pairs
    N = 8
    p = WaveguideParams(N=N, U_c=0.0, U_m=0.0)
    H = build_two_photon_hamiltonian(p, TwoPhotonBasis(N))
    ks = 2 * np.pi * np.arange(N) / N
    free = sorted(
        -2 * np.cos(k1) - 2 * np.cos(k2)
        for i, k1 in enumerate(ks)
        for k2 in ks[i:]
    )
    assert np.allclose(np.sort(np.linalg.eigvalsh(H.as_dense())), free, atol=1e-12)


def test_two_photon_vs_dense_oracle():
    p = WaveguideParams(N=6, U_c=4.0, U_m=0.2, boundary=Boundary.PERIODIC)
    H = build_two_photon_hamiltonian(p, TwoPhotonBasis(6))
    Hd, _ = dense_fock_oracle(p, EmitterSet(()))
    assert np.abs(H.as_dense() - Hd).max() < 1e-12
    assert np.linalg.eigvalsh(H.as_dense())[0] == pytest.approx(
        np.linalg.eigvalsh(Hd)[0], abs=1e-12
    )


def test_full_hamiltonian_vs_dense_oracle():
    p = WaveguideParams(N=4, U_c=3.0, U_m=0.5, boundary=Boundary.OPEN)
    e = EmitterSet((Emitter(-2.5, 0.13, 1), Emitter(-2.4, 0.2, 2)))
    basis = DoubleExcitationBasis(2, TwoPhotonBasis(4))
    H = build_full_hamiltonian(p, e, basis)
    Hd, _ = dense_fock_oracle(p, e)
    assert np.abs(H.as_dense() - Hd).max() < 1e-12


def test_full_hamiltonian_periodic_vs_dense_oracle():
    p = WaveguideParams(N=4, U_c=4.0, U_m=0.3, boundary=Boundary.PERIODIC)
    e = EmitterSet((Emitter(-2.6, 0.1, 0), Emitter(-2.6, 0.1, 0)))
    basis = DoubleExcitationBasis(2, TwoPhotonBasis(4))
    H = build_full_hamiltonian(p, e, basis)
    Hd, _ = dense_fock_oracle(p, e)
    assert np.abs(H.as_dense() - Hd).max() < 1e-12


def test_decoupled_limit_g_zero():
    p = WaveguideParams(N=6, U_c=4.0, U_m=0.2, boundary=Boundary.OPEN)
    e = EmitterSet((Emitter(-2.5, 0.0, 1), Emitter(-2.3, 0.0, 2)))
    basis = DoubleExcitationBasis(2, TwoPhotonBasis(6))
    H = build_full_hamiltonian(p, e, basis).as_dense()
    sl = basis.block_slices()
    assert np.abs(H[sl["pairs"], sl["emitter_photon"]]).max() == 0.0
    assert np.abs(H[sl["emitter_photon"], sl["two_photon"]]).max() == 0.0
    # spectrum is the union of the pair energy and the photonic sectors
    evals = np.sort(np.linalg.eigvalsh(H))
    pair_e = e[0].omega + e[1].omega
    parts = [np.array([pair_e])]
    Hb = H[sl["emitter_photon"], sl["emitter_photon"]]
    parts.append(np.linalg.eigvalsh(Hb))
    parts.append(np.linalg.eigvalsh(H[sl["two_photon"], sl["two_photon"]]))
    assert np.allclose(evals, np.sort(np.concatenate(parts)), atol=1e-12)


def test_fig3_layout_builds():
    # both emitters on one site (collocated coupling points)
    p = WaveguideParams(N=10, U_c=4.0, U_m=0.2, boundary=Boundary.OPEN)
    e = EmitterSet((Emitter(-2.5168, 0.1, 0), Emitter(-2.5168, 0.1, 0)))
    basis = DoubleExcitationBasis(2, TwoPhotonBasis(10))
    H = build_full_hamiltonian(p, e, basis)
    assert H.hermiticity_defect() == 0.0


def test_emitter_out_of_range():
    p = WaveguideParams(N=6, U_c=4.0, boundary=Boundary.OPEN)
    e = EmitterSet((Emitter(-2.5, 0.1, 6), Emitter(-2.5, 0.1, 0)))
    basis = DoubleExcitationBasis(2, TwoPhotonBasis(6))
    with pytest.raises(ValueError):
        build_full_hamiltonian(p, e, basis)


@settings(max_examples=20, deadline=None)
@given(
    st.integers(min_value=4, max_value=9),
    st.floats(min_value=0.0, max_value=8.0),
    st.floats(min_value=-1.0, max_value=1.0),
    st.booleans(),
)
def test_hermiticity_exact(N, uc, um, periodic):
    if periodic and N % 2:
        N += 1
    p = WaveguideParams(
        N=N, U_c=uc, U_m=um,
        boundary=Boundary.PERIODIC if periodic else Boundary.OPEN,
    )
    H = build_two_photon_hamiltonian(p, TwoPhotonBasis(N))
    assert H.hermiticity_defect() == 0.0
    assert not np.any(H.vals == 0.0)  # no explicit zeros stored


def test_translation_commutes_when_unstaggered():
    N = 8
    b = TwoPhotonBasis(N)
    p0 = WaveguideParams(N=N, U_c=4.0, U_m=0.0)
    H0 = build_two_photon_hamiltonian(p0, b).as_csr()
    T1 = translation_two_photon(b, shift=1)
    assert np.abs((H0 @ T1 - T1 @ H0).toarray()).max() == 0.0
    # staggering breaks one-site translation but keeps the two-site one
    p1 = WaveguideParams(N=N, U_c=4.0, U_m=0.2)
    H1 = build_two_photon_hamiltonian(p1, b).as_csr()
    T2 = translation_two_photon(b, shift=2)
    assert np.abs((H1 @ T2 - T2 @ H1).toarray()).max() == 0.0
    assert np.abs((H1 @ T1 - T1 @ H1).toarray()).max() > 0.1


def test_stagger_flip_is_one_site_translation():
    N = 8
    b = TwoPhotonBasis(N)
    p_even = WaveguideParams(N=N, U_c=4.0, U_m=0.2)
    p_odd = WaveguideParams(
        N=N, U_c=4.0, U_m=0.2, stagger_phase=StaggerPhase.ODD_PLUS
    )
    He = build_two_photon_hamiltonian(p_even, b).as_csr()
    Ho = build_two_photon_hamiltonian(p_odd, b).as_csr()
    T1 = translation_two_photon(b, shift=1)
    assert np.abs((T1 @ He @ T1.T - Ho).toarray()).max() == 0.0
