"""Mode overlaps, effective couplings, bound-state closed forms, and the
self-energy pole machinery."""

import numpy as np
import pytest

from doublon import (
    Branch,
    K0,
    TwoPhotonBasis,
    WaveguideParams,
    band_edge_energies,
    collocated_pair,
    correlation_length_k0,
    coupling_G,
    dbs_closed_form,
    dispersion_roots,
    doublon_wavefunction,
    lower_branch_modes,
    mode_overlap_M,
    omega_from_gap_detuning,
    reduced_ode_evolve,
    self_energy,
    self_energy_and_residue,
    spbs_closed_form,
    two_excitation_spectrum,
)
from doublon.params import Emitter, EmitterSet
from doublon.reduced import ResonanceError, _mode_overlap_row, coupling_table

P100 = WaveguideParams(N=100, U_c=4.0, U_m=0.2)
WQ100 = omega_from_gap_detuning(P100, 0.03)


def explicit_kn_vector(b: TwoPhotonBasis, k: float, n: int) -> np.ndarray:
    """Brute-force a_k^dag a_n^dag |0> on the pair basis (unnormalized)."""
    N = b.N
    vec = np.zeros(b.dim, dtype=complex)
    for m in range(N):
        amp = np.exp(1j * k * m) / np.sqrt(N)
        if m == n:
            vec[b.index(n, n)] += np.sqrt(2.0) * amp
        else:
            vec[b.index(min(m, n), max(m, n))] += amp
    return vec


def test_mode_overlap_against_explicit_vectors():
    # direct vector oracle: <k, n | Psi_K> from explicit vectors equals
    # sqrt(2) x the cell-normalized overlap formula
    p = WaveguideParams(N=20, U_c=6.0, U_m=0.3)
    b = TwoPhotonBasis(20)
    for j, n in ((3, 7), (13, 2), (5, 0)):
        K = 2 * np.pi * j / 20
        wf = doublon_wavefunction(K % np.pi if K <= np.pi else K, Branch.LOWER, p)
        # the ring vector for the label K itself
        wfK = doublon_wavefunction(K, Branch.LOWER, p) if K <= np.pi else None
        table = lower_branch_modes(p)
        row = _mode_overlap_row(table, j, n)
        # reconstruct the same Bloch state on the ring
        from doublon.bands import DoublonWavefunction

        psi = DoublonWavefunction(
            K=K,
            branch=Branch.LOWER,
            energy=table.energy[j],
            psi0_0=table.psi0_0[j],
            psi1_0=table.psi1_0[j],
            rho0=table.rho0[j],
            rho1=table.rho1[j],
            x_range=np.arange(1),
            r_range=np.arange(1),
            amplitudes=np.ones((1, 1), dtype=complex),
            psi_norm=1.0,
        ).on_ring(b)
        for l in (0, 3, 9, 14):
            k = 2 * np.pi * l / 20
            brute = np.vdot(explicit_kn_vector(b, k, n), psi)
            assert abs(np.sqrt(2.0) * row[l] - brute) < 1e-10


def test_mode_overlap_bessel_bound():
    table = lower_branch_modes(P100)
    for j in (0, 10, 25, 60):
        row = _mode_overlap_row(table, j, 4)
        assert np.sum(np.abs(row) ** 2) <= 1.0 + 1e-12


def test_mode_overlap_translation_covariance():
    table = lower_branch_modes(P100)
    r1 = np.abs(_mode_overlap_row(table, 11, 10))
    r2 = np.abs(_mode_overlap_row(table, 11, 12))  # same sublattice
    assert np.allclose(np.sort(r1), np.sort(r2), atol=1e-12)


def test_mode_overlap_grid_validation():
    with pytest.raises(ValueError):
        mode_overlap_M(0.1234, 0.0, 0, P100)


def test_coupling_range_and_k0_peak():
    # |G_K| stays within a narrow band over the whole zone for unit coupling
    e = collocated_pair(WQ100, 1.0, 0)
    table, G = coupling_table(P100, e, [(0, 0)])
    absG = np.abs(G[0])
    assert absG.min() > 1.70
    assert absG.max() < 2.10
    assert absG.max() / absG.min() < 1.25


def test_coupling_conjugation_symmetry():
    e = collocated_pair(WQ100, 1.0, 0)
    table, G = coupling_table(P100, e, [(0, 0)])
    # G(-K) = conj(G(K)) for a pair at the origin
    assert np.abs(G[0][1:][::-1] - np.conj(G[0][1:])).max() < 1e-12


def test_coupling_quadratic_in_g():
    e1 = collocated_pair(WQ100, 1.0, 0)
    e2 = collocated_pair(WQ100, 2.0, 0)
    g1 = coupling_G(K0, 0, 0, P100, e1)
    g2 = coupling_G(K0, 0, 0, P100, e2)
    assert g2 / g1 == pytest.approx(4.0, rel=1e-12)


def test_coupling_decays_with_pair_distance():
    e = collocated_pair(WQ100, 1.0, 0)
    table, G0 = coupling_table(P100, e, [(0, 0)])
    far = EmitterSet((Emitter(WQ100, 1.0, 0), Emitter(WQ100, 1.0, 20)))
    _, G20 = coupling_table(P100, far, [(0, 20)], table=table)
    assert np.abs(G20[0]).max() < 1e-3 * np.abs(G0[0]).max()


def test_coupling_requires_gap():
    resonant = collocated_pair(-1.5, 1.0, 0)
    with pytest.raises(ValueError):
        coupling_G(K0, 0, 0, P100, resonant)


def test_spbs_closed_form_values():
    p = WaveguideParams(N=100, U_c=4.0)
    prof = spbs_closed_form(-2.5, 0.1, 50, p)
    assert prof.decay_length == pytest.approx(1.0 / np.log(2.0), rel=1e-12)
    # delocalizes approaching the band edge
    assert spbs_closed_form(-2.001, 0.1, 50, p).decay_length > 30
    with pytest.raises(ResonanceError):
        spbs_closed_form(-1.9, 0.1, 50, p)


def test_spbs_closed_form_matches_quadrature():
    # momentum-space integral of the detuned propagator, trapezoid-refined
    p = WaveguideParams(N=100, U_c=4.0)
    g, wq, site = 0.1, -2.5168, 50
    prof = spbs_closed_form(wq, g, site, p)
    for d in (0, 1, 2, 5, 9):
        M = 4096
        q = -np.pi + 2 * np.pi * np.arange(M) / M
        val = g * np.mean(np.cos(q * d) / (wq + 2 * p.J * np.cos(q)))
        idx = np.argwhere(prof.sites == site + d)[0][0]
        assert abs(prof.amplitude[idx] - abs(val)) < 1e-8


def test_residue_consistency_and_limits():
    p = WaveguideParams(N=400, U_c=4.0, U_m=0.2)
    wq = omega_from_gap_detuning(p, 0.03)
    e = collocated_pair(wq, 0.1, 200)
    rr = self_energy_and_residue(p, e)
    assert rr.s0.real == 0.0 and rr.s0.imag > 0
    assert abs(rr.s0 + self_energy(rr.s0, rr.delta_II, rr.alpha, rr.G_K0)) < 1e-10
    assert 0.0 <= rr.plateau <= 1.0
    assert abs(rr.residue) <= 1.0
    # decoupled limit: no decay at all
    rr0 = self_energy_and_residue(p, e, G_K0=0.0)
    assert rr0.s0 == 0.0 and rr0.plateau == 1.0


def test_plateau_decreases_with_smaller_gap_detuning():
    p = WaveguideParams(N=400, U_c=4.0, U_m=0.2)
    plateaus = []
    for d2 in (0.05, 0.02):
        wq = omega_from_gap_detuning(p, d2)
        plateaus.append(self_energy_and_residue(p, collocated_pair(wq, 0.1, 200)).plateau)
    assert plateaus[1] < plateaus[0]


def test_residue_requires_gap_detuning():
    p = WaveguideParams(N=400, U_c=4.0, U_m=0.2)
    wq = omega_from_gap_detuning(p, -0.05)  # below the band edge
    with pytest.raises(ResonanceError):
        self_energy_and_residue(p, collocated_pair(wq, 0.1, 200))


def test_dbs_closed_form_lengths_and_amplitudes():
    p = WaveguideParams(N=400, U_c=4.0, U_m=0.2)
    wq = omega_from_gap_detuning(p, 0.03)
    e = collocated_pair(wq, 0.1, 200)
    dbs = dbs_closed_form(p, e)
    assert dbs.L_II == pytest.approx(np.sqrt(dbs_alpha(p, e) / 0.03), rel=1e-9)
    # two-photon envelope much longer than the single-photon dressing, and
    # the r-direction length matches the band-edge pair correlation length
    spbs = spbs_closed_form(wq, 0.1, 200, p)
    assert dbs.L_II > 4.0 * spbs.decay_length
    assert dbs.L_c == pytest.approx(
        correlation_length_k0(band_edge_energies(p)[0], p), rel=1e-8
    )
    # the interference factor doubles the on-peak field: max |Psi_d| = 2 A_d
    assert np.abs(dbs.amplitudes).max() > spbs.peak_amplitude
    # empty on the weak sublattice
    amp = np.abs(dbs.amplitudes)
    even = amp[np.asarray(dbs.x_c) % 2 == 0]
    odd = amp[np.asarray(dbs.x_c) % 2 == 1]
    assert odd.max() < 1e-12
    assert dbs.x_m == pytest.approx(200.0)


def dbs_alpha(p, e):
    from doublon.reduced import _edge_quantities

    return _edge_quantities(p, e)[1]


def test_reduced_ode_trivial_when_decoupled():
    p = WaveguideParams(N=100, U_c=4.0, U_m=0.2)
    wq = omega_from_gap_detuning(p, 0.03)
    e = EmitterSet((Emitter(wq, 0.0, 50), Emitter(wq, 0.0, 50)))
    tr = reduced_ode_evolve([(50, 50)], p, e, 50.0, 1.0)
    assert np.allclose(np.abs(tr.c_e), 1.0, atol=1e-12)


def test_reduced_ode_norm_conserving():
    p = WaveguideParams(N=100, U_c=4.0, U_m=0.2)
    wq = omega_from_gap_detuning(p, 0.03)
    e = collocated_pair(wq, 0.1, 50)
    tr = reduced_ode_evolve([(50, 50)], p, e, 200.0, 1.0)
    assert np.abs(tr.total_norm2() - 1.0).max() < 1e-10


def test_reduced_matches_residue_plateau():
    # two independent reductions of the same physics agree on the trapped
    # fraction
    p = WaveguideParams(N=400, U_c=4.0, U_m=0.2)
    wq = omega_from_gap_detuning(p, 0.03)
    e = collocated_pair(wq, 0.1, 200)
    tr = reduced_ode_evolve([(200, 200)], p, e, 1000.0, 1.0)
    plateau_ode = np.mean(np.abs(tr.c_e[-200:]) ** 2)
    rr = self_energy_and_residue(p, e)
    assert plateau_ode == pytest.approx(rr.plateau, abs=0.01)
