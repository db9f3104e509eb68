"""Full-model evolution: conservation laws, observables, bound-state and
correlation extraction."""

import numpy as np
import pytest

from doublon import (
    Boundary,
    DoubleExcitationBasis,
    Emitter,
    EmitterSet,
    StateVector,
    TwoPhotonBasis,
    WaveguideParams,
    evolve,
    extract_dbs_field,
    extract_spbs_profile,
    g2_correlation,
    spbs_closed_form,
)
from doublon.dynamics import DynamicsResult, Snapshot, locked_spbs_profile

from conftest import collocated_reference, fig_waveguide


def test_uncoupled_pair_stays_excited():
    N = 12
    p = WaveguideParams(N=N, U_c=4.0, U_m=0.2, boundary=Boundary.OPEN)
    e = EmitterSet((Emitter(-2.5, 0.0, 5), Emitter(-2.5, 0.0, 5)))
    basis = DoubleExcitationBasis(2, TwoPhotonBasis(N))
    res = evolve(p, e, StateVector.pair_excited(basis), 20.0, 1.0)
    assert np.allclose(res.pair_trace(), 1.0, atol=1e-12)
    assert np.allclose(res.P1, 0.0, atol=1e-14)


def test_probability_bookkeeping_and_energy():
    N = 41
    p, e, _ = collocated_reference(N)
    basis = DoubleExcitationBasis(2, TwoPhotonBasis(N))
    res = evolve(p, e, StateVector.pair_excited(basis), 8.0, 0.5)
    assert np.abs(res.probability_sum() - 1.0).max() < 1e-8
    assert res.energy_drift < 1e-6
    assert res.norm_drift.max() < 1e-8
    assert not res.warnings  # short run, guard satisfied


def test_reflection_guard_warns_but_runs():
    N = 41
    p, e, _ = collocated_reference(N)
    basis = DoubleExcitationBasis(2, TwoPhotonBasis(N))
    with pytest.warns(UserWarning, match="reflection guard"):
        res = evolve(p, e, StateVector.pair_excited(basis), 40.0, 1.0)
    assert res.warnings


def test_unnormalized_initial_state_rejected():
    N = 12
    p, e, _ = collocated_reference(N)
    basis = DoubleExcitationBasis(2, TwoPhotonBasis(N))
    psi = StateVector.pair_excited(basis)
    psi.data[0] = 2.0
    with pytest.raises(ValueError):
        evolve(p, e, psi, 1.0, 0.5)


def _clean_spbs_run(omega_q, N=201, t_end=200.0):
    """Emitter pair detuned below both bands: the single-photon dressing is
    the only bound structure in the waveguide."""
    p = fig_waveguide(N)
    site = (N - 1) // 2
    site -= site % 2
    e = EmitterSet((Emitter(omega_q, 0.1, site), Emitter(omega_q, 0.1, site)))
    basis = DoubleExcitationBasis(2, TwoPhotonBasis(N))
    return evolve(
        p, e, StateVector.pair_excited(basis), t_end, 1.0,
        store_emitter_photon=True,
    )


def test_spbs_fit_matches_closed_form_below_band():
    # the stationary dressing is phase-locked to the pair amplitude; the
    # switch-on transient is not, so the locked average isolates it
    omega_q = -3.0
    res = _clean_spbs_run(omega_q)
    prof = locked_spbs_profile(res, 0, window=4)
    target = spbs_closed_form(omega_q, 0.1, 0, res.params).decay_length
    assert prof.fitted
    assert prof.r_squared > 0.99
    assert abs(prof.decay_length - target) / target < 0.10


def test_spbs_length_monotone_in_detuning():
    # deeper detuning localizes the dressing more tightly
    L = []
    for omega_q in (-3.0, -3.4):
        prof = locked_spbs_profile(_clean_spbs_run(omega_q), 0, window=4)
        assert prof.fitted
        L.append(prof.decay_length)
    assert L[1] < L[0]


def test_spbs_no_fit_when_signal_absent():
    N = 12
    p, e, _ = collocated_reference(N)
    basis = DoubleExcitationBasis(2, TwoPhotonBasis(N))
    res = evolve(
        p,
        EmitterSet((Emitter(e[0].omega, 0.0, 4), Emitter(e[0].omega, 0.0, 4))),
        StateVector.pair_excited(basis),
        5.0,
        1.0,
    )
    prof = extract_spbs_profile(res, 0)
    assert not prof.fitted


def test_dbs_field_symmetric_and_bunched(fig3_big_run):
    joint, prof = extract_dbs_field(fig3_big_run, snapshot=0)
    N = fig3_big_run.params.N
    x_m = fig3_big_run.emitters[0].site
    # reflection symmetry about the collocated pair
    for off in (1, 3, 7, 11):
        assert joint[x_m + off, x_m + off] == pytest.approx(
            joint[x_m - off, x_m - off], rel=1e-6
        )
    # joint density concentrated near the diagonal |m - n| <= 2
    total = joint.sum()
    near = sum(
        joint.diagonal(k).sum() for k in range(-2, 3)
    )
    assert near / total > 0.7
    assert prof.fitted and prof.decay_length > 0
    assert prof.r_squared is not None


def _fabricated_result(coeffs, N):
    basis = DoubleExcitationBasis(2, TwoPhotonBasis(N))
    tpb = basis.photons
    p = WaveguideParams(N=N, U_c=4.0, U_m=0.0)
    snap = Snapshot(
        time=0.0,
        single_photon_density=np.zeros(N),
        emitter_photon_amps=np.zeros((2, N), dtype=complex),
        two_photon_coeffs=coeffs,
        diag_profile=np.abs(coeffs[tpb.diagonal_indices]),
    )
    e = EmitterSet((Emitter(-2.6, 0.1, 0), Emitter(-2.6, 0.1, 0)))
    return DynamicsResult(
        params=p,
        emitters=e,
        basis=basis,
        times=np.array([0.0]),
        pair_traces={(0, 1): np.array([0.0])},
        P1=np.array([0.0]),
        P2=np.array([1.0]),
        norm_drift=np.array([0.0]),
        energy_drift=0.0,
        snapshots=[snap],
    )


def test_g2_flat_for_factorized_field():
    # psi(m, n) ~ phi(m) phi(n) is an unbunched product: G2 independent of r
    N = 20
    tpb = TwoPhotonBasis(N)
    rng = np.random.default_rng(5)
    phi = np.exp(1j * rng.uniform(0, 2 * np.pi, N))  # uniform modulus
    coeffs = phi[tpb.m_of] * phi[tpb.n_of]
    coeffs[tpb.m_of == tpb.n_of] /= np.sqrt(2.0)
    coeffs = coeffs / np.linalg.norm(coeffs)
    g2 = g2_correlation(_fabricated_result(coeffs, N))
    vals = g2.g2[np.isfinite(g2.g2)]
    assert vals.max() - vals.min() < 1e-10 * vals.max()


def test_g2_symmetric_for_symmetric_layout(fig3_big_run):
    g2 = g2_correlation(fig3_big_run, snapshot=0)
    ok = np.isfinite(g2.g2) & np.isfinite(g2.g2[::-1])
    assert np.allclose(g2.g2[ok], g2.g2[::-1][ok], rtol=1e-9)
    assert np.all(g2.g2[np.isfinite(g2.g2)] >= 0)


def test_g2_empty_block_rejected():
    N = 12
    coeffs = np.zeros(TwoPhotonBasis(N).dim, dtype=complex)
    with pytest.raises(ValueError):
        g2_correlation(_fabricated_result(coeffs, N))


def test_detuning_gate_two_photon_dominates(fig3_run):
    # with the pair frequency inside the gap and far from the single-photon
    # band, the long-time field is dominated by photon pairs
    assert fig3_run.P2[-1] > fig3_run.P1[-1]
