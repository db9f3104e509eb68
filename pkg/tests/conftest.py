"""Shared fixtures: the heavy reference runs are computed once per session."""

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
    omega_from_gap_detuning,
    solve_bands,
)

# couplings of the reference pair-dynamics setup (J = 1, U_c = 4, U_m = 0.05 U_c)
FIG_UC = 4.0
FIG_UM = 0.2
FIG_G = 0.1
FIG_DELTA_II = 0.03


def fig_waveguide(N, boundary=Boundary.OPEN):
    return WaveguideParams(N=N, U_c=FIG_UC, U_m=FIG_UM, J=1.0, boundary=boundary)


def collocated_reference(N):
    p = fig_waveguide(N)
    wq = omega_from_gap_detuning(p, FIG_DELTA_II)
    site = (N - 1) // 2
    site -= site % 2  # strong sublattice
    e = EmitterSet((Emitter(wq, FIG_G, site), Emitter(wq, FIG_G, site)))
    return p, e, wq


@pytest.fixture(scope="session")
def ref_bands():
    return solve_bands(fig_waveguide(100, Boundary.PERIODIC))


@pytest.fixture(scope="session")
def fig3_run():
    """Reference pair dynamics on the desk-scale lattice (N = 401, t = 1e3)."""
    N = 401
    p, e, _ = collocated_reference(N)
    basis = DoubleExcitationBasis(2, TwoPhotonBasis(N))
    import warnings as _w

    with _w.catch_warnings():
        _w.simplefilter("ignore")  # the reflection guard fires by design here
        res = evolve(
            p, e, StateVector.pair_excited(basis), 1000.0, 1.0,
            snapshot_times=[600.0, 1000.0],
            store_emitter_photon=True,
        )
    return res


@pytest.fixture(scope="session")
def fig3_big_run():
    """Same dynamics on a lattice long enough that no radiated doublon
    returns within t = 1e3 (bound-state extraction quality)."""
    N = 1001
    p, e, _ = collocated_reference(N)
    basis = DoubleExcitationBasis(2, TwoPhotonBasis(N))
    import warnings as _w

    with _w.catch_warnings():
        _w.simplefilter("ignore")
        res = evolve(
            p, e, StateVector.pair_excited(basis), 1000.0, 1.0,
            snapshot_times=[600.0, 1000.0],
        )
    return res
