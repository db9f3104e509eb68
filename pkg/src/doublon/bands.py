"""Closed-form doublon band structure for the staggered Kerr chain.

The two-photon problem separates in center-of-mass momentum K.  With
x_c = (m+n)/2 and r = m-n, the Bloch cell function has two components
(psi0, psi1) attached to the K and K+pi harmonics of the staggered
interaction.  Bound states below the relative-motion bands follow from the
lattice Green functions of the two components; the dispersion is the root of
a 2x2 determinant in the energy.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .params import StaggerPhase, WaveguideParams

K0 = np.pi / 2.0  # band-edge center-of-mass momentum


class Branch(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"


class RelativeBandError(ValueError):
    """Energy inside a relative-motion band: the state is a scattering state."""


def relative_band_edges(K: float, p: WaveguideParams) -> tuple[float, float]:
    """Half-widths (4J|cos K/2|, 4J|sin K/2|) of the two relative bands."""
    return (
        4.0 * p.J * abs(np.cos(K / 2.0)),
        4.0 * p.J * abs(np.sin(K / 2.0)),
    )


def green_f(K: float, E: float, r: int, branch: int, p: WaveguideParams) -> float:
    """Relative-coordinate lattice Green function f_K^(0/1)(E, r).

    Closed form of the Brillouin-zone integral

        f^(0) = int_-pi^pi dq e^{iqr} / (E + 4J cos(K/2) cos q),
        f^(1) = int_-pi^pi dq e^{iqr} / (E - 4J sin(K/2) cos q),

    for E outside the corresponding band.  For E < 0 the component-0 function
    decays without sign alternation while component 1 alternates in r.
    """
    if branch not in (0, 1):
        raise ValueError(f"branch must be 0 or 1, got {branch}")
    a = relative_band_edges(K, p)[branch]
    if abs(E) <= a:
        raise RelativeBandError(
            f"E={E} inside the branch-{branch} relative band (half-width {a}) "
            f"at K={K}: scattering-state energy"
        )
    s = 1.0 if E > 0 else -1.0
    root = np.sqrt(E * E - a * a)
    if a == 0.0:
        return 0.0 if r != 0 else 2.0 * np.pi / E
    # pole inside the unit circle of the contour integral
    if branch == 0:
        ratio = -s * (abs(E) - root) / a
    else:
        ratio = s * (abs(E) - root) / a
    return s * (2.0 * np.pi / root) * ratio ** abs(int(r))


def _channel_scales(K, E, p):
    """(U_cos, U_sin) = sqrt(E^2 - (4J cos K/2)^2), sqrt(E^2 - (4J sin K/2)^2)."""
    a0, a1 = relative_band_edges(K, p)
    E = np.asarray(E, dtype=float)
    return np.sqrt(E * E - a0 * a0), np.sqrt(E * E - a1 * a1)


def dispersion_det(K: float, E, p: WaveguideParams):
    """Doublon dispersion determinant; its roots in E are the band energies.

    det = (U_c/U_cos - 1)(U_c/U_sin - 1) - U_m^2 / (U_cos U_sin), evaluated
    for E below both relative-band edges.
    """
    a0, a1 = relative_band_edges(K, p)
    E_arr = np.asarray(E, dtype=float)
    if np.any(np.abs(E_arr) <= max(a0, a1)):
        raise RelativeBandError(
            f"E inside a relative band at K={K}; determinant undefined"
        )
    ucos, usin = _channel_scales(K, E_arr, p)
    det = (p.U_c / ucos - 1.0) * (p.U_c / usin - 1.0) - p.U_m**2 / (ucos * usin)
    return float(det) if np.isscalar(E) else det


def band_edge_energies(p: WaveguideParams) -> tuple[float, float]:
    """E_-/E_+ at K0 = pi/2 in closed form: -sqrt((U_c +/- U_m)^2 + 8 J^2)."""
    e_minus = -np.sqrt((p.U_c + abs(p.U_m)) ** 2 + 8.0 * p.J**2)
    e_plus = -np.sqrt((p.U_c - abs(p.U_m)) ** 2 + 8.0 * p.J**2)
    return e_minus, e_plus


def dispersion_roots(
    K: float,
    p: WaveguideParams,
    scan_step: float = 1e-3,
    tol: float = 1e-10,
) -> list[float]:
    """All real determinant roots below the relative-band edges at momentum K.

    Scans downward from just below the lower band edge on a scan_step * J
    grid to bracket sign changes, then bisects each bracket.  A branch whose
    root has merged into the continuum simply produces no bracket.
    """
    a0, a1 = relative_band_edges(K, p)
    edge = -max(a0, a1)
    if p.U_m == 0.0:
        # the determinant factorizes into the two decoupled channels; the
        # scan below would miss their degenerate double root at K0
        candidates = (-np.sqrt(p.U_c**2 + a * a) for a in (a0, a1))
        return sorted(E for E in candidates if E < edge)
    # deepest conceivable doublon: on-site pair energy minus the full kinetic span
    floor = -np.sqrt((p.U_c + abs(p.U_m)) ** 2 + 16.0 * p.J**2) - 2.0 * p.J
    top = edge - 1e-9 * p.J
    if top <= floor:
        return []
    grid = np.arange(top, floor, -scan_step * p.J)
    vals = dispersion_det(K, grid, p)
    roots = []
    sign_change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    for i in sign_change:
        lo, hi = grid[i + 1], grid[i]  # lo < hi (grid descends)
        flo, fhi = vals[i + 1], vals[i]
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            fmid = dispersion_det(K, mid, p)
            if fmid == 0.0:
                lo = hi = mid
                break
            if np.sign(fmid) == np.sign(flo):
                lo, flo = mid, fmid
            else:
                hi, fhi = mid, fmid
        roots.append(0.5 * (lo + hi))
    roots.sort()
    return roots


def correlation_length(
    K: float, E: float, p: WaveguideParams, branch: Branch = Branch.LOWER
) -> float:
    """Pair-correlation decay length L_c of a doublon at (K, E), in sites.

    At K0 this is 1 / ln(2 sqrt(2) J / (-E - sqrt(E^2 - 8 J^2))).  At general
    K the bound state mixes the two relative-motion channels whose Green
    functions decay with different rates; the large-r behaviour is set by the
    slower one, extracted from the |f(E, 2)/f(E, 1)| step ratio to sidestep
    the sign alternation of component 1.
    """
    ratios = []
    for comp in (0, 1):
        a = relative_band_edges(K, p)[comp]
        if abs(E) > a:
            f1 = green_f(K, E, 1, comp, p)
            f2 = green_f(K, E, 2, comp, p)
            if f1 != 0.0:
                ratios.append(abs(f2 / f1))
    if not ratios:
        raise RelativeBandError(f"(K={K}, E={E}) not outside any relative band")
    rho = max(ratios)
    if rho >= 1.0 or rho <= 0.0:
        raise ValueError(f"degenerate decay ratio {rho} at (K={K}, E={E})")
    return -1.0 / np.log(rho)


def _signed_decay(E: float, beta: float) -> float:
    """Root x with |x| < 1 of beta (x + 1/x) = E: the signed per-site decay
    factor of a bound state in a 1D channel with hopping coefficient beta.

    The sign of beta decides whether the evanescent tail alternates: a
    positive (inverted-band) channel binds below the band with a staggered
    tail, a negative one with a smooth tail.
    """
    if beta == 0.0:
        return 0.0
    w = E / beta
    if abs(w) <= 2.0:
        raise RelativeBandError(f"E={E} inside the channel band (|E/beta| <= 2)")
    return w / 2.0 - np.sign(w) * np.sqrt(w * w / 4.0 - 1.0)


def _cell_components(K: float, E: float, p: WaveguideParams):
    """Bloch cell amplitudes at the contact, with signed decay factors.

    Returns (null, rho0, rho1) with psi_c(r) = psi_c(0) rho_c^|r|; the
    component ratio psi0(0)/psi1(0) is the null vector of the 2x2 contact
    matrix (stable SVD evaluation).  The channel hopping coefficients are
    beta_0 = -2J cos(K/2) and beta_1 = +2J sin(K/2), so the decay factors
    carry their own alternation signs and the formulas hold on the full
    momentum circle, not just K in [0, pi].
    """
    ucos, usin = _channel_scales(K, np.array([E]), p)
    ucos, usin = float(ucos[0]), float(usin[0])
    sign = 1.0 if p.stagger_phase is StaggerPhase.EVEN_PLUS else -1.0
    um = sign * p.U_m
    mat = np.array(
        [
            [1.0 - p.U_c / ucos, -um / ucos],
            [-um / usin, 1.0 - p.U_c / usin],
        ]
    )
    _, _, vt = np.linalg.svd(mat)
    null = vt[-1]
    beta0 = -2.0 * p.J * np.cos(K / 2.0)
    beta1 = 2.0 * p.J * np.sin(K / 2.0)
    rho0 = _signed_decay(E, beta0)
    rho1 = _signed_decay(E, beta1)
    return null, rho0, rho1


@dataclass
class DoublonWavefunction:
    """Bloch doublon eigenstate resolved on center-of-mass / relative grids."""

    K: float
    branch: Branch
    energy: float
    psi0_0: complex
    psi1_0: complex
    rho0: float
    rho1: float
    x_range: np.ndarray
    r_range: np.ndarray
    amplitudes: np.ndarray  # (len(x_range), len(r_range)), parity-masked
    psi_norm: float  # normalization factor of the cell function

    @property
    def component_ratio(self) -> float:
        """psi0(0) / psi1(0); +1 (lower) and -1 (upper) at K0."""
        return float(np.real(self.psi0_0 / self.psi1_0))

    def cell_function(self, x_c, r):
        """u_K(x_c, r) = psi0(r) + e^{i pi x_c} psi1(r), unnormalized scale.

        rho0 and rho1 are signed decay factors, so any tail alternation is
        carried by the powers themselves.
        """
        x_c = np.asarray(x_c, dtype=float)
        r = np.asarray(r)
        psi0 = self.psi0_0 * self.rho0 ** np.abs(r)
        psi1 = self.psi1_0 * self.rho1 ** np.abs(r)
        return psi0 + np.exp(1j * np.pi * x_c) * psi1

    def on_ring(self, b) -> np.ndarray:
        """Normalized coefficient vector on a TwoPhotonBasis of the same N.

        The ring separation r = m - n is folded into (-N/2, N/2]; folding
        re-represents the pair with one photon shifted by N, so the
        center-of-mass coordinate in every phase factor shifts by N/2 along
        with it.  Exact (up to wrap-around tails) for K on the ring grid
        2 pi j / N.
        """
        N = b.N
        m, n = b.m_of, b.n_of
        r = m - n  # <= 0 in this ordering
        wrap = r < -(N // 2)
        r = np.where(wrap, r + N, r)
        x_c = (m + n) / 2.0 + np.where(wrap, N / 2.0, 0.0)
        u = self.cell_function(x_c, r)
        coeff = np.exp(1j * self.K * x_c) * u
        coeff[m == n] /= np.sqrt(2.0)
        nrm = np.linalg.norm(coeff)
        return coeff / nrm


def doublon_wavefunction(
    K: float,
    branch: Branch,
    p: WaveguideParams,
    x_range=None,
    r_range=None,
) -> DoublonWavefunction:
    """Doublon Bloch wavefunction at (K, branch), normalized on its grid.

    Amplitudes follow e^{iK x_c} [psi0(r) + e^{i pi x_c} psi1(r)] on the
    physical support (m, n both integers: x_c integer for even r, half-odd
    for odd r; off-support grid points are zero).  At K0 the lower branch
    carries the (1 + e^{i pi x_c}) interference factor and vanishes on the
    weak-interaction sublattice.
    """
    roots = dispersion_roots(K, p)
    if not roots:
        raise RelativeBandError(f"no doublon branch resolved at K={K}")
    if branch is Branch.LOWER:
        E = roots[0]
    else:
        if len(roots) < 2:
            raise RelativeBandError(f"upper branch absent at K={K}")
        E = roots[1]
    null, rho0, rho1 = _cell_components(K, E, p)
    if x_range is None:
        x_range = np.arange(-10, 11)
    if r_range is None:
        r_range = np.arange(-12, 13)
    x_range = np.asarray(x_range, dtype=float)
    r_range = np.asarray(r_range, dtype=int)

    psi0_0, psi1_0 = null
    xg, rg = np.meshgrid(x_range, r_range, indexing="ij")
    psi0 = psi0_0 * rho0 ** np.abs(rg)
    psi1 = psi1_0 * rho1 ** np.abs(rg)
    amp = np.exp(1j * K * xg) * (psi0 + np.exp(1j * np.pi * xg) * psi1)
    # physical support: m = x_c + r/2 and n = x_c - r/2 must be integers
    mask = np.isclose((2 * xg + rg) % 2, 0) | np.isclose((2 * xg + rg) % 2, 2)
    amp = np.where(mask, amp, 0.0)
    nrm = np.linalg.norm(amp)
    amp = amp / nrm

    # cell normalization psi_norm: sum over one unit cell x_c in {0, 1} and
    # all r of |u / psi_norm|^2 equals 1
    rho = max(abs(rho0), abs(rho1), 1e-12)
    r_ext = int(min(4000, 40.0 / -np.log(rho) if rho < 1 else 4000)) + 25
    r_all = np.arange(-r_ext, r_ext + 1)
    u0 = np.abs(psi0_0) ** 2 * np.abs(rho0) ** (2 * np.abs(r_all))
    u1 = np.abs(psi1_0) ** 2 * np.abs(rho1) ** (2 * np.abs(r_all))
    psi_norm = float(np.sqrt(2.0 * (u0.sum() + u1.sum())))

    return DoublonWavefunction(
        K=K,
        branch=branch,
        energy=E,
        psi0_0=psi0_0,
        psi1_0=psi1_0,
        rho0=rho0,
        rho1=rho1,
        x_range=x_range,
        r_range=r_range,
        amplitudes=amp,
        psi_norm=psi_norm,
    )


@dataclass
class BandStructure:
    """Doublon branches on a K grid with edge curvature and pair lengths."""

    K: np.ndarray
    E_minus: np.ndarray  # NaN where the branch is not resolved
    E_plus: np.ndarray
    L_c_minus: np.ndarray
    L_c_plus: np.ndarray
    alpha: float
    alpha_window: float
    params: WaveguideParams
    K0: float = K0

    def gap_at(self, K_val: float = K0) -> float:
        i = int(np.argmin(np.abs(self.K - K_val)))
        return float(self.E_plus[i] - self.E_minus[i])

    @property
    def gap(self) -> float:
        return self.gap_at(K0)

    def e_minus_at(self, K_val: float) -> float:
        i = int(np.argmin(np.abs(self.K - K_val)))
        return float(self.E_minus[i])

    def band_bounds(self) -> dict:
        """Numerical min/max of each resolved branch over the grid."""
        out = {}
        for name, arr in (("minus", self.E_minus), ("plus", self.E_plus)):
            ok = np.isfinite(arr)
            out[name] = (
                (float(np.nanmin(arr)), float(np.nanmax(arr))) if ok.any() else None
            )
        return out


def fit_edge_curvature(
    K: np.ndarray, E_minus: np.ndarray, window: float = 0.05
) -> float:
    """Least-squares alpha in E_-(K) ~ E_-(K0) - alpha (K - K0)^2.

    The lower band curves downward away from its maximum at K0, so the
    band-edge detuning grows as delta + alpha (K - K0)^2 with alpha > 0.
    """
    sel = np.isfinite(E_minus) & (np.abs(K - K0) <= window)
    if sel.sum() < 3:
        raise ValueError("too few resolved lower-branch points in the fit window")
    x = (K[sel] - K0) ** 2
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, E_minus[sel], rcond=None)
    return float(-coef[1])


def solve_bands(
    p: WaveguideParams,
    K_grid=None,
    alpha_window: float = 0.05,
) -> BandStructure:
    """Resolve both doublon branches over a K grid by bracketed bisection.

    Default grid: 201 uniform points on [0, pi] (K <-> -K and K <-> K + 2 pi
    are exact symmetries of the determinant and never recomputed).  A branch
    that merges into the relative-motion continuum at some K is reported as
    NaN there rather than raising.
    """
    if p.U_c <= 0:
        raise ValueError("doublon bands require attractive U_c > 0")
    if K_grid is None:
        K_grid = np.linspace(0.0, np.pi, 201)
    K_grid = np.asarray(K_grid, dtype=float)
    e_min = np.full(K_grid.shape, np.nan)
    e_plu = np.full(K_grid.shape, np.nan)
    l_min = np.full(K_grid.shape, np.nan)
    l_plu = np.full(K_grid.shape, np.nan)
    for i, K in enumerate(K_grid):
        roots = dispersion_roots(K, p)
        if len(roots) >= 1:
            e_min[i] = roots[0]
            try:
                l_min[i] = correlation_length(K, roots[0], p, Branch.LOWER)
            except ValueError:
                pass
        if len(roots) >= 2:
            e_plu[i] = roots[1]
            try:
                l_plu[i] = correlation_length(K, roots[1], p, Branch.UPPER)
            except ValueError:
                pass
    alpha = fit_edge_curvature(K_grid, e_min, alpha_window)
    return BandStructure(
        K=K_grid,
        E_minus=e_min,
        E_plus=e_plu,
        L_c_minus=l_min,
        L_c_plus=l_plu,
        alpha=alpha,
        alpha_window=alpha_window,
        params=p,
    )


def correlation_length_k0(E: float, p: WaveguideParams) -> float:
    """L_c at the band edge: 1 / ln(2 sqrt(2) J / (-E - sqrt(E^2 - 8 J^2)))."""
    root = np.sqrt(E * E - 8.0 * p.J**2)
    return 1.0 / np.log(2.0 * np.sqrt(2.0) * p.J / (-E - root))
