"""Parameter types for the staggered Kerr cavity chain and the coupled emitters."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Boundary(enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


class StaggerPhase(enum.Enum):
    """Which site parity carries the larger on-site interaction U_c + U_m."""

    EVEN_PLUS = "even_plus"
    ODD_PLUS = "odd_plus"


@dataclass(frozen=True)
class WaveguideParams:
    """Couplings and geometry of the cavity array.

    All energies are in units of the hopping ``J`` (canonically 1.0).  Site n
    carries an attractive Kerr term of strength U_n = U_c + (-1)^n U_m under
    EVEN_PLUS (parity flipped under ODD_PLUS); the two-photon on-site energy
    is -U_n.
    """

    N: int
    U_c: float
    U_m: float = 0.0
    J: float = 1.0
    boundary: Boundary = Boundary.PERIODIC
    stagger_phase: StaggerPhase = StaggerPhase.EVEN_PLUS

    def __post_init__(self) -> None:
        if self.J <= 0:
            raise ValueError(f"hopping J must be positive, got {self.J}")
        if self.N < 4:
            raise ValueError(f"need at least 4 cavities, got N={self.N}")
        if self.boundary is Boundary.PERIODIC and self.N % 2 != 0:
            # the two-site staggering pattern must close around the ring
            raise ValueError(f"periodic staggering requires even N, got N={self.N}")

    def u_site(self, n: int) -> float:
        """On-site interaction strength U_n."""
        sign = 1.0 if self.stagger_phase is StaggerPhase.EVEN_PLUS else -1.0
        return self.U_c + sign * (-1) ** (n % 2) * self.U_m

    def u_profile(self):
        import numpy as np

        n = np.arange(self.N)
        sign = 1.0 if self.stagger_phase is StaggerPhase.EVEN_PLUS else -1.0
        return self.U_c + sign * np.where(n % 2 == 0, 1.0, -1.0) * self.U_m


@dataclass(frozen=True)
class Emitter:
    """A two-level emitter: rotating-frame frequency, coupling strength, site.

    ``omega`` may be negative (frequencies are measured from the cavity
    frequency); ``site`` indexes the cavity the emitter couples to.
    """

    omega: float
    g: float
    site: int


@dataclass(frozen=True)
class EmitterSet:
    emitters: tuple[Emitter, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "emitters", tuple(self.emitters))

    def __len__(self) -> int:
        return len(self.emitters)

    def __iter__(self):
        return iter(self.emitters)

    def __getitem__(self, i: int) -> Emitter:
        return self.emitters[i]

    def validate_sites(self, params: WaveguideParams) -> None:
        for k, em in enumerate(self.emitters):
            if not 0 <= em.site < params.N:
                raise ValueError(
                    f"emitter {k} site {em.site} outside lattice [0, {params.N})"
                )

    def single_photon_gap_margin(self, params: WaveguideParams) -> float:
        """min_i ||omega_i| - 2J| / g_i, the margin for adiabatic elimination.

        The single-photon band spans [-2J, 2J]; eliminating the one-photon
        amplitudes requires every emitter to sit well outside it.
        """
        return min(
            abs(abs(em.omega) - 2.0 * params.J) / em.g for em in self.emitters
        )

    def require_single_photon_gap(
        self, params: WaveguideParams, factor: float = 5.0
    ) -> None:
        margin = self.single_photon_gap_margin(params)
        if margin < factor:
            raise ValueError(
                "single-photon elimination invalid: "
                f"min ||omega| - 2J|/g = {margin:.3g} < {factor:.3g}"
            )

    def require_in_single_photon_gap(self, params: WaveguideParams) -> None:
        """Every emitter frequency must lie outside the single-photon band."""
        for k, em in enumerate(self.emitters):
            if abs(em.omega) <= 2.0 * params.J:
                raise ValueError(
                    f"emitter {k} frequency {em.omega} resonant with the "
                    f"single-photon band [-2J, 2J]"
                )


def collocated_pair(omega: float, g: float, site: int) -> EmitterSet:
    """Two identical emitters coupled to the same cavity."""
    return EmitterSet((Emitter(omega, g, site), Emitter(omega, g, site)))


def emitter_pair(omega: float, g: float, site1: int, site2: int) -> EmitterSet:
    return EmitterSet((Emitter(omega, g, site1), Emitter(omega, g, site2)))
