"""Parameter containers for gas absorption with an instantaneous reaction A + B -> 2E."""

from dataclasses import dataclass, field

import numpy as np

# moles of E formed per mole of A (and of B) consumed
NU_E = 2.0


class DegenerateMatrixError(ValueError):
    """Diffusion matrix with repeated eigenvalues that is not diagonal."""


class IllPosedMatrixError(ValueError):
    """Diffusion matrix whose eigenvalues are not real and positive."""


@dataclass(frozen=True)
class DiffusionMatrix:
    """
    2x2 block of practical diffusion coefficients [m^2/s].

    ``flux = -D @ grad(c)`` for the concentration pair ``c = (c_1, c_2)``.
    """

    d11: float
    d12: float
    d21: float
    d22: float

    @property
    def matrix(self):
        return np.array([[self.d11, self.d12], [self.d21, self.d22]], dtype=float)

    @property
    def is_diagonal(self):
        return self.d12 == 0.0 and self.d21 == 0.0

    def eigenvalues(self):
        tr = self.d11 + self.d22
        det = self.d11 * self.d22 - self.d12 * self.d21
        disc = tr * tr - 4.0 * det
        if disc < 0.0:
            raise IllPosedMatrixError(
                f"diffusion matrix has complex eigenvalues (discriminant {disc:.3e})"
            )
        root = np.sqrt(disc)
        mu = np.array([(tr + root) / 2.0, (tr - root) / 2.0])
        if np.any(mu <= 0.0):
            raise IllPosedMatrixError(
                f"diffusion matrix eigenvalues {mu} are not positive; parabolic system ill-posed"
            )
        return mu

    def validate(self):
        if self.d11 <= 0.0 or self.d22 <= 0.0:
            raise ValueError("main diffusion coefficients must be positive")
        self.eigenvalues()


@dataclass(frozen=True)
class SorptionParams:
    """
    Chemisorption scenario in SI units.

    Attributes
    ----------
    D : DiffusionMatrix
        (B, E) block: ``d11=D_BB, d12=D_BE, d21=D_EB, d22=D_EE``.
    D_AA, D_AE, D_EA : float
        (A, E) block coefficients; its E-E entry is ``D.d22``.
    alpha : float
        Gas-phase mass transfer coefficient [m/s].
    C_A_inf : float
        Concentration of A in the gas core [mol/m^3].
    C_B_inf : float
        Bulk concentration of the liquid reactant [mol/m^3].
    henry : float
        Henry's constant [Pa m^3/mol]; the interfacial liquid concentration in
        equilibrium with partial pressure ``p`` is ``p / henry``.
    p_A : float
        Partial pressure of A in the gas core [Pa].
    layer_depth : float
        Depth of the computational liquid layer [m].
    """

    D: DiffusionMatrix
    D_AA: float
    D_AE: float
    D_EA: float
    alpha: float
    C_A_inf: float
    C_B_inf: float
    henry: float
    p_A: float
    layer_depth: float = 2e-3

    @property
    def D_BB(self):
        return self.D.d11

    @property
    def D_BE(self):
        return self.D.d12

    @property
    def D_EB(self):
        return self.D.d21

    @property
    def D_EE(self):
        return self.D.d22

    @property
    def zone1_matrix(self):
        return DiffusionMatrix(self.D_AA, self.D_AE, self.D_EA, self.D_EE)

    @property
    def surface_flux(self):
        """Molar flux of A through the gas film while the interface stays A-free."""
        return self.alpha * self.C_A_inf

    def gas_film_flux(self, C_AS):
        """Flux of A into the liquid for interfacial concentration ``C_AS``."""
        return self.alpha * self.C_A_inf * (1.0 - self.henry * C_AS / self.p_A)

    def validate(self):
        self.D.validate()
        self.zone1_matrix.validate()
        for name in ("alpha", "C_A_inf", "C_B_inf", "henry", "p_A", "layer_depth"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        return self

    def replace(self, **changes):
        """Return a copy with fields (including ``D_BB`` style matrix entries) changed."""
        keys = {"D_BB": "d11", "D_BE": "d12", "D_EB": "d21", "D_EE": "d22"}
        dchanges = {keys[k]: changes.pop(k) for k in list(changes) if k in keys}
        D = self.D
        if dchanges:
            D = DiffusionMatrix(**{**D.__dict__, **dchanges})
        values = {**self.__dict__, "D": D, **changes}
        return SorptionParams(**values)


def default_params(**changes):
    """
    Cross-diffusive parameter set used by demos and tests.

    The B-E coupling is strong enough that the plane velocity rises to an
    interior maximum after breakthrough; the layer is deep enough for runs to
    about 200 t*.
    """
    base = SorptionParams(
        D=DiffusionMatrix(1.0e-9, 0.3e-9, 0.3e-9, 0.4e-9),
        D_AA=1.5e-9,
        D_AE=0.05e-9,
        D_EA=0.05e-9,
        alpha=3.0e-4,
        C_A_inf=0.4,
        C_B_inf=10.0,
        henry=100.0,
        p_A=1.0e3,
        layer_depth=8.0e-3,
    )
    return base.replace(**changes) if changes else base
