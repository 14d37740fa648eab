"""
Surface-reaction phase (0 < t <= t*) of chemisorption with cross-diffusion.

While the reaction plane sits on the interface the (B, E) pair obeys the
coupled diffusion system ``dc/dt = D d2c/dx2`` on a semi-infinite layer with
prescribed interfacial fluxes (B consumed, E produced at twice that rate).
Diagonalising ``D`` decouples it into two constant-flux penetration problems,
each with the closed form

    f(x, t; S) = 2 sqrt(t / (pi S)) exp(-x^2 S / (4 t)) - x erfc(x sqrt(S) / (2 sqrt(t)))

where ``S = 1/mu`` is the inverse eigenvalue of the mode. The coefficients
``S_i, lambda_i, R_i, T_i`` reproduce the Laplace-image representation used
in the literature; the modal amplitudes are what the evaluators use.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .params import NU_E, DegenerateMatrixError, SorptionParams


class PhaseError(ValueError):
    """Evaluation requested outside the surface-reaction phase."""


@dataclass(frozen=True)
class LaplaceCoefficients:
    """
    Eigen-structure and boundary-condition algebra of the (B, E) problem.

    ``lambda_i`` is the E/B ratio of eigenvector ``i`` (``inf`` for a pure-E
    mode). ``R_i = lambda_i`` and ``(T_1, T_2)`` solve ``system_matrix @ T =
    system_rhs``; both are ``nan`` when an eigenvector has no B component, in
    which case only the modal amplitudes are meaningful.
    """

    S1: float
    S2: float
    lambda1: float
    lambda2: float
    R1: float
    R2: float
    T1: float
    T2: float
    eigenvectors: np.ndarray  # columns, normalised to unit B entry when possible
    amplitudes: np.ndarray  # per unit alpha*C_A_inf: c = c_inf + q * sum(a_i v_i f_i)
    system_matrix: np.ndarray = field(repr=False)
    system_rhs: np.ndarray = field(repr=False)
    diagonal: bool = False

    @property
    def S(self):
        return np.array([self.S1, self.S2])

    @property
    def closed_form_finite(self):
        """True when all of S, lambda, R, T are finite."""
        vals = [self.lambda1, self.lambda2, self.T1, self.T2]
        return bool(np.all(np.isfinite(vals)))

    @property
    def K1(self):
        return 2.0 * self.T2 + self.T1

    @property
    def K2(self):
        return 2.0 * self.T2 * self.R1 + self.T1 * self.R2

    def as_record(self):
        return {
            "S1": self.S1,
            "S2": self.S2,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "R1": self.R1,
            "R2": self.R2,
            "T1": self.T1,
            "T2": self.T2,
            "system_matrix": self.system_matrix.tolist(),
            "system_rhs": self.system_rhs.tolist(),
            "diagonal": self.diagonal,
        }


def _boundary_gradient():
    # D @ dc/dx at the interface per unit alpha*C_A_inf (Eqs for B and E fluxes)
    return np.array([1.0, -NU_E])


def derive_laplace_coefficients(params: SorptionParams) -> LaplaceCoefficients:
    """
    Diagonalise the (B, E) diffusion matrix and solve the boundary algebra.

    Raises
    ------
    DegenerateMatrixError
        Repeated eigenvalue of a non-diagonal matrix.
    IllPosedMatrixError
        Complex or non-positive eigenvalues.
    """
    params.D.validate()
    Dm = params.D.matrix
    if params.D.is_diagonal:
        mu = np.array([Dm[0, 0], Dm[1, 1]])
        P = np.eye(2)
        diagonal = True
    else:
        mu = params.D.eigenvalues()
        if abs(mu[0] - mu[1]) <= 1e-12 * (mu[0] + mu[1]):
            raise DegenerateMatrixError(
                "repeated eigenvalue S1 == S2 of a non-diagonal diffusion matrix; "
                "use the diagonal-limit branch (set the cross coefficients to zero)"
            )
        P = np.empty((2, 2))
        for i, m in enumerate(mu):
            # null vector of (D - m I); pick the better-conditioned row
            a, b = Dm[0, 0] - m, Dm[0, 1]
            c, d = Dm[1, 0], Dm[1, 1] - m
            if abs(a) + abs(b) >= abs(c) + abs(d):
                v = np.array([-b, a])
            else:
                v = np.array([-d, c])
            P[:, i] = v / np.linalg.norm(v)
        # mode 1 is the one with the larger B share
        if abs(P[0, 1]) > abs(P[0, 0]):
            P = P[:, ::-1]
            mu = mu[::-1]
        diagonal = False
    for i in range(2):
        if abs(P[0, i]) > 1e-14 * np.abs(P[:, i]).max():
            P[:, i] /= P[0, i]
        elif P[1, i] != 0.0:
            P[:, i] /= P[1, i]

    S = 1.0 / mu
    g = _boundary_gradient()
    amplitudes = -np.linalg.solve(P * mu, g)

    finite = abs(P[0, 0]) == 1.0 and abs(P[0, 1]) == 1.0
    if finite:
        lam = P[1, :].copy()
    else:
        lam = np.where(np.abs(P[0, :]) == 1.0, P[1, :], np.inf)
    system_matrix = np.array([[1.0, 2.0], [lam[1], 2.0 * lam[0]]])
    system_rhs = np.array([-S[0] * (lam[1] + NU_E), -S[1] * (lam[0] + NU_E)])
    if finite and abs(lam[1] - lam[0]) > 0.0:
        T = np.linalg.solve(system_matrix, system_rhs)
    else:
        T = np.array([np.nan, np.nan])
    return LaplaceCoefficients(
        S1=float(S[0]),
        S2=float(S[1]),
        lambda1=float(lam[0]),
        lambda2=float(lam[1]),
        R1=float(lam[0]),
        R2=float(lam[1]),
        T1=float(T[0]),
        T2=float(T[1]),
        eigenvectors=P,
        amplitudes=amplitudes,
        system_matrix=system_matrix,
        system_rhs=system_rhs,
        diagonal=diagonal,
    )


def penetration_kernel(x, t, S):
    """Constant-flux penetration profile ``f(x, t; S)``; ``df/dx(0) = -1``."""
    x = np.asarray(x, dtype=float)
    rt = np.sqrt(t)
    arg = x * np.sqrt(S) / (2.0 * rt)
    return 2.0 * np.sqrt(t / (np.pi * S)) * np.exp(-arg * arg) - x * erfc(arg)


def laplace_image(params, coeffs, x, p):
    """
    Laplace images of (C_B, C_E) at transform variable ``p``.

    Used to verify that the coefficients satisfy the transformed equations and
    boundary conditions.
    """
    q = params.surface_flux
    x = np.asarray(x, dtype=float)
    cB = params.C_B_inf / p + 0.0 * x
    cE = 0.0 * x
    for i in range(2):
        Si = coeffs.S[i]
        mode = coeffs.amplitudes[i] * q * np.exp(-np.sqrt(Si * p) * x) / (p * np.sqrt(p * Si))
        cB = cB + coeffs.eigenvectors[0, i] * mode
        cE = cE + coeffs.eigenvectors[1, i] * mode
    return cB, cE


def compute_tstar(params: SorptionParams, coeffs: LaplaceCoefficients) -> float:
    """Breakthrough time at which surface B is exhausted."""
    q = params.surface_flux
    if coeffs.closed_form_finite:
        bracket = coeffs.K2 / np.sqrt(coeffs.S2) - coeffs.K1 / np.sqrt(coeffs.S1)
        denom = 4.0 * q * q * bracket * bracket
        if denom == 0.0 or not np.isfinite(denom):
            raise ValueError("degenerate parameters: zero denominator in breakthrough time")
        dR = coeffs.R2 - coeffs.R1
        return float(params.C_B_inf ** 2 * np.pi * dR * dR / denom)
    # surface B slope in sqrt(t): sum_i a_i v_Bi * 2/sqrt(pi S_i)
    slope = q * np.sum(coeffs.amplitudes * coeffs.eigenvectors[0, :] * 2.0 / np.sqrt(np.pi * coeffs.S))
    if slope >= 0.0:
        raise ValueError("degenerate parameters: surface B does not deplete")
    return float((params.C_B_inf / slope) ** 2)


def _check_phase(params, coeffs, t, t_star=None):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0):
        raise PhaseError("time must be positive")
    if t_star is None:
        t_star = compute_tstar(params, coeffs)
    if np.any(t > t_star * (1.0 + 1e-12)):
        raise PhaseError(
            f"t = {np.max(t):.6g} s exceeds t* = {t_star:.6g} s; use solve_moving_plane"
        )
    return t


def pre_tstar_profiles(params, coeffs, x, t, t_star=None):
    """(C_B, C_E) in the liquid for ``0 < t <= t*``."""
    t = _check_phase(params, coeffs, t, t_star)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("x must be non-negative")
    q = params.surface_flux
    cB = params.C_B_inf + 0.0 * x * t
    cE = 0.0 * x * t
    for i in range(2):
        mode = q * coeffs.amplitudes[i] * penetration_kernel(x, t, coeffs.S[i])
        cB = cB + coeffs.eigenvectors[0, i] * mode
        cE = cE + coeffs.eigenvectors[1, i] * mode
    return cB, cE


def surface_concentrations(params, coeffs, t, t_star=None):
    """Interfacial (C_BS, C_ES); both vary as sqrt(t)."""
    t = _check_phase(params, coeffs, t, t_star)
    q = params.surface_flux
    root = np.sqrt(t / np.pi)
    if coeffs.closed_form_finite:
        pref = 2.0 * q / (coeffs.R2 - coeffs.R1)
        K1s = coeffs.K1 / np.sqrt(coeffs.S1)
        K2s = coeffs.K2 / np.sqrt(coeffs.S2)
        cBS = pref * (K1s - K2s) * root + params.C_B_inf
        cES = pref * (coeffs.lambda1 * K1s - coeffs.lambda2 * K2s) * root
        return cBS, cES
    w = 2.0 * q * coeffs.amplitudes / np.sqrt(coeffs.S)
    cBS = params.C_B_inf + np.sum(w * coeffs.eigenvectors[0, :]) * root
    cES = np.sum(w * coeffs.eigenvectors[1, :]) * root
    return cBS, cES


def max_product_surface_conc(params, coeffs):
    """Interfacial E at breakthrough, where it peaks; independent of alpha and C_A_inf."""
    if coeffs.closed_form_finite:
        K1, K2 = coeffs.K1, coeffs.K2
        s1, s2 = np.sqrt(coeffs.S1), np.sqrt(coeffs.S2)
        den = s2 * K1 - s1 * K2
        if den == 0.0:
            raise ValueError("degenerate parameters: zero denominator in C_ES(t*)")
        # sign follows from C_BS(t*) = 0 in the surface relations
        return float(-params.C_B_inf * (coeffs.lambda1 * s2 * K1 - coeffs.lambda2 * s1 * K2) / den)
    w = coeffs.amplitudes / np.sqrt(coeffs.S)
    den = np.sum(w * coeffs.eigenvectors[0, :])
    if den == 0.0:
        raise ValueError("degenerate parameters: zero denominator in C_ES(t*)")
    return float(-params.C_B_inf * np.sum(w * coeffs.eigenvectors[1, :]) / den)
