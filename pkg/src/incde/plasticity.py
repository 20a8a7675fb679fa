"""Rate-independent plasticity via return mapping.

Two ground-truth material models are provided:

* J2 (von Mises) with linear combined isotropic/kinematic hardening.  The
  composite parameter ``beta_hat`` splits the plastic modulus: ``beta_hat=1``
  is purely isotropic, ``beta_hat=0`` purely kinematic (Prager).
* Drucker-Prager with a non-associative flow rule.  Cone coefficients use
  the compression-cone fit ``a = 6 sin(phi) / (3 - sin(phi))`` and the
  cohesion intercept is calibrated so that uniaxial *tension* yields exactly
  at ``sigma_y``.

Both return maps are closed-form for linear hardening, return the consistent
algorithmic tangent, and keep the yield function at the updated state within
``YIELD_TOL`` of zero after a plastic step.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .voigt import (
    DEV_ENG,
    IDENTITY,
    W_STRESS,
    ElasticParams,
    check_finite,
    elastic_stiffness,
    pressure_deviator,
)

#: Absolute tolerance (MPa) for the trial yield check.
YIELD_TOL = 1e-9


@dataclass(frozen=True)
class J2Params:
    """Von Mises material with linear combined hardening.

    ``Hprime`` is the total plastic modulus; ``beta_hat`` in [0, 1] sends
    ``beta_hat * Hprime`` to isotropic growth of the yield stress and the
    remainder to the kinematic back stress.
    """

    elastic: ElasticParams
    sigma_y: float
    Hprime: float = 0.0
    beta_hat: float = 1.0

    def __post_init__(self):
        if not (self.sigma_y > 0.0):
            raise ValueError("sigma_y must be positive")
        if self.Hprime < 0.0:
            raise ValueError("Hprime must be non-negative")
        if not (0.0 <= self.beta_hat <= 1.0):
            raise ValueError("beta_hat must lie in [0, 1]")


@dataclass(frozen=True)
class DpParams:
    """Drucker-Prager material with friction angle phi and dilation angle psi.

    Angles are in degrees and must satisfy 0 <= psi <= phi < 90.  ``Hprime``
    hardens the cohesion intercept linearly in the plastic multiplier;
    ``Hprime = 0`` gives perfect plasticity.
    """

    elastic: ElasticParams
    sigma_y: float
    phi: float = 30.0
    psi: float = 25.0
    Hprime: float = 0.0

    def __post_init__(self):
        if not (self.sigma_y > 0.0):
            raise ValueError("sigma_y must be positive")
        if not (0.0 <= self.psi <= self.phi < 90.0):
            raise ValueError("angles must satisfy 0 <= psi <= phi < 90 degrees")

    @property
    def cone_slope(self):
        """Yield-cone pressure coefficient from the friction angle."""
        s = np.sin(np.radians(self.phi))
        return 6.0 * s / (3.0 - s)

    @property
    def flow_slope(self):
        """Plastic-potential pressure coefficient from the dilation angle."""
        s = np.sin(np.radians(self.psi))
        return 6.0 * s / (3.0 - s)

    @property
    def cohesion_intercept(self):
        """Intercept b0 so that uniaxial tension yields at sigma_y."""
        return self.sigma_y * (1.0 + self.cone_slope / 3.0)


@dataclass
class OracleState:
    """Internal state of the return-mapping material at one point."""

    eps_p: np.ndarray = field(default_factory=lambda: np.zeros(6))
    alpha: float = 0.0
    back_stress: np.ndarray = field(default_factory=lambda: np.zeros(6))
    apex_return: bool = False

    def copy(self):
        return OracleState(self.eps_p.copy(), self.alpha,
                           self.back_stress.copy(), self.apex_return)


def j2_yield(sigma, state, p: J2Params):
    """Yield function q_rel - (sigma_y + beta_hat * Hprime * alpha)."""
    _, s = pressure_deviator(sigma)
    xi = s - state.back_stress
    q_rel = np.sqrt(1.5 * np.dot(W_STRESS * xi, xi))
    return q_rel - (p.sigma_y + p.beta_hat * p.Hprime * state.alpha)


def j2_return_map(state: OracleState, eps_new, p: J2Params):
    """One strain-driven step of J2 plasticity.

    Parameters
    ----------
    state : OracleState
        Converged state from the previous step (not mutated).
    eps_new : array (6,)
        Total strain at the new step, engineering shear convention.
    p : J2Params

    Returns
    -------
    sigma : ndarray (6,)
    new_state : OracleState
    tangent : ndarray (6, 6)
        Consistent algorithmic tangent d sigma / d eps.
    """
    eps_new = check_finite(eps_new, "strain")
    Ce = elastic_stiffness(p.elastic)
    mu = p.elastic.mu

    sigma_tr = Ce @ (eps_new - state.eps_p)
    _, s_tr = pressure_deviator(sigma_tr)
    xi = s_tr - state.back_stress
    q_tr = np.sqrt(1.5 * np.dot(W_STRESS * xi, xi))
    f_tr = q_tr - (p.sigma_y + p.beta_hat * p.Hprime * state.alpha)

    if f_tr <= YIELD_TOL:
        return sigma_tr, state.copy(), Ce

    # Radial return: the relative deviatoric direction is preserved.
    dgamma = f_tr / (3.0 * mu + p.Hprime)
    n_hat = xi / q_tr                       # stress-like, scaled by 1/q
    sigma = sigma_tr - 3.0 * mu * dgamma * n_hat

    # Flow in tensor components is dgamma * (3/2) xi/q; engineering storage
    # doubles the shear slots.
    d_eps_p = 1.5 * dgamma * n_hat
    d_eps_p[3:] *= 2.0

    new_state = OracleState(
        eps_p=state.eps_p + d_eps_p,
        alpha=state.alpha + dgamma,
        back_stress=state.back_stress + (1.0 - p.beta_hat) * p.Hprime * dgamma * n_hat,
        apex_return=False,
    )

    # Consistent tangent for the radial return with linear hardening.
    N = 1.5 * n_hat                          # df/dsigma, stress-like Voigt
    c1 = 6.0 * mu**2 * dgamma / q_tr
    c2 = 4.0 * mu**2 * (1.0 / (3.0 * mu + p.Hprime) - dgamma / q_tr)
    tangent = Ce - c1 * DEV_ENG - c2 * np.outer(N, N)
    return sigma, new_state, tangent


def dp_yield(sigma, state, p: DpParams):
    """Yield function q + a*p_mean - (b0 + Hprime * alpha)."""
    pm, s = pressure_deviator(sigma)
    q = np.sqrt(1.5 * np.dot(W_STRESS * s, s))
    return q + p.cone_slope * pm - (p.cohesion_intercept + p.Hprime * state.alpha)


def dp_return_map(state: OracleState, eps_new, p: DpParams):
    """One strain-driven step of Drucker-Prager plasticity.

    Regular returns use the closed-form multiplier for linear hardening and
    a consistent tangent; trial states beyond the cone apex are projected to
    the (hardened) apex, flagged via ``new_state.apex_return``, and get a
    central finite-difference tangent.
    """
    eps_new = check_finite(eps_new, "strain")
    Ce = elastic_stiffness(p.elastic)
    mu, K = p.elastic.mu, p.elastic.bulk
    a, a_psi = p.cone_slope, p.flow_slope
    b = p.cohesion_intercept + p.Hprime * state.alpha

    sigma_tr = Ce @ (eps_new - state.eps_p)
    p_tr, s_tr = pressure_deviator(sigma_tr)
    q_tr = np.sqrt(1.5 * np.dot(W_STRESS * s_tr, s_tr))
    f_tr = q_tr + a * p_tr - b

    if f_tr <= YIELD_TOL:
        return sigma_tr, state.copy(), Ce

    denom = 3.0 * mu + K * a * a_psi + p.Hprime
    dgamma = f_tr / denom

    if q_tr - 3.0 * mu * dgamma < 0.0:
        return _dp_apex_return(state, eps_new, sigma_tr, p_tr, q_tr, p, Ce, mu, K)

    n_hat = s_tr / q_tr
    sigma = sigma_tr - 3.0 * mu * dgamma * n_hat - K * a_psi * dgamma * IDENTITY

    # Non-associative flow m = (3/2) s/q + (a_psi/3) I in tensor components.
    d_eps_p = 1.5 * dgamma * n_hat
    d_eps_p[3:] *= 2.0
    d_eps_p[:3] += a_psi / 3.0 * dgamma

    new_state = OracleState(
        eps_p=state.eps_p + d_eps_p,
        alpha=state.alpha + dgamma,
        back_stress=state.back_stress.copy(),
        apex_return=False,
    )

    # Consistent tangent: differentiate sigma(eps) through dgamma, s_tr, q_tr.
    N = 1.5 * n_hat
    r_row = (2.0 * mu * N + a * K * IDENTITY) / denom
    col = 3.0 * mu * n_hat + K * a_psi * IDENTITY
    tangent = (Ce
               - np.outer(col, r_row)
               - 6.0 * mu**2 * dgamma / q_tr * DEV_ENG
               + 9.0 * mu**2 * dgamma / q_tr * np.outer(n_hat, n_hat))
    return sigma, new_state, tangent


def _dp_apex_return(state, eps_new, sigma_tr, p_tr, q_tr, p, Ce, mu, K):
    # Deviatoric multiplier that zeroes q drives the hardening; the stress is
    # then the hydrostatic apex point of the hardened cone, which keeps the
    # yield function exactly zero.
    dgamma = q_tr / (3.0 * mu)
    alpha_new = state.alpha + dgamma
    p_apex = (p.cohesion_intercept + p.Hprime * alpha_new) / p.cone_slope
    sigma = p_apex * IDENTITY

    # Plastic strain chosen so the elastic relation holds exactly.
    eps_p_new = eps_new - np.linalg.solve(Ce, sigma)
    new_state = OracleState(eps_p=eps_p_new, alpha=alpha_new,
                            back_stress=state.back_stress.copy(),
                            apex_return=True)

    # Apex is a vertex of the yield surface: use a finite-difference tangent.
    h = 1e-8
    tangent = np.zeros((6, 6))
    for j in range(6):
        ep = eps_new.copy()
        em = eps_new.copy()
        ep[j] += h
        em[j] -= h
        sp, _, _ = dp_return_map(state, ep, p)
        sm, _, _ = dp_return_map(state, em, p)
        tangent[:, j] = (sp - sm) / (2.0 * h)
    return sigma, new_state, tangent


def return_map(state, eps_new, params):
    """Dispatch to the return map matching the parameter type."""
    if isinstance(params, J2Params):
        return j2_return_map(state, eps_new, params)
    if isinstance(params, DpParams):
        return dp_return_map(state, eps_new, params)
    raise TypeError(f"unsupported material parameters: {type(params).__name__}")


def yield_function(sigma, state, params):
    if isinstance(params, J2Params):
        return j2_yield(sigma, state, params)
    if isinstance(params, DpParams):
        return dp_yield(sigma, state, params)
    raise TypeError(f"unsupported material parameters: {type(params).__name__}")


def oracle_stress_series(params, series):
    """Label a strain series (T, 6) with return-mapping stresses (T, 6).

    The series must start at zero strain.  Errors in a step are re-raised
    with the offending step index attached.
    """
    series = np.asarray(series, dtype=float)
    if series.ndim != 2 or series.shape[1] != 6:
        raise ValueError(f"strain series must have shape (T, 6), got {series.shape}")
    if np.any(series[0] != 0.0):
        raise ValueError("strain series must start at zero strain")

    stresses = np.zeros_like(series)
    state = OracleState()
    for t in range(series.shape[0]):
        try:
            sigma, state, _ = return_map(state, series[t], params)
        except ValueError as exc:
            raise ValueError(f"step {t}: {exc}") from exc
        stresses[t] = sigma
    return stresses
