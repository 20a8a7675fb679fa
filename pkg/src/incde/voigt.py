"""Voigt-notation tensor algebra and isotropic linear elasticity.

Symmetric second-order tensors (strain and stress) are stored as length-6
vectors ordered ``[11, 22, 33, 23, 13, 12]``.  Strain vectors carry
*engineering* shear components (gamma = 2 * eps) in the last three slots;
stress vectors carry plain tensor components.  Every contraction in this
module states how the factor of two is handled.

All arrays are float64.  Stress is in MPa, strain is dimensionless.
"""

from dataclasses import dataclass

import numpy as np

# Index sets for the fixed component order [11, 22, 33, 23, 13, 12].
AXIAL = slice(0, 3)
SHEAR = slice(3, 6)

#: Voigt identity (the unit second-order tensor): shear slots are zero.
IDENTITY = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])

#: Contraction weights for stress-like vectors: a:b = sum(w * a * b)
#: counts each off-diagonal tensor component twice.
W_STRESS = np.array([1.0, 1.0, 1.0, 2.0, 2.0, 2.0])


def check_finite(v, name="voigt vector"):
    """Validate a 6-component vector: shape (6,) and finite entries only."""
    v = np.asarray(v, dtype=float)
    if v.shape != (6,):
        raise ValueError(f"{name} must have shape (6,), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def strain_to_tensor(eps):
    """Engineering-shear strain vector -> symmetric 3x3 tensor (halves shear)."""
    e = np.asarray(eps, dtype=float)
    return np.array([
        [e[0], e[5] / 2.0, e[4] / 2.0],
        [e[5] / 2.0, e[1], e[3] / 2.0],
        [e[4] / 2.0, e[3] / 2.0, e[2]],
    ])


def tensor_to_strain(t):
    """Symmetric 3x3 tensor -> engineering-shear strain vector (doubles shear)."""
    t = np.asarray(t, dtype=float)
    return np.array([t[0, 0], t[1, 1], t[2, 2],
                     2.0 * t[1, 2], 2.0 * t[0, 2], 2.0 * t[0, 1]])


def stress_to_tensor(sig):
    """Stress vector -> symmetric 3x3 tensor (no shear factor)."""
    s = np.asarray(sig, dtype=float)
    return np.array([
        [s[0], s[5], s[4]],
        [s[5], s[1], s[3]],
        [s[4], s[3], s[2]],
    ])


def tensor_to_stress(t):
    """Symmetric 3x3 tensor -> stress vector (no shear factor)."""
    t = np.asarray(t, dtype=float)
    return np.array([t[0, 0], t[1, 1], t[2, 2], t[1, 2], t[0, 2], t[0, 1]])


def stress_double_dot(a, b):
    """Full contraction a:b of two stress-like vectors (shear counted twice)."""
    return float(np.dot(W_STRESS * np.asarray(a), np.asarray(b)))


@dataclass(frozen=True)
class ElasticParams:
    """Isotropic elastic constants: Young's modulus (MPa) and Poisson ratio."""

    E: float
    nu: float

    def __post_init__(self):
        if not (self.E > 0.0):
            raise ValueError(f"Young's modulus must be positive, got {self.E}")
        if not (-1.0 < self.nu < 0.5):
            raise ValueError(f"Poisson ratio must lie in (-1, 0.5), got {self.nu}")

    @property
    def mu(self):
        """Shear modulus."""
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def lam(self):
        """First Lame constant."""
        return self.E * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))

    @property
    def bulk(self):
        """Bulk modulus."""
        return self.E / (3.0 * (1.0 - 2.0 * self.nu))


def elastic_stiffness(p: ElasticParams) -> np.ndarray:
    """Isotropic 6x6 stiffness in Voigt notation (engineering shear).

    The shear diagonal holds mu, not 2*mu, because strain vectors carry
    gamma = 2*eps in the shear slots: tau = mu * gamma.
    """
    lam, mu = p.lam, p.mu
    C = np.zeros((6, 6))
    C[AXIAL, AXIAL] = lam
    C[np.diag_indices(3)] += 2.0 * mu
    C[3, 3] = C[4, 4] = C[5, 5] = mu
    return C


def pressure_deviator(sigma):
    """Split a stress vector into mean pressure and deviator.

    Returns
    -------
    p : float
        Mean stress (sigma_11 + sigma_22 + sigma_33) / 3, tension positive.
    s : ndarray shape (6,)
        Deviatoric stress so that sigma = p * IDENTITY + s exactly.
    """
    sigma = np.asarray(sigma, dtype=float)
    p = (sigma[0] + sigma[1] + sigma[2]) / 3.0
    s = sigma - p * IDENTITY
    return p, s


def von_mises_stress(sigma):
    """Equivalent stress q = sqrt(3/2 s:s), shear components counted twice."""
    _, s = pressure_deviator(sigma)
    return float(np.sqrt(1.5 * np.dot(W_STRESS * s, s)))


def von_mises_strain(eps):
    """Equivalent strain from the deviatoric axial parts and shear strains.

    Uses e_ii = (2*eps_ii - eps_jj - eps_kk)/3 and
    sqrt(2/3 * (e11^2 + e22^2 + e33^2) + 1/3 * (g13^2 + g23^2 + g12^2))
    with engineering shear strains g taken directly from the shear slots.
    """
    e = np.asarray(eps, dtype=float)
    tr = e[0] + e[1] + e[2]
    e11 = e[0] - tr / 3.0
    e22 = e[1] - tr / 3.0
    e33 = e[2] - tr / 3.0
    g23, g13, g12 = e[3], e[4], e[5]
    return float(np.sqrt(2.0 / 3.0 * (e11**2 + e22**2 + e33**2)
                         + (g13**2 + g23**2 + g12**2) / 3.0))


def strain_deviator(eps):
    """Deviatoric part of an engineering-shear strain vector (shear kept as-is)."""
    e = np.asarray(eps, dtype=float)
    tr = (e[0] + e[1] + e[2]) / 3.0
    out = e.copy()
    out[AXIAL] -= tr
    return out


#: Matrix mapping engineering strain to 2*mu-free deviatoric strain:
#: dev_eng = DEV_ENG @ eps, with shear slots halved to tensor components
#: so that s = 2*mu * DEV_ENG @ eps gives the deviatoric stress.
DEV_ENG = np.zeros((6, 6))
DEV_ENG[:3, :3] = np.eye(3) - np.ones((3, 3)) / 3.0
DEV_ENG[3, 3] = DEV_ENG[4, 4] = DEV_ENG[5, 5] = 0.5
