"""Random-walk strain paths, uniform partitioning, and dataset handling.

A walk draws one strain increment per step with per-component magnitudes
from U(0, inc_max) and signs from B(0.5).  Randomly scheduled segments are
forced to stay inside the elastic domain: when a drawn increment would leave
it, the increment is rescaled by bisection (falling back to the reflected
direction when the state sits on the yield surface) so the yield function
remains strictly negative through the segment.

``partition_series`` refines a path by factor C without changing it: the
output is the same piecewise-linear path sampled C times more densely, so
original points are an exact subsequence.

Datasets live on disk as a directory with ``meta.json`` plus raw
little-endian float64 arrays (``strain.f64``, ``stress.f64`` and
``pressure.f64`` in decomposed mode), row-major [sample][step][component].
"""

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .plasticity import (
    DpParams,
    J2Params,
    OracleState,
    oracle_stress_series,
    return_map,
    yield_function,
)
from .voigt import IDENTITY, ElasticParams, elastic_stiffness


@dataclass(frozen=True)
class WalkConfig:
    """Random-walk parameters.

    ``elastic_coverage`` is the target fraction of steps inside forced
    elastic segments; segment lengths are drawn uniformly from
    {seg_len_min, ..., seg_len_max} and starts uniformly over the walk.
    """

    n_steps: int = 100
    inc_max: float = 0.01
    seed: int = 0
    elastic_coverage: float = 0.25
    seg_len_min: int = 2
    seg_len_max: int = 10

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if not (self.inc_max > 0.0):
            raise ValueError("inc_max must be positive")


def sample_rng(seed, sample_index):
    """Deterministic per-sample stream independent of evaluation order."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(sample_index)]))


def _elastic_segment_mask(cfg: WalkConfig, rng):
    mask = np.zeros(cfg.n_steps + 1, dtype=bool)
    target = int(cfg.elastic_coverage * cfg.n_steps)
    guard = 0
    while mask[1:].sum() < target and guard < 10 * cfg.n_steps:
        length = int(rng.integers(cfg.seg_len_min, cfg.seg_len_max + 1))
        length = min(length, cfg.n_steps)
        start = int(rng.integers(1, cfg.n_steps - length + 2))
        mask[start:start + length] = True
        guard += 1
    return mask


def _trial_yield(state, eps, material):
    Ce = elastic_stiffness(material.elastic)
    sigma_tr = Ce @ (eps - state.eps_p)
    return yield_function(sigma_tr, state, material)


def _rescale_elastic(state, eps, d_eps, material, max_bisect=40):
    """Largest scale s in (0, 1] with trial yield < 0 at eps + s*d_eps.

    Tries the drawn direction first and its reflection second; returns the
    scaled increment (possibly zero if no elastic direction exists, which
    only happens at degenerate tangency points).
    """
    for direction in (d_eps, -d_eps):
        if _trial_yield(state, eps + direction, material) < 0.0:
            return direction
        lo, best = 0.0, None
        hi = 1.0
        for _ in range(max_bisect):
            mid = 0.5 * (lo + hi)
            if _trial_yield(state, eps + mid * direction, material) < 0.0:
                best, lo = mid, mid
            else:
                hi = mid
        if best is not None:
            return best * direction
    return np.zeros(6)


def random_walk_series(cfg: WalkConfig, material, rng=None):
    """Generate one strain series of shape (n_steps + 1, 6) starting at zero.

    The oracle state is tracked along the walk so that forced segments are
    enforced against the true elastic domain of ``material``.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    forced = _elastic_segment_mask(cfg, rng)
    series = np.zeros((cfg.n_steps + 1, 6))
    state = OracleState()
    eps = np.zeros(6)
    for t in range(1, cfg.n_steps + 1):
        mag = rng.uniform(0.0, cfg.inc_max, size=6)
        sign = np.where(rng.random(6) < 0.5, -1.0, 1.0)
        d_eps = mag * sign
        if forced[t]:
            d_eps = _rescale_elastic(state, eps, d_eps, material)
        eps = eps + d_eps
        series[t] = eps
        _, state, _ = return_map(state, eps, material)
    return series


def partition_series(series, C):
    """Refine a strain series by factor C using linear interpolation.

    Input of L points becomes C*(L-1) + 1 points; the piecewise-linear path
    (and therefore the endpoints) is unchanged and the original points
    appear exactly at indices 0, C, 2C, ...
    """
    C = int(C)
    if C <= 0:
        raise ValueError("partition count C must be >= 1")
    series = np.asarray(series, dtype=float)
    if C == 1:
        return series.copy()
    base = series[:-1]                     # (L-1, 6)
    delta = np.diff(series, axis=0)        # (L-1, 6)
    fractions = np.arange(C) / C
    # points[i, c] = base[i] + (c/C) * delta[i]
    points = base[:, None, :] + fractions[None, :, None] * delta[:, None, :]
    out = points.reshape(-1, series.shape[1])
    return np.vstack([out, series[-1]])


@dataclass
class NormConstants:
    """Linear scaling constants mapping data into [-0.5, 0.5].

    Axial stress components share one constant and shear components another;
    strain constants are per component.  ``p_max`` and ``sdev_scale`` are
    present only for pressure/deviatoric (decomposed) datasets.
    """

    eps_scale: np.ndarray
    sig_scale: np.ndarray
    p_max: float = None
    sdev_scale: np.ndarray = None

    def __post_init__(self):
        self.eps_scale = np.asarray(self.eps_scale, dtype=float)
        self.sig_scale = np.asarray(self.sig_scale, dtype=float)
        if np.any(self.eps_scale <= 0.0) or np.any(self.sig_scale <= 0.0):
            raise ValueError("normalization constants must be strictly positive")
        if self.sdev_scale is not None:
            self.sdev_scale = np.asarray(self.sdev_scale, dtype=float)

    def normalize_strain(self, eps):
        return np.asarray(eps) / (2.0 * self.eps_scale)

    def denormalize_strain(self, eps_bar):
        return np.asarray(eps_bar) * (2.0 * self.eps_scale)

    def normalize_stress(self, sig):
        return np.asarray(sig) / (2.0 * self.sig_scale)

    def denormalize_stress(self, sig_bar):
        return np.asarray(sig_bar) * (2.0 * self.sig_scale)

    def to_dict(self):
        return {
            "eps_scale": self.eps_scale.tolist(),
            "sig_scale": self.sig_scale.tolist(),
            "p_max": self.p_max,
            "sdev_scale": None if self.sdev_scale is None else self.sdev_scale.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["eps_scale"]), np.array(d["sig_scale"]),
                   d.get("p_max"),
                   None if d.get("sdev_scale") is None else np.array(d["sdev_scale"]))


def _shared_axial_shear_max(arr):
    """(axial, shear) maxima shared across components, per the scheme above."""
    flat = np.abs(arr).reshape(-1, 6)
    return float(flat[:, :3].max()), float(flat[:, 3:].max())


def compute_norm_constants(strain, stress, pressure=None, sdev=None):
    """Maxima over all samples and steps.

    Raises on degenerate (all-zero) components since the scaling would be
    undefined.
    """
    strain = np.asarray(strain, dtype=float)
    stress = np.asarray(stress, dtype=float)
    eps_scale = np.abs(strain).reshape(-1, 6).max(axis=0)
    ax, sh = _shared_axial_shear_max(stress)
    sig_scale = np.array([ax, ax, ax, sh, sh, sh])
    if np.any(eps_scale == 0.0) or ax == 0.0 or sh == 0.0:
        raise ValueError("degenerate dataset: a component is identically zero")
    p_max = sdev_scale = None
    if pressure is not None:
        p_max = float(np.abs(pressure).max())
        dax, dsh = _shared_axial_shear_max(sdev)
        if p_max == 0.0 or dax == 0.0 or dsh == 0.0:
            raise ValueError("degenerate dataset: decomposed labels are zero")
        sdev_scale = np.array([dax, dax, dax, dsh, dsh, dsh])
    return NormConstants(eps_scale, sig_scale, p_max, sdev_scale)


def material_to_dict(material):
    d = {"E": material.elastic.E, "nu": material.elastic.nu,
         "sigma_y": material.sigma_y, "Hprime": material.Hprime}
    if isinstance(material, J2Params):
        d["kind"] = "j2"
        d["beta_hat"] = material.beta_hat
    else:
        d["kind"] = "dp"
        d["phi"] = material.phi
        d["psi"] = material.psi
    return d


def material_from_dict(d):
    elastic = ElasticParams(d["E"], d["nu"])
    if d["kind"] == "j2":
        return J2Params(elastic, d["sigma_y"], d["Hprime"], d["beta_hat"])
    if d["kind"] == "dp":
        return DpParams(elastic, d["sigma_y"], d["phi"], d["psi"], d["Hprime"])
    raise ValueError(f"unknown material kind {d['kind']!r}")


@dataclass
class Dataset:
    """In-memory dataset: strain/stress paths plus normalization metadata."""

    strain: np.ndarray                   # (N, T, 6)
    stress: np.ndarray                   # (N, T, 6)
    norm: NormConstants
    material: object
    partitions: int = 1
    seed: int = 0
    pressure: np.ndarray = None          # (N, T) in decomposed mode
    walk_steps: int = 0

    @property
    def decomposed(self):
        return self.pressure is not None

    @property
    def n_samples(self):
        return self.strain.shape[0]

    @property
    def n_steps(self):
        return self.strain.shape[1]

    def deviatoric_stress(self):
        return self.stress - self.pressure[:, :, None] * IDENTITY

    def training_arrays(self):
        """Normalized (strain, labels); labels are (N, T, 6) or (N, T, 7)."""
        strain = self.norm.normalize_strain(self.strain)
        if not self.decomposed:
            return strain, self.norm.normalize_stress(self.stress)
        p_bar = self.pressure / (2.0 * self.norm.p_max)
        s_bar = self.deviatoric_stress() / (2.0 * self.norm.sdev_scale)
        return strain, np.concatenate([p_bar[:, :, None], s_bar], axis=2)

    def save(self, path):
        os.makedirs(path, exist_ok=True)
        meta = {
            "n_samples": int(self.n_samples),
            "n_steps": int(self.n_steps),
            "walk_steps": int(self.walk_steps),
            "partitions": int(self.partitions),
            "seed": int(self.seed),
            "decomposed": self.decomposed,
            "material": material_to_dict(self.material),
            "norm": self.norm.to_dict(),
        }
        with open(os.path.join(path, "meta.json"), "w") as fh:
            json.dump(meta, fh, indent=2)
        self.strain.astype("<f8").tofile(os.path.join(path, "strain.f64"))
        self.stress.astype("<f8").tofile(os.path.join(path, "stress.f64"))
        if self.decomposed:
            self.pressure.astype("<f8").tofile(os.path.join(path, "pressure.f64"))

    @classmethod
    def load(cls, path):
        with open(os.path.join(path, "meta.json")) as fh:
            meta = json.load(fh)
        n, t = meta["n_samples"], meta["n_steps"]
        strain = np.fromfile(os.path.join(path, "strain.f64"), dtype="<f8")
        stress = np.fromfile(os.path.join(path, "stress.f64"), dtype="<f8")
        strain = strain.reshape(n, t, 6)
        stress = stress.reshape(n, t, 6)
        pressure = None
        if meta["decomposed"]:
            pressure = np.fromfile(os.path.join(path, "pressure.f64"),
                                   dtype="<f8").reshape(n, t)
        return cls(strain, stress, NormConstants.from_dict(meta["norm"]),
                   material_from_dict(meta["material"]), meta["partitions"],
                   meta["seed"], pressure, meta["walk_steps"])


def build_dataset(material, n_samples, walk_cfg: WalkConfig, partitions=1,
                  decomposed=False):
    """Generate, partition, and label ``n_samples`` random walks.

    Each sample uses an independent counter-based stream derived from
    (walk_cfg.seed, sample index), so generation is reproducible regardless
    of evaluation order.
    """
    n_points = partitions * walk_cfg.n_steps + 1
    strain = np.empty((n_samples, n_points, 6))
    stress = np.empty((n_samples, n_points, 6))
    for i in range(n_samples):
        rng = sample_rng(walk_cfg.seed, i)
        walk = random_walk_series(walk_cfg, material, rng)
        refined = partition_series(walk, partitions)
        strain[i] = refined
        try:
            stress[i] = oracle_stress_series(material, refined)
        except ValueError as exc:
            raise ValueError(f"sample {i}: {exc}") from exc
    pressure = sdev = None
    if decomposed:
        pressure = stress[:, :, :3].mean(axis=2)
        sdev = stress - pressure[:, :, None] * IDENTITY
    norm = compute_norm_constants(strain, stress, pressure, sdev)
    return Dataset(strain, stress, norm, material, partitions, walk_cfg.seed,
                   pressure, walk_cfg.n_steps)
