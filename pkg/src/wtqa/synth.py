"""Synthetic two-cluster factor-model panels.

Features follow

    X_it = mu_c + B U_t + A_c U_ct + L_c V_it + xi_it,   xi_it ~ N(0, diag(sigma_c^2))

with Gaussian AR(1) latents ``U_t`` (global, 5-dim) and ``U_ct`` (per cluster,
4-dim), and outcomes follow the conditional-factor model

    Y_it = g_a(X_it) + g_b(X_it)' F_t + eta_i F_t1 + eps_it.

The published constants (cluster shares, factor recursion, drift and scale
ramps, frailty and noise scales, burn-in length) are fixed in
:class:`ScenarioSpec`. The templates themselves were never published; the
choices made here are collected in :class:`TemplateConfig`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from wtqa.panel import Panel
from wtqa.rng import make_rng

SCENARIOS = ("easy", "medium", "hard")


@dataclass(frozen=True)
class TemplateConfig:
    """Unpublished template choices (see module docstring).

    The defaults keep within-cluster feature noise small next to the
    between-cluster structure and the outcome networks close to linear, so
    the minority cluster is recognisable from running means while the
    misspecification of the linear predictor stays moderate.
    :meth:`unit_scale` gives unit-scale features and unit-sd output heads.
    """

    latent_persistence: float = 0.8
    idio_loading_sd: float = 0.05
    noise_scale_range: tuple = (0.05, 0.15)
    hidden_width: int = 64
    input_weight_sd: float = 0.03      # times 10/sqrt(d), so 0.3/sqrt(d) at d = 100
    hidden_bias_sd: float = 0.0
    probe_size: int = 4000
    shift_scale: float = 0.3           # per-coordinate sd of the minority mean shift, per unit separation
    head_scale: float = 0.25           # sd of each output head on the majority probe

    @classmethod
    def unit_scale(cls) -> "TemplateConfig":
        return cls(latent_persistence=0.5, idio_loading_sd=0.3, noise_scale_range=(0.5, 1.5),
                   input_weight_sd=0.1, shift_scale=0.1, head_scale=1.0)


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    n_units: int = 500
    horizon: int = 100
    feature_dim: int = 100
    factor_dim: int = 3
    majority_share: float = 0.88
    separation: float = 0.80
    phi: tuple = (0.45, 0.60, 0.75)
    factor_noise_scale: float = 0.55
    factor_corr_base: float = 0.45
    drift_amplitude: float = 0.0
    drift_rate: float = 0.0
    drift_center: float = 0.0      # fraction of horizon
    ramp_height: float = 0.0
    ramp_start: float = 0.0        # fraction of horizon
    ramp_length: float = 1.0       # fraction of horizon
    frailty_sd: float = 0.0
    noise_sd: float = 0.50
    burn_in: int = 40
    templates: TemplateConfig = field(default_factory=TemplateConfig)

    def __post_init__(self):
        if self.burn_in >= self.horizon:
            raise ValueError("burn_in must be shorter than the horizon")

    @property
    def n_major(self) -> int:
        return int(round(self.majority_share * self.n_units))

    @property
    def n_rounds(self) -> int:
        return self.horizon - self.burn_in

    @classmethod
    def named(cls, name: str, **overrides) -> "ScenarioSpec":
        key = name.lower()
        if key == "easy":
            base = dict()
        elif key == "medium":
            base = dict(drift_amplitude=3.60, drift_rate=0.17, drift_center=0.48,
                        ramp_height=0.30, ramp_start=0.45, ramp_length=0.55,
                        frailty_sd=0.10)
        elif key == "hard":
            base = dict(separation=2.0, drift_amplitude=5.50, drift_rate=0.20,
                        drift_center=0.35, ramp_height=0.80, ramp_start=0.40,
                        ramp_length=0.60, frailty_sd=0.15)
        else:
            raise ValueError(f"unknown scenario {name!r}; expected one of {SCENARIOS}")
        base.update(overrides)
        return cls(name=key, **base)


@dataclass(frozen=True)
class StructureTemplates:
    """Per-cluster templates (index 0 = majority ``A``, 1 = minority ``B``) and outcome networks."""

    mu: np.ndarray            # (2, d)
    cluster_loadings: np.ndarray   # (2, d, 4)
    idio_loadings: np.ndarray      # (2, d, 8)
    noise_scale: np.ndarray        # (2, d)
    global_loadings: np.ndarray    # (d, 5)
    hidden_w: np.ndarray           # (width, d)
    hidden_b: np.ndarray           # (width,)
    out_alpha: np.ndarray          # (width,)
    out_beta: np.ndarray           # (width, k)
    structure_seed: int
    separation: float

    def hidden(self, X: np.ndarray) -> np.ndarray:
        return np.tanh(X @ self.hidden_w.T + self.hidden_b)

    def g_alpha(self, X: np.ndarray) -> np.ndarray:
        return self.hidden(X) @ self.out_alpha

    def g_beta(self, X: np.ndarray) -> np.ndarray:
        return self.hidden(X) @ self.out_beta


def factor_correlation(k: int, base: float = 0.45) -> np.ndarray:
    idx = np.arange(k)
    return base ** np.abs(idx[:, None] - idx[None, :])


def logistic(r, a: float, b: float):
    return 1.0 / (1.0 + np.exp(-a * (np.asarray(r, dtype=float) - b)))


def drift_path(spec: ScenarioSpec) -> np.ndarray:
    """Mean-reversion targets ``m_r`` on ``r = 0..T-1``, shape ``(T, k)``."""
    T = spec.horizon
    r = np.arange(T)
    direction = np.array([1.0, 0.0, -1.0]) / np.sqrt(2.0)
    if spec.drift_amplitude == 0.0:
        return np.zeros((T, spec.factor_dim))
    b = spec.drift_center * T
    lam = logistic(r, spec.drift_rate, b) - logistic(0, spec.drift_rate, b)
    return spec.drift_amplitude * lam[:, None] * direction[None, :]


def scale_path(spec: ScenarioSpec) -> np.ndarray:
    """Innovation scale multipliers ``s_r`` on ``r = 0..T-1``."""
    T = spec.horizon
    r = np.arange(T)
    ramp = np.clip((r - spec.ramp_start * T) / (spec.ramp_length * T), 0.0, 1.0)
    return 1.0 + spec.ramp_height * ramp


def make_structure(seed: int, spec: ScenarioSpec) -> StructureTemplates:
    """Draw the fixed templates.

    All draws are independent of the separation, so scenarios sharing a seed
    differ only in the minority mean ``mu_B = mu_A + separation * u`` with
    ``u ~ N(0, shift_scale^2 I)``.
    """
    cfg = spec.templates
    d, k = spec.feature_dim, spec.factor_dim
    rng = make_rng(seed, "structure")
    mu_a = rng.standard_normal(d)
    u = rng.standard_normal(d) * cfg.shift_scale
    B = rng.standard_normal((d, 5)) / np.sqrt(5)
    A = rng.standard_normal((2, d, 4)) / np.sqrt(4)
    L = rng.standard_normal((2, d, 8)) * cfg.idio_loading_sd
    lo, hi = cfg.noise_scale_range
    sig = rng.uniform(lo, hi, size=(2, d))
    W = rng.standard_normal((cfg.hidden_width, d)) * cfg.input_weight_sd * 10.0 / np.sqrt(d)
    b = rng.standard_normal(cfg.hidden_width) * cfg.hidden_bias_sd
    va = rng.standard_normal(cfg.hidden_width)
    vb = rng.standard_normal((cfg.hidden_width, k))
    mu = np.stack([mu_a, mu_a + spec.separation * u])

    # scale each output head to sd head_scale on a majority-cluster probe
    prng = make_rng(seed, "structure", "probe")
    n = cfg.probe_size
    Xp = (mu_a + prng.standard_normal((n, 5)) @ B.T + prng.standard_normal((n, 4)) @ A[0].T
          + prng.standard_normal((n, 8)) @ L[0].T + prng.standard_normal((n, d)) * sig[0])
    H = np.tanh(Xp @ W.T + b)
    va = cfg.head_scale * va / (H @ va).std()
    vb = cfg.head_scale * vb / (H @ vb).std(axis=0)
    return StructureTemplates(mu, A, L, sig, B, W, b, va, vb, int(seed), float(spec.separation))


@lru_cache(maxsize=8)
def cached_structure(seed: int, spec: ScenarioSpec) -> StructureTemplates:
    return make_structure(seed, spec)


def simulate_factors(spec: ScenarioSpec, seed: int, tag="factor") -> np.ndarray:
    """Observed common factor path ``F_0 .. F_{T-1}`` with ``F_0 = 0``."""
    k, T = spec.factor_dim, spec.horizon
    rng = make_rng(seed, tag)
    C = np.linalg.cholesky(factor_correlation(k, spec.factor_corr_base))
    phi = np.asarray(spec.phi, dtype=float)
    m = drift_path(spec)
    s = scale_path(spec)
    Z = rng.standard_normal((T, k))
    F = np.zeros((T, k))
    for r in range(1, T):
        F[r] = phi * F[r - 1] + (1.0 - phi) * m[r] + spec.factor_noise_scale * s[r] * (C @ Z[r])
    return F


def ar1_path(rng: np.random.Generator, T: int, dim: int, rho: float) -> np.ndarray:
    """Stationary unit-variance Gaussian AR(1)."""
    out = np.empty((T, dim))
    innov = np.sqrt(1.0 - rho * rho)
    z = rng.standard_normal((T, dim))
    out[0] = z[0]
    for t in range(1, T):
        out[t] = rho * out[t - 1] + innov * z[t]
    return out


def cluster_labels(spec: ScenarioSpec) -> np.ndarray:
    return np.array(["A"] * spec.n_major + ["B"] * (spec.n_units - spec.n_major))


def simulate_panel(templates: StructureTemplates, spec: ScenarioSpec, rep_seed: int) -> Panel:
    """One replication: fresh latents, feature noise, factors, frailty and outcome noise."""
    N, T, d = spec.n_units, spec.horizon, spec.feature_dim
    rho = spec.templates.latent_persistence
    tags = cluster_labels(spec)
    cl = (tags == "B").astype(int)

    lat = make_rng(rep_seed, "latent")
    U = ar1_path(lat, T, 5, rho)
    Uc = np.stack([ar1_path(lat, T, 4, rho) for _ in range(2)])
    F = simulate_factors(spec, rep_seed)

    common = U @ templates.global_loadings.T                               # (T, d)
    cluster_part = np.einsum("ctk,cdk->ctd", Uc, templates.cluster_loadings)  # (2, T, d)

    X = np.empty((N, T, d))
    eps = np.empty((N, T))
    for i in range(N):
        c = cl[i]
        urng = make_rng(rep_seed, "unit", i)
        V = urng.standard_normal((T, 8))
        xi = urng.standard_normal((T, d)) * templates.noise_scale[c]
        X[i] = templates.mu[c] + common + cluster_part[c] + V @ templates.idio_loadings[c].T + xi
        eps[i] = urng.standard_normal(T) * spec.noise_sd

    eta = np.zeros(N)
    if spec.frailty_sd > 0:
        frng = make_rng(rep_seed, "frailty")
        minority = cl == 1
        eta[minority] = frng.standard_normal(minority.sum()) * spec.frailty_sd

    H = templates.hidden(X.reshape(N * T, d))
    ga = (H @ templates.out_alpha).reshape(N, T)
    gb = (H @ templates.out_beta).reshape(N, T, -1)
    Y = ga + np.einsum("ntk,tk->nt", gb, F) + eta[:, None] * F[None, :, 0] + eps
    return Panel(X, Y, spec.burn_in, unit_tags=tags, factors=F)


def gaussian_panel(n_units: int, n_rounds: int, feature_dim: int = 5, burn_in: int = 20,
                   seed: int = 0, noise_sd: float = 1.0) -> Panel:
    """Exchangeable linear-Gaussian panel: ``Y = X beta + eps`` with i.i.d. rows.

    ``n_rounds`` counts conformal rounds; the horizon is ``burn_in + n_rounds``.
    """
    rng = make_rng(seed, "gaussian")
    T = burn_in + n_rounds
    beta = rng.standard_normal(feature_dim)
    X = rng.standard_normal((n_units, T, feature_dim))
    Y = X @ beta + noise_sd * rng.standard_normal((n_units, T))
    return Panel(X, Y, burn_in)
