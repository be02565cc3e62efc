"""Synthetic paired datasets from Gaussian-mixture latent geometries.

Five scenarios. In the "1.x" family the respondents occupy the same
positions in the social space and the response space; scenarios "2" and
"3" decouple the two spaces ("2" by an entirely different social
clustering, "3" by shrinking the response-side copy of the social
positions toward the origin with a scale factor).

Generation draws four independent RNG sub-streams from the seed, in the
order (latent positions, scalar parameters, network, responses), so each
component is reproducible on its own.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .model import DataError, ItemResponseData, NetworkData, cross_distances, pairwise_distances

LAMBDA_GRID = (0.01, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0)

SCENARIO_SIZES = {
    "1.1": (300, 30),
    "1.2": (400, 30),
    "1.3": (300, 40),
    "2": (300, 30),
    "3": (300, 30),
}

# three anchor clusters shared by all scenarios
_MEANS = np.array([[0.0, 1.0], [1.0, -1.0], [-1.0, -1.0]])
_CENTER = np.array([0.0, 0.0])

_SIGMA_Z = 0.2 ** 2 * np.eye(2)
_SIGMA_W = [
    np.array([[0.01, 0.0], [0.0, 0.01]]),
    np.array([[0.01, -0.009], [-0.009, 0.01]]),
    np.array([[0.01, 0.009], [0.009, 0.01]]),
]
_SIGMA_W_CENTER = np.array([[0.01, 0.0], [0.0, 0.01]])

# social space of scenario 2: two stacked clusters
_MEANS_TWO = np.array([[0.0, 1.0], [0.0, -1.0]])


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation condition: scenario id, seed, and the scale factor
    for scenario 3."""

    scenario: str
    seed: int
    lam: float | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIO_SIZES:
            raise DataError(f"unknown scenario {self.scenario!r}; "
                            f"choose from {sorted(SCENARIO_SIZES)}")
        if self.scenario == "3":
            if self.lam is None or self.lam not in LAMBDA_GRID:
                raise DataError(f"scenario 3 needs lam from {LAMBDA_GRID}")
        elif self.lam is not None:
            raise DataError("lam is only meaningful for scenario 3")

    @property
    def n(self) -> int:
        return SCENARIO_SIZES[self.scenario][0]

    @property
    def p(self) -> int:
        return SCENARIO_SIZES[self.scenario][1]


@dataclass(frozen=True)
class Truth:
    """Everything that generated one dataset."""

    alpha: float
    beta: np.ndarray
    theta: np.ndarray
    gamma: float
    delta: float
    z_social: np.ndarray
    z_item_side: np.ndarray
    w: np.ndarray
    person_clusters: np.ndarray       # social-space labels
    person_clusters_item: np.ndarray  # response-space labels
    item_clusters: np.ndarray

    def response_probabilities(self) -> np.ndarray:
        d = cross_distances(self.z_item_side, self.w)
        return expit(self.beta[None, :] + self.theta[:, None] - self.delta * d)

    def edge_probabilities(self) -> np.ndarray:
        d = pairwise_distances(self.z_social)
        pr = expit(self.alpha - self.gamma * d)
        np.fill_diagonal(pr, 0.0)
        return pr


@dataclass(frozen=True)
class GeneratedPair:
    net: NetworkData
    resp: ItemResponseData
    truth: Truth


def _streams(seed):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(4)]


def _draw_clusters(rng, means, covs, per_cluster):
    chunks = []
    for mu, cov, count in zip(means, covs, per_cluster):
        chol = np.linalg.cholesky(cov)
        chunks.append(mu + rng.standard_normal((count, 2)) @ chol.T)
    return np.concatenate(chunks, axis=0)


def _labels(per_cluster):
    return np.repeat(np.arange(len(per_cluster)), per_cluster)


def _latents(spec: ScenarioSpec, rng):
    """Draw (z_social, z_item_side, w) plus cluster label vectors."""
    s = spec.scenario
    if s in ("1.1", "3"):
        z = _draw_clusters(rng, _MEANS, [_SIGMA_Z] * 3, [100] * 3)
        labels_z = _labels([100] * 3)
        w = _draw_clusters(rng, _MEANS, _SIGMA_W, [10] * 3)
        labels_w = _labels([10] * 3)
        scale = 1.0 if s == "1.1" else spec.lam
        z_item = scale * z
        labels_item = labels_z
    elif s == "1.2":
        means = np.vstack([_MEANS, _CENTER])
        z = _draw_clusters(rng, means, [_SIGMA_Z] * 4, [100] * 4)
        labels_z = _labels([100] * 4)
        w = _draw_clusters(rng, _MEANS, _SIGMA_W, [10] * 3)
        labels_w = _labels([10] * 3)
        z_item = z
        labels_item = labels_z
    elif s == "1.3":
        z = _draw_clusters(rng, _MEANS, [_SIGMA_Z] * 3, [100] * 3)
        labels_z = _labels([100] * 3)
        means = np.vstack([_MEANS, _CENTER])
        w = _draw_clusters(rng, means, _SIGMA_W + [_SIGMA_W_CENTER], [10] * 4)
        labels_w = _labels([10] * 4)
        z_item = z
        labels_item = labels_z
    else:  # scenario 2: two social clusters, three response-side clusters
        z = _draw_clusters(rng, _MEANS_TWO, [_SIGMA_Z] * 2, [150] * 2)
        labels_z = _labels([150] * 2)
        z_item = _draw_clusters(rng, _MEANS, [_SIGMA_Z] * 3, [100] * 3)
        labels_item = _labels([100] * 3)
        w = _draw_clusters(rng, _MEANS, _SIGMA_W, [10] * 3)
        labels_w = _labels([10] * 3)
    return z, z_item, w, labels_z, labels_item, labels_w


def generate_latents(spec: ScenarioSpec):
    """Latent positions only: (z_social, z_item_side, w)."""
    rng = _streams(spec.seed)[0]
    z, z_item, w, *_ = _latents(spec, rng)
    return z, z_item, w


def generate_pair(spec: ScenarioSpec, gamma=1.0, delta=1.0) -> GeneratedPair:
    """One full dataset: network, responses, and the generating truth.

    The intercept, item easiness, and person traits are each drawn from
    Uniform(-1, 1); the distance weights default to the fixed generating
    values (``delta`` can be overridden, e.g. to probe sign recovery).
    """
    rng_latent, rng_scalar, rng_net, rng_resp = _streams(spec.seed)
    z, z_item, w, labels_z, labels_item, labels_w = _latents(spec, rng_latent)
    n, p = spec.n, spec.p

    alpha = float(rng_scalar.uniform(-1.0, 1.0))
    beta = rng_scalar.uniform(-1.0, 1.0, size=p)
    theta = rng_scalar.uniform(-1.0, 1.0, size=n)

    truth = Truth(alpha=alpha, beta=beta, theta=theta, gamma=float(gamma),
                  delta=float(delta), z_social=z, z_item_side=z_item, w=w,
                  person_clusters=labels_z, person_clusters_item=labels_item,
                  item_clusters=labels_w)

    iu = np.triu_indices(n, k=1)
    d = np.hypot(z[iu[0], 0] - z[iu[1], 0], z[iu[0], 1] - z[iu[1], 1])
    p_edge = expit(alpha - gamma * d)
    y = np.zeros((n, n))
    edges = (rng_net.random(d.shape[0]) < p_edge).astype(float)
    y[iu] = edges
    y += y.T

    p_resp = truth.response_probabilities()
    x = (rng_resp.random((n, p)) < p_resp).astype(float)

    return GeneratedPair(net=NetworkData(y), resp=ItemResponseData(x), truth=truth)
