"""Markov chain Monte Carlo for the N-point Gibbs measure.

Single-particle Metropolis with Gaussian proposals: robust against the
log-interaction's singularity (a gradient-based scheme would need special
care near collisions, so MALA is offered only as an optional move kind).
The move energy difference touches one particle, hence costs O(N).
Chains are deterministic functions of (config, seed): the generator is
numpy's PCG64, whose name and the numpy version are recorded with every
chain for reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .points import MACROSCOPIC, PointConfiguration


@dataclass
class SamplerConfig:
    n: int
    beta: float
    n_sweeps: int
    burn_in_sweeps: int = 0
    thin: int = 1
    proposal_sigma: float = None
    seed: int = 0
    move_kind: str = "metropolis"   # or "mala"

    def __post_init__(self):
        if self.beta <= 0:
            raise ValidationError("beta must be positive")
        if self.n < 1:
            raise ValidationError("need at least one particle")
        if not self.n_sweeps > self.burn_in_sweeps >= 0:
            raise ValidationError("need n_sweeps > burn_in_sweeps >= 0")
        if self.thin < 1:
            raise ValidationError("thin must be at least 1")
        if self.proposal_sigma is None:
            # O(1) moves at blown-up scale: matches the inter-particle distance
            self.proposal_sigma = 0.3 / np.sqrt(self.n)
        if self.move_kind not in ("metropolis", "mala"):
            raise ValidationError("move_kind must be 'metropolis' or 'mala'")


@dataclass
class Chain:
    samples: list
    acceptance_rate: float
    energy_trace: np.ndarray
    config: SamplerConfig
    rng_name: str = ""
    metadata: dict = field(default_factory=dict)

    def pooled_points(self):
        return np.vstack([s.points for s in self.samples])


@dataclass
class ChainDiagnostics:
    autocorr_time: float
    acceptance_rate: float
    effective_samples: float
    degenerate: bool = False


def _pair_log_sum(points, i, pos):
    """sum_{j != i} -log|pos - x_j|."""
    d = points - pos
    r2 = d[:, 0] ** 2 + d[:, 1] ** 2
    r2[i] = 1.0
    if np.any(r2 == 0.0):
        return np.inf
    return -0.5 * float(np.log(r2).sum())


def move_energy_delta(points, i, new_pos, potential):
    """Hamiltonian change when particle i moves to new_pos; O(N)."""
    n = len(points)
    old = _pair_log_sum(points, i, points[i])
    new = _pair_log_sum(points, i, new_pos)
    dv = float(potential.evaluate(new_pos[None, :])[0]
               - potential.evaluate(points[i][None, :])[0])
    return 2.0 * (new - old) + n * dv


def acceptance_probability(delta_h, beta):
    """Metropolis rule for the density proportional to exp(-beta H / 2)."""
    if delta_h <= 0.0:
        return 1.0
    return float(np.exp(-0.5 * beta * delta_h))


def sample_gibbs(cfg, potential, eq=None, init=None):
    """Run the Metropolis chain for the Gibbs measure of ``potential``.

    Starts from ``init`` (a macroscopic PointConfiguration), else from i.i.d.
    draws from ``eq`` (recommended: starts in the bulk, shortens burn-in),
    else from a centred Gaussian cloud.  One sweep proposes a move of every
    particle once, in index order.  Recorded samples are taken every ``thin``
    sweeps after burn-in; the energy trace has one entry per sweep.
    """
    rng = np.random.default_rng(cfg.seed)
    if init is not None:
        init.require_frame(MACROSCOPIC)
        if init.n != cfg.n:
            raise ValidationError("init configuration has the wrong size")
        points = init.points.copy()
    elif eq is not None:
        points = eq.sample(rng, cfg.n)
    else:
        points = rng.normal(scale=0.5, size=(cfg.n, 2))

    from .energy import hamiltonian  # local import to avoid a cycle

    current_h = hamiltonian(PointConfiguration(points), potential)
    sigma = cfg.proposal_sigma
    beta = cfg.beta
    n = cfg.n
    use_mala = cfg.move_kind == "mala"

    samples = []
    trace = np.empty(cfg.n_sweeps)
    accepted = 0
    proposed = 0
    for sweep in range(cfg.n_sweeps):
        steps = rng.normal(scale=sigma, size=(n, 2))
        unif = rng.random(n)
        for i in range(n):
            if use_mala:
                drift = -0.25 * beta * sigma * sigma * _gradient_one(
                    points, i, potential
                )
                new_pos = points[i] + drift + steps[i]
            else:
                new_pos = points[i] + steps[i]
            delta = move_energy_delta(points, i, new_pos, potential)
            accept_log = delta
            if use_mala:
                accept_log = delta + _mala_asymmetry(
                    points, i, new_pos, potential, beta, sigma
                )
            proposed += 1
            if accept_log <= 0.0 or unif[i] < np.exp(-0.5 * beta * accept_log):
                points[i] = new_pos
                current_h += delta
                accepted += 1
        trace[sweep] = current_h
        if sweep >= cfg.burn_in_sweeps and (sweep - cfg.burn_in_sweeps) % cfg.thin == 0:
            samples.append(PointConfiguration(points.copy()))
    return Chain(
        samples=samples,
        acceptance_rate=accepted / max(proposed, 1),
        energy_trace=trace,
        config=cfg,
        rng_name=f"numpy.random.PCG64 (numpy {np.__version__})",
        metadata=dict(potential=potential.name),
    )


def _gradient_all(points, potential):
    """Gradient of H with respect to every particle (used by MALA moves)."""
    n = len(points)
    grad = n * potential.gradient(points)
    for i in range(n):
        d = points[i] - points
        r2 = d[:, 0] ** 2 + d[:, 1] ** 2
        r2[i] = np.inf
        grad[i] -= 2.0 * (d / r2[:, None]).sum(axis=0)
    return grad


def _mala_asymmetry(points, i, new_pos, potential, beta, sigma):
    """Log proposal-ratio correction for the Langevin proposal."""
    old_pos = points[i].copy()
    points_new = points.copy()
    points_new[i] = new_pos
    g_old = _gradient_one(points, i, potential)
    g_new = _gradient_one(points_new, i, potential)
    c = 0.25 * beta * sigma * sigma
    fwd = new_pos - (old_pos - c * g_old)
    bwd = old_pos - (new_pos - c * g_new)
    return float((bwd @ bwd - fwd @ fwd) / (beta * sigma * sigma))


def _gradient_one(points, i, potential):
    n = len(points)
    d = points[i] - points
    r2 = d[:, 0] ** 2 + d[:, 1] ** 2
    r2[i] = np.inf
    return n * potential.gradient(points[i][None, :])[0] \
        - 2.0 * (d / r2[:, None]).sum(axis=0)


def ginibre_radial_oracle(n, n_samples, seed=0):
    """Radius multisets distributed as Ginibre eigenvalue moduli.

    Each sample is ``{sqrt(gamma_k / n)}_{k=1..n}`` with independent
    ``gamma_k ~ Gamma(k, 1)`` (Kostlan's observation), under the scaling
    where the spectrum fills the unit disk.  Independent of the Markov
    chain machinery, hence usable as an exact oracle for beta = 2 with a
    quadratic potential.
    """
    rng = np.random.default_rng(seed)
    k = np.arange(1, n + 1, dtype=float)
    out = np.empty((n_samples, n))
    for s in range(n_samples):
        out[s] = np.sqrt(rng.gamma(shape=k) / n)
    return out


def ginibre_radial_cdf(r, n):
    """P(|eigenvalue| <= r), averaged over the spectrum, at matrix size n."""
    from scipy.special import gammainc

    r = np.atleast_1d(np.asarray(r, dtype=float))
    k = np.arange(1, n + 1, dtype=float)
    out = np.empty(len(r))
    for idx, rv in enumerate(r):
        out[idx] = gammainc(k, n * rv * rv).mean()
    return out


def expected_count_within(r, n):
    """Expected number of Ginibre moduli at most r: sum_k P(gamma_k <= n r^2)."""
    return float(n * ginibre_radial_cdf(np.array([r]), n)[0])


def diagnose_chain(chain_or_trace):
    """Integrated autocorrelation time, acceptance rate and effective size.

    Uses the standard FFT autocorrelation estimate with Sokal's adaptive
    window (smallest W with W >= 5 tau(W)).  A constant trace is flagged
    degenerate and reported with tau equal to the chain length.
    """
    if isinstance(chain_or_trace, Chain):
        trace = np.asarray(chain_or_trace.energy_trace, dtype=float)
        acc = chain_or_trace.acceptance_rate
    else:
        trace = np.asarray(chain_or_trace, dtype=float)
        acc = float("nan")
    m = len(trace)
    if m < 10:
        raise ValidationError("need at least 10 samples to diagnose a chain")
    x = trace - trace.mean()
    var = float(x @ x) / m
    if var == 0.0:
        return ChainDiagnostics(
            autocorr_time=float(m), acceptance_rate=acc,
            effective_samples=1.0, degenerate=True,
        )
    nfft = int(2 ** np.ceil(np.log2(2 * m)))
    f = np.fft.rfft(x, nfft)
    acf = np.fft.irfft(f * np.conj(f), nfft)[:m].real
    acf /= acf[0]
    tau = 1.0
    for w in range(1, m):
        tau = 1.0 + 2.0 * acf[1:w + 1].sum()
        if w >= 5.0 * tau:
            break
    tau = max(tau, 1.0)
    return ChainDiagnostics(
        autocorr_time=float(tau),
        acceptance_rate=acc,
        effective_samples=float(m / tau),
        degenerate=False,
    )
