"""Gibbs sampler for the spike-and-slab basis-selection model.

One sweep updates, in order: sigma2, tau2, then per curve the (mu,) Z and
theta entries basis by basis, then each curve's full coefficient block. The
Z update for entry (k, i) always sees the freshest values of every other
indicator (the mixed vector), the previous sweep's beta, and the current
sweep's sigma2.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DomainError,
    ImproperConditionalError,
    InvalidConfigurationError,
    LinearAlgebraError,
)
from .model import ChainState, predict_curve

__all__ = [
    "GibbsConfig",
    "PosteriorSample",
    "init_chain",
    "sample_sigma2",
    "sample_tau2",
    "sample_theta",
    "sample_mu",
    "sample_z",
    "inclusion_probability",
    "sample_beta_block",
    "run_gibbs",
]

_THETA_LO = np.finfo(float).tiny
_THETA_HI = 1.0 - np.finfo(float).eps


@dataclass(frozen=True)
class GibbsConfig:
    """Run schedule for the sampler.

    Iteration 1 is the initial state; sweeps produce iterations 2..num_iterations.
    After dropping the first floor(num_iterations * burn_in_fraction) iterations,
    every ``thinning``-th one is retained. ``seed`` may be an int or a tuple of
    ints; chain c derives its stream from entropy (seed..., c).
    """

    num_iterations: int = 10000
    num_chains: int = 2
    burn_in_fraction: float = 0.5
    thinning: int = 50
    seed: object = 0

    def __post_init__(self):
        if self.num_iterations < 2:
            raise InvalidConfigurationError("num_iterations must be >= 2")
        if self.num_chains < 1:
            raise InvalidConfigurationError("num_chains must be >= 1")
        if not (0.0 <= self.burn_in_fraction < 1.0):
            raise InvalidConfigurationError("burn_in_fraction must lie in [0, 1)")
        if self.thinning < 1:
            raise InvalidConfigurationError("thinning must be >= 1")
        if len(self.retained_iterations()) == 0:
            raise InvalidConfigurationError(
                "schedule retains no draws; lower burn_in_fraction or thinning"
            )
        raw = self.seed if isinstance(self.seed, (tuple, list)) else (self.seed,)
        for part in raw:
            try:
                ok = int(part) == part and part >= 0
            except (TypeError, ValueError):
                ok = False
            if not ok:
                raise InvalidConfigurationError(
                    f"seed parts must be nonnegative integers, got {self.seed!r}"
                )

    def seed_entropy(self):
        if isinstance(self.seed, (tuple, list)):
            return tuple(int(s) for s in self.seed)
        return (int(self.seed),)

    def burn_in(self):
        return int(self.num_iterations * self.burn_in_fraction)

    def retained_iterations(self):
        """Iteration indices (1-based) kept after burn-in and thinning."""
        burn = self.burn_in()
        first = burn + self.thinning
        return list(range(first, self.num_iterations + 1, self.thinning))


@dataclass
class PosteriorSample:
    """Retained draws from every chain plus the schedule that produced them."""

    chains: list
    iterations: np.ndarray
    config: GibbsConfig
    mu_mode: str

    @property
    def num_chains(self):
        return len(self.chains)

    @property
    def draws_per_chain(self):
        return len(self.chains[0])

    def states(self):
        """All retained states, chain-major."""
        for chain in self.chains:
            yield from chain

    def scalar_draws(self, name):
        """(num_chains, draws) array of a scalar parameter ('sigma2'/'tau2')."""
        return np.array([[getattr(s, name) for s in chain] for chain in self.chains])

    def array_draws(self, name):
        """(num_chains, draws, m, K) array of a matrix parameter."""
        return np.array(
            [[np.asarray(getattr(s, name), dtype=float) for s in chain] for chain in self.chains]
        )


def init_chain(chain_index, m, num_bases, hyp, rng, base_z=None):
    """Overdispersed starting state for chain 1 or 2.

    Chain 1 starts at beta = -1, theta = 1/5, sigma2 = tau2 = 1 with Z drawn
    entrywise Bernoulli(1/2); chain 2 at beta = +1, theta = 4/5,
    sigma2 = tau2 = 5 with Z the complement of chain 1's draw (pass it as
    ``base_z``). Extra chains take user-supplied states instead.
    """
    if chain_index == 1:
        z = (rng.random((m, num_bases)) < 0.5).astype(np.int64)
        beta_val, theta_val, scale_val, mu_val = -1.0, 0.2, 1.0, 0.2
    elif chain_index == 2:
        if base_z is None:
            raise InvalidConfigurationError(
                "chain 2 starts from the complement of chain 1's inclusion draw; "
                "pass it as base_z"
            )
        z = 1 - np.asarray(base_z, dtype=np.int64)
        beta_val, theta_val, scale_val, mu_val = 1.0, 0.8, 5.0, 0.8
    else:
        raise InvalidConfigurationError(
            "only chains 1 and 2 have built-in starting states"
        )
    if hyp.mu_mode == "random":
        mu = np.full((m, num_bases), min(mu_val, hyp.psi * (1.0 - 1e-6)))
    else:
        mu = hyp.resolved_mu(num_bases)
    return ChainState(
        beta=np.full((m, num_bases), beta_val),
        z=z,
        theta=np.full((m, num_bases), theta_val),
        mu=mu,
        sigma2=scale_val,
        tau2=scale_val,
    )


def _inv_gamma(shape, rate, rng):
    """One inverse-gamma draw, shape/rate parameterization (mean rate/(shape-1))."""
    if not (shape > 0.0 and np.isfinite(shape)):
        raise ImproperConditionalError(f"inverse-gamma shape must be > 0, got {shape}")
    if not (rate > 0.0 and np.isfinite(rate)):
        raise ImproperConditionalError(f"inverse-gamma rate must be > 0, got {rate}")
    return 1.0 / rng.gamma(shape, 1.0 / rate)


def sample_sigma2(state, data, bases, hyp, rng):
    """Draw sigma2 | rest ~ IG(n/2 + mK/2 + delta1, [SSE + sum beta^2/tau2 + 2 delta2]/2)."""
    m, num_bases = state.beta.shape
    sse = 0.0
    for i, curve in enumerate(data.curves):
        resid = curve.y - predict_curve(state, bases[i], i)
        sse += float(resid @ resid)
    beta_sq = float(np.sum(state.beta * state.beta))
    shape = 0.5 * data.total_obs + 0.5 * m * num_bases + hyp.delta1
    rate = 0.5 * (sse + beta_sq / state.tau2 + 2.0 * hyp.delta2)
    return float(_inv_gamma(shape, rate, rng))


def sample_tau2(state, hyp, rng):
    """Draw tau2 | rest ~ IG(mK/2 + lambda1, [sum beta^2/sigma2 + 2 lambda2]/2)."""
    m, num_bases = state.beta.shape
    beta_sq = float(np.sum(state.beta * state.beta))
    shape = 0.5 * m * num_bases + hyp.lambda1
    rate = 0.5 * (beta_sq / state.sigma2 + 2.0 * hyp.lambda2)
    return float(_inv_gamma(shape, rate, rng))


def sample_theta(mu, z, rng):
    """Draw theta | mu, Z ~ Beta(mu + Z, 2 - Z - mu), elementwise.

    Scalar mu broadcasts against an array Z. Draws are nudged into the open
    interval (0, 1) so downstream logits stay finite.
    """
    mu_arr = np.asarray(mu, dtype=float)
    if np.any(mu_arr <= 0.0) or np.any(mu_arr >= 1.0):
        raise DomainError("mu must lie strictly inside (0, 1)")
    z_arr = np.asarray(z)
    if not np.all((z_arr == 0) | (z_arr == 1)):
        raise DomainError("z entries must be 0 or 1")
    draw = rng.beta(mu_arr + z_arr, 2.0 - z_arr - mu_arr)
    draw = np.clip(draw, _THETA_LO, _THETA_HI)
    if np.isscalar(mu) and np.isscalar(z):
        return float(draw)
    return draw


def sample_mu(theta, psi, rng):
    """Draw mu | theta from the continuous Bernoulli on (0, psi), elementwise.

    The density is proportional to theta^mu (1-theta)^(1-mu) on (0, psi),
    i.e. exp(lambda mu) with lambda = logit(theta); inversion gives
    mu = log(1 + u (e^(lambda psi) - 1)) / lambda, falling back to psi*u when
    |lambda| <= 1e-10.
    """
    if not (0.0 < psi < 1.0):
        raise DomainError(f"psi must lie in (0, 1), got {psi}")
    theta_arr = np.asarray(theta, dtype=float)
    if np.any(theta_arr <= 0.0) or np.any(theta_arr >= 1.0):
        raise DomainError("theta must lie strictly inside (0, 1)")
    lam = np.log(theta_arr) - np.log1p(-theta_arr)
    u = rng.random(theta_arr.shape)
    u = np.maximum(u, np.finfo(float).tiny)
    small = np.abs(lam) <= 1e-10
    lam_safe = np.where(small, 1.0, lam)
    mu = np.where(small, psi * u, np.log1p(u * np.expm1(lam_safe * psi)) / lam_safe)
    mu = np.clip(mu, np.finfo(float).tiny, psi * (1.0 - 1e-16))
    if np.isscalar(theta):
        return float(mu)
    return mu


def inclusion_probability(state, data, basis, k, i):
    """P(Z_ki = 1 | rest) in the stable logistic form.

    With SSE_1/SSE_0 the residual sums of squares including/excluding column
    k, the textbook ratio theta / ((1-theta) exp(delta / 2 sigma2) + theta)
    with delta = SSE_1 - SSE_0 equals expit(logit(theta) - delta / (2 sigma2)),
    which neither overflows nor leaves [0, 1].
    """
    theta_ki = float(state.theta[i, k])
    if not (0.0 < theta_ki < 1.0):
        raise DomainError(f"theta[{i},{k}] must lie in (0, 1), got {theta_ki}")
    if state.sigma2 <= 0:
        raise DomainError(f"sigma2 must be positive, got {state.sigma2}")
    beta_ki = float(state.beta[i, k])
    z_off = state.z[i].copy()
    z_off[k] = 0
    resid_off = data.curves[i].y - basis.values @ (z_off * state.beta[i])
    col = basis.values[:, k]
    # delta = ||resid_off - beta B_k||^2 - ||resid_off||^2
    delta = beta_ki * beta_ki * float(col @ col) - 2.0 * beta_ki * float(col @ resid_off)
    lo = math.log(theta_ki) - math.log1p(-theta_ki) - delta / (2.0 * state.sigma2)
    if lo >= 0.0:
        return 1.0 / (1.0 + math.exp(-lo))
    e = math.exp(lo)
    return e / (1.0 + e)


def sample_z(state, data, basis, k, i, rng):
    """Draw the inclusion indicator Z_ki given everything else."""
    p = inclusion_probability(state, data, basis, k, i)
    return int(rng.random() < p)


def _chol_with_jitter(mat, tau2):
    """Cholesky factor of a should-be-SPD matrix, with a tiny diagonal rescue.

    On failure adds 1e-12 * trace/K to the diagonal, at most three times, then
    gives up with a linear-algebra error reporting tau2 and a rough condition
    estimate.
    """
    num_bases = mat.shape[0]
    jitter = 1e-12 * float(np.trace(mat)) / num_bases
    for attempt in range(4):
        try:
            return np.linalg.cholesky(mat + (attempt * jitter) * np.eye(num_bases))
        except np.linalg.LinAlgError:
            continue
    diag = np.abs(np.diag(mat))
    cond_est = float(diag.max() / max(diag.min(), np.finfo(float).tiny))
    raise LinearAlgebraError(
        f"coefficient-block factorization failed after 3 jitter attempts "
        f"(tau2={tau2}, diagonal condition estimate {cond_est:.3e})"
    )


def sample_beta_block(state, data, basis, i, rng):
    """Draw the full coefficient vector of curve i from its Gaussian conditional.

    beta_.i | rest ~ N(D^-1 G' y, sigma2 D^-1) with G = B diag(Z_.i) and
    D = (1/tau2) I + G'G. Uses the Cholesky factor D = L L'; the draw is
    mean + sqrt(sigma2) L^-T eta with eta standard normal.
    """
    z = state.z[i].astype(float)
    gram = basis.gram * np.outer(z, z)
    num_bases = gram.shape[0]
    dmat = gram + np.eye(num_bases) / state.tau2
    gty = z * (basis.values.T @ data.curves[i].y)
    lmat = _chol_with_jitter(dmat, state.tau2)
    w = solve_triangular(lmat, gty, lower=True, check_finite=False)
    mean = solve_triangular(lmat.T, w, lower=False, check_finite=False)
    eta = rng.standard_normal(num_bases)
    noise = solve_triangular(lmat.T, eta, lower=False, check_finite=False)
    return mean + math.sqrt(state.sigma2) * noise


def _draw_beta_all(state, grams, btys, rng):
    """One batched draw of every curve's coefficient block.

    Equivalent to calling sample_beta_block curve by curve (the generator
    consumes the same normal stream; only the solve path differs at the
    last-ulp level).
    """
    m, num_bases = state.beta.shape
    zf = state.z.astype(float)
    dstack = np.empty((m, num_bases, num_bases))
    gtystack = np.empty((m, num_bases))
    inv_tau2 = 1.0 / state.tau2
    idx = np.arange(num_bases)
    for i in range(m):
        dstack[i] = grams[i] * np.outer(zf[i], zf[i])
        dstack[i, idx, idx] += inv_tau2
        gtystack[i] = zf[i] * btys[i]
    try:
        lstack = np.linalg.cholesky(dstack)
    except np.linalg.LinAlgError:
        lstack = np.stack(
            [_chol_with_jitter(dstack[i], state.tau2) for i in range(m)]
        )
    eta = rng.standard_normal((m, num_bases))
    lt = np.transpose(lstack, (0, 2, 1))
    w = np.linalg.solve(lstack, gtystack[:, :, None])
    mean = np.linalg.solve(lt, w)
    noise = np.linalg.solve(lt, eta[:, :, None])
    return (mean + math.sqrt(state.sigma2) * noise)[:, :, 0]


def _check_inputs(data, bases):
    if len(bases) != data.m:
        raise InvalidConfigurationError(
            f"got {len(bases)} basis matrices for {data.m} curves"
        )
    num_bases = bases[0].num_bases
    for i, (basis, curve) in enumerate(zip(bases, data.curves)):
        if basis.num_bases != num_bases:
            raise InvalidConfigurationError("all basis matrices must share one system")
        if basis.num_points != curve.n or not np.array_equal(basis.points, curve.t):
            raise InvalidConfigurationError(
                f"basis matrix {i} was not evaluated at curve {i}'s points"
            )
    return num_bases


def _run_chain(state, data, bases, hyp, config, rng, chain_index):
    m = data.m
    num_bases = state.beta.shape[1]
    random_mu = hyp.mu_mode == "random"
    psi = hyp.psi

    # Per-curve constants for the sweep. Rows of bt are contiguous basis columns.
    ys = [c.y for c in data.curves]
    bts = [np.ascontiguousarray(b.values.T) for b in bases]
    grams = [b.gram for b in bases]
    colsqs = [np.ascontiguousarray(np.diag(g)) for g in grams]
    btys = [bt @ y for bt, y in zip(bts, ys)]

    retained = set(config.retained_iterations())
    snapshots = []
    if 1 in retained:  # only possible with burn_in 0 and thinning 1
        snapshots.append(state.copy())

    for c in range(2, config.num_iterations + 1):
        try:
            state.sigma2 = sample_sigma2(state, data, bases, hyp, rng)
            state.tau2 = sample_tau2(state, hyp, rng)
        except ImproperConditionalError as err:
            raise ImproperConditionalError(
                f"chain {chain_index} aborted at iteration {c}: {err}"
            ) from err

        inv_2s2 = 0.5 / state.sigma2
        for i in range(m):
            theta_prev = state.theta[i]
            if random_mu:
                mu_i = sample_mu(theta_prev, psi, rng)
                state.mu[i] = mu_i
            else:
                mu_i = state.mu
            logit_theta = (np.log(theta_prev) - np.log1p(-theta_prev)).tolist()

            # Residual for the current mixed Z vector, then one pass over k.
            z_i = state.z[i]
            beta_i = state.beta[i]
            bt = bts[i]
            r = ys[i] - (z_i * beta_i) @ bt
            uz = rng.random(num_bases).tolist()
            blist = beta_i.tolist()
            zlist = z_i.tolist()
            colsq = colsqs[i].tolist()
            for k in range(num_bases):
                b = blist[k]
                zc = zlist[k]
                # B_k' r0 where r0 is the residual with Z_ki = 0
                q = float(bt[k] @ r) + zc * b * colsq[k]
                delta = b * b * colsq[k] - 2.0 * b * q
                lo = logit_theta[k] - delta * inv_2s2
                if lo >= 0.0:
                    p = 1.0 / (1.0 + math.exp(-lo))
                else:
                    e = math.exp(lo)
                    p = e / (1.0 + e)
                znew = 1 if uz[k] < p else 0
                if znew != zc:
                    r += ((zc - znew) * b) * bt[k]
                    zlist[k] = znew
                    z_i[k] = znew

            state.theta[i] = sample_theta(mu_i, z_i, rng)

        state.beta = _draw_beta_all(state, grams, btys, rng)

        if c in retained:
            snapshots.append(state.copy())
    return snapshots


def run_gibbs(data, bases, hyp, config, inits=None):
    """Run the full sampler and return the retained draws of every chain.

    ``bases`` holds one BasisMatrix per curve, evaluated at that curve's
    points. Chains 1 and 2 start from the built-in overdispersed states;
    chains beyond 2 need explicit ChainState entries in ``inits``.
    """
    num_bases = _check_inputs(data, bases)
    m = data.m
    if hyp.mu_mode == "fixed":
        hyp.resolved_mu(num_bases)  # fail fast on an unresolvable prior mean

    entropy = config.seed_entropy()
    rngs = [
        np.random.default_rng(np.random.SeedSequence(entropy + (c,)))
        for c in range(1, config.num_chains + 1)
    ]

    states = []
    base_z = None
    extra = list(inits) if inits is not None else []
    for c in range(1, config.num_chains + 1):
        if c == 1:
            st = init_chain(1, m, num_bases, hyp, rngs[0])
            base_z = st.z.copy()
        elif c == 2:
            st = init_chain(2, m, num_bases, hyp, rngs[1], base_z=base_z)
        else:
            if not extra:
                raise InvalidConfigurationError(
                    f"chain {c} needs a user-supplied initial state"
                )
            st = extra.pop(0).copy()
            if st.beta.shape != (m, num_bases):
                raise InvalidConfigurationError(
                    f"initial state for chain {c} has shape {st.beta.shape}, "
                    f"expected {(m, num_bases)}"
                )
        states.append(st)

    chains = [
        _run_chain(states[c - 1], data, bases, hyp, config, rngs[c - 1], c)
        for c in range(1, config.num_chains + 1)
    ]
    return PosteriorSample(
        chains=chains,
        iterations=np.array(config.retained_iterations()),
        config=config,
        mu_mode=hyp.mu_mode,
    )
