"""Model containers and the joint posterior density.

The observation model for curve i at point t_ij is

    y_ij = sum_k Z_ki beta_ki B_k(t_ij) + eps_ij,   eps_ij ~ N(0, sigma2)

with beta_ki | sigma2, tau2 ~ N(0, sigma2 tau2), Z_ki | theta_ki ~
Bernoulli(theta_ki), theta_ki ~ Beta(mu_ki, 1 - mu_ki), and inverse-gamma
priors IG(lambda1, lambda2) on tau2 and IG(delta1, delta2) on sigma2. The
prior mean mu is either a fixed scalar shared by all (k, i) or, in "random"
mode, a Uniform(0, psi) parameter per (k, i).
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .bases import evaluate_basis
from .errors import (
    DegenerateCurveError,
    DomainError,
    InvalidConfigurationError,
)

__all__ = [
    "Curve",
    "Dataset",
    "Hyperparameters",
    "ChainState",
    "design_matrices",
    "predict_curve",
    "log_joint_posterior",
    "standardize_curves",
]


@dataclass
class Curve:
    """One observed curve: points t, values y, and an optional display name.

    ``scale`` records the per-curve standard deviation divided out by
    standardize_curves; it stays None for raw data.
    """

    t: np.ndarray
    y: np.ndarray
    name: str = ""
    scale: float | None = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.t.ndim != 1 or self.y.ndim != 1 or self.t.size != self.y.size:
            raise InvalidConfigurationError(
                "curve t and y must be 1-D arrays of equal length"
            )
        if self.t.size == 0:
            raise InvalidConfigurationError("curve must contain at least one point")
        if not (np.all(np.isfinite(self.t)) and np.all(np.isfinite(self.y))):
            raise InvalidConfigurationError("curve values must be finite")

    @property
    def n(self):
        return self.t.size


@dataclass
class Dataset:
    """A collection of m >= 1 observed curves sharing one basis expansion."""

    curves: list

    def __post_init__(self):
        if len(self.curves) == 0:
            raise InvalidConfigurationError("dataset needs at least one curve")

    @property
    def m(self):
        return len(self.curves)

    @property
    def counts(self):
        return np.array([c.n for c in self.curves])

    @property
    def total_obs(self):
        return int(sum(c.n for c in self.curves))


@dataclass(frozen=True)
class Hyperparameters:
    """Prior settings.

    sigma2 ~ IG(delta1, delta2) and tau2 ~ IG(lambda1, lambda2), all four
    defaulting to 0 (the improper 1/x priors). The theta prior mean is given
    either directly as ``mu`` or as ``expected_bases`` (the prior expected
    number of active bases C, converted to mu = C / K once K is known).
    ``mu_mode`` is "fixed" (scalar mu) or "random" (mu_ki ~ Uniform(0, psi)).
    """

    delta1: float = 0.0
    delta2: float = 0.0
    lambda1: float = 0.0
    lambda2: float = 0.0
    mu: float | None = None
    expected_bases: float | None = None
    mu_mode: str = "fixed"
    psi: float = 0.6

    def __post_init__(self):
        for name in ("delta1", "delta2", "lambda1", "lambda2"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise InvalidConfigurationError(f"{name} must be >= 0, got {v}")
        if self.mu_mode not in ("fixed", "random"):
            raise InvalidConfigurationError(
                f"mu_mode must be 'fixed' or 'random', got {self.mu_mode!r}"
            )
        if self.mu_mode == "fixed":
            if self.mu is None and self.expected_bases is None:
                raise InvalidConfigurationError(
                    "fixed-mu mode needs either mu or expected_bases"
                )
            if self.mu is not None and not (0.0 < self.mu < 1.0):
                raise DomainError(f"mu must lie in (0, 1), got {self.mu}")
            if self.expected_bases is not None and self.expected_bases <= 0:
                raise InvalidConfigurationError(
                    f"expected_bases must be positive, got {self.expected_bases}"
                )
        else:
            if not (0.0 < self.psi < 1.0):
                raise DomainError(f"psi must lie in (0, 1), got {self.psi}")

    def resolved_mu(self, num_bases):
        """Concrete scalar prior mean for a K-basis fit (fixed mode only)."""
        if self.mu is not None:
            return self.mu
        if self.expected_bases is None:
            raise InvalidConfigurationError("no mu and no expected_bases to resolve")
        mu = self.expected_bases / num_bases
        if not (0.0 < mu < 1.0):
            raise DomainError(
                f"expected_bases={self.expected_bases} gives mu={mu} outside (0, 1) "
                f"for K={num_bases}"
            )
        return mu


@dataclass
class ChainState:
    """Full parameter state of one Gibbs chain.

    beta, z and theta are (m, K) arrays indexed [curve, basis]; z holds 0/1
    inclusion indicators. mu is a scalar in fixed-mu mode and an (m, K) array
    in random-mu mode.
    """

    beta: np.ndarray
    z: np.ndarray
    theta: np.ndarray
    mu: object
    sigma2: float
    tau2: float

    def copy(self):
        mu = self.mu.copy() if isinstance(self.mu, np.ndarray) else self.mu
        return ChainState(
            beta=self.beta.copy(),
            z=self.z.copy(),
            theta=self.theta.copy(),
            mu=mu,
            sigma2=float(self.sigma2),
            tau2=float(self.tau2),
        )


def design_matrices(system, data):
    """Evaluate one basis system at every curve's points."""
    return [evaluate_basis(system, c.t) for c in data.curves]


def predict_curve(state, basis, i):
    """Fitted values for curve i: B @ (z_i * beta_i)."""
    if basis.num_bases != state.beta.shape[1]:
        raise InvalidConfigurationError(
            f"basis has {basis.num_bases} columns but state carries "
            f"{state.beta.shape[1]} coefficients"
        )
    return basis.values @ (state.z[i] * state.beta[i])


def _logit(p):
    return np.log(p) - np.log1p(-p)


def log_joint_posterior(state, data, bases, hyp):
    """Log of the joint posterior density, up to an additive constant.

    Collects the inverse-gamma priors on sigma2 and tau2, the combined
    Beta(theta | mu) and Bernoulli(Z | theta) factor (mu + Z - 1) logit(theta),
    the Gaussian prior on all m*K partial coefficients, the Gaussian
    likelihood, and, in random-mu mode, the Uniform(0, psi) indicator on mu.
    Returns -inf when a random-mode mu falls outside (0, psi).
    """
    if state.sigma2 <= 0 or not np.isfinite(state.sigma2):
        raise DomainError(f"sigma2 must be positive, got {state.sigma2}")
    if state.tau2 <= 0 or not np.isfinite(state.tau2):
        raise DomainError(f"tau2 must be positive, got {state.tau2}")
    theta = np.asarray(state.theta, dtype=float)
    if np.any(theta <= 0.0) or np.any(theta >= 1.0):
        raise DomainError("theta entries must lie strictly inside (0, 1)")

    m, num_bases = state.beta.shape
    sigma2 = float(state.sigma2)
    tau2 = float(state.tau2)
    total = 0.0

    # Inverse-gamma priors (improper when the hyperparameters are 0).
    total -= (hyp.delta1 + 1.0) * np.log(sigma2) + hyp.delta2 / sigma2
    total -= (hyp.lambda1 + 1.0) * np.log(tau2) + hyp.lambda2 / tau2

    # Uniform(0, psi) prior on mu in random mode.
    if hyp.mu_mode == "random":
        mu = np.asarray(state.mu, dtype=float)
        if mu.shape != (m, num_bases):
            raise InvalidConfigurationError(
                "random-mu mode needs an (m, K) mu array in the state"
            )
        if np.any(mu <= 0.0) or np.any(mu >= hyp.psi):
            return -np.inf
        total -= m * num_bases * np.log(hyp.psi)
        mu_term = mu
    else:
        mu_term = float(state.mu)

    # Beta(theta | mu, 1 - mu) together with Bernoulli(Z | theta).
    total += float(np.sum((mu_term + state.z - 1.0) * _logit(theta)))

    # Gaussian prior on the partial coefficients.
    beta_sq = float(np.sum(state.beta * state.beta))
    total -= 0.5 * m * num_bases * np.log(2.0 * np.pi * sigma2 * tau2)
    total -= beta_sq / (2.0 * sigma2 * tau2)

    # Gaussian likelihood.
    sse = 0.0
    for i, curve in enumerate(data.curves):
        resid = curve.y - predict_curve(state, bases[i], i)
        sse += float(resid @ resid)
    total -= 0.5 * data.total_obs * np.log(2.0 * np.pi * sigma2)
    total -= sse / (2.0 * sigma2)
    return float(total)


def standardize_curves(data):
    """Divide each curve by its sample standard deviation (ddof = 1).

    Returns a new Dataset with the scale recorded per curve; the input is
    untouched. A curve with fewer than two points or zero variance cannot be
    standardized.
    """
    out = []
    for curve in data.curves:
        if curve.n < 2:
            raise DegenerateCurveError(
                f"curve {curve.name!r} has {curve.n} point(s), cannot standardize"
            )
        sd = float(np.std(curve.y, ddof=1))
        if sd == 0.0:
            raise DegenerateCurveError(
                f"curve {curve.name!r} is constant, cannot standardize"
            )
        out.append(
            Curve(t=curve.t.copy(), y=curve.y / sd, name=curve.name, scale=sd)
        )
    return Dataset(curves=out)
