"""Point estimates, fit metrics and generalized cross-validation."""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateCurveError,
    DomainError,
    InvalidConfigurationError,
    UndefinedGCVError,
    UndefinedMetricError,
)
from .model import log_joint_posterior

__all__ = [
    "FitSummary",
    "map_estimates",
    "metric_global",
    "metric_per_curve",
    "mse_vs_truth",
    "gcv",
    "gcv_mean",
    "summarize",
]


@dataclass
class FitSummary:
    """Point estimates and quality measures for one fitted dataset."""

    beta_hat: np.ndarray        # (m, K)
    z_hat: np.ndarray           # (m, K) 0/1
    xi_hat: np.ndarray          # (K,) averaged selected coefficients
    sigma2_hat: float
    tau2_hat: float
    k_end: int                  # bases active in xi_hat
    metric_global: float
    metric_per_curve: np.ndarray        # (m,)
    metric_per_curve_mean: float
    gcv_per_curve: np.ndarray           # (m,)
    gcv_mean: float
    estimator: str

    def to_dict(self):
        return {
            "estimator": self.estimator,
            "beta_hat": self.beta_hat.tolist(),
            "z_hat": self.z_hat.tolist(),
            "xi_hat": self.xi_hat.tolist(),
            "sigma2_hat": self.sigma2_hat,
            "tau2_hat": self.tau2_hat,
            "k_end": self.k_end,
            "metric_global": self.metric_global,
            "metric_per_curve": self.metric_per_curve.tolist(),
            "metric_per_curve_mean": self.metric_per_curve_mean,
            "gcv_per_curve": self.gcv_per_curve.tolist(),
            "gcv_mean": self.gcv_mean,
        }


def map_estimates(samples, data, bases, hyp, estimator="map"):
    """Point estimates pooled over every chain's retained draws.

    The inclusion estimate z_hat is the entrywise majority over draws, with a
    tie at exactly half resolving to 1 (xi_hat then exposes the coefficient
    rather than silently dropping it). With estimator="map" the continuous
    parameters come from the single retained state with the highest joint
    log density; "mean" takes posterior means instead.

    Returns (beta_hat, z_hat, sigma2_hat, tau2_hat, xi_hat).
    """
    if estimator not in ("map", "mean"):
        raise InvalidConfigurationError(
            f"estimator must be 'map' or 'mean', got {estimator!r}"
        )
    states = list(samples.states())
    if not states:
        raise InvalidConfigurationError("posterior sample holds no retained draws")
    z_stack = np.stack([s.z for s in states])
    z_hat = (2 * z_stack.sum(axis=0) >= len(states)).astype(np.int64)

    if estimator == "map":
        scores = [log_joint_posterior(s, data, bases, hyp) for s in states]
        best = states[int(np.argmax(scores))]
        beta_hat = best.beta.copy()
        sigma2_hat = float(best.sigma2)
        tau2_hat = float(best.tau2)
    else:
        beta_hat = np.mean([s.beta for s in states], axis=0)
        sigma2_hat = float(np.mean([s.sigma2 for s in states]))
        tau2_hat = float(np.mean([s.tau2 for s in states]))

    xi_hat = np.where(z_hat == 1, beta_hat, 0.0).mean(axis=0)
    return beta_hat, z_hat, sigma2_hat, tau2_hat, xi_hat


def _adjusted_fit_term(y, fitted, k_end):
    n = y.size
    if n <= k_end:
        raise UndefinedMetricError(
            f"metric needs more points than active bases (n={n}, K_end={k_end})"
        )
    resid = y - fitted
    rss = float(resid @ resid)
    centered = y - y.mean()
    tss = float(centered @ centered)
    if tss == 0.0:
        raise DegenerateCurveError("curve has zero total sum of squares")
    return (n - 1) * rss / ((n - k_end) * tss)


def metric_global(data, bases, xi_hat):
    """Adjusted fit metric of the averaged coefficient estimate.

    1 - (1/m) sum_i [(n_i - 1) RSS_i] / [(n_i - K_end) TSS_i], where every
    curve is compared against the single curve B xi_hat and K_end counts the
    nonzero entries of xi_hat. Equals 1 for a perfect fit and can go negative.
    """
    xi = np.asarray(xi_hat, dtype=float)
    k_end = int(np.count_nonzero(np.abs(xi) > 0.0))
    terms = [
        _adjusted_fit_term(curve.y, basis.values @ xi, k_end)
        for curve, basis in zip(data.curves, bases)
    ]
    return 1.0 - float(np.mean(terms))


def metric_per_curve(data, bases, z_hat, beta_hat):
    """Adjusted fit metric of each curve's own selected coefficients.

    Curve i is compared against B (z_i * beta_i) with K_end,i = sum_k z_ki.
    Returns the m per-curve values; their mean is the averaged variant.
    """
    out = np.empty(data.m)
    for i, (curve, basis) in enumerate(zip(data.curves, bases)):
        fitted = basis.values @ (z_hat[i] * beta_hat[i])
        out[i] = 1.0 - _adjusted_fit_term(curve.y, fitted, int(z_hat[i].sum()))
    return out


def mse_vs_truth(true_values, fitted_values):
    """Mean squared error between two curves on a shared grid."""
    t = np.asarray(true_values, dtype=float)
    f = np.asarray(fitted_values, dtype=float)
    if t.shape != f.shape:
        raise InvalidConfigurationError(
            f"shape mismatch: {t.shape} vs {f.shape}"
        )
    d = t - f
    return float(d @ d) / t.size


def gcv(curve, basis, z_i, tau2_hat):
    """Generalized cross-validation score of one curve given its selection.

    With G = B diag(z_i) and D = (1/tau2) I + G'G, the smoother is
    S = G D^-1 G' and

        GCV = (1/n) ||y - S y||^2 / (1 - tr(S)/n)^2.

    The trace comes from Cholesky solves of D against G'G. An effective
    dimension tr(S) >= n leaves the score undefined.
    """
    if not (tau2_hat > 0 and np.isfinite(tau2_hat)):
        raise DomainError(f"tau2_hat must be positive, got {tau2_hat}")
    zf = np.asarray(z_i, dtype=float)
    if not np.all((zf == 0.0) | (zf == 1.0)):
        raise DomainError("z entries must be 0 or 1")
    n = curve.n
    num_bases = basis.num_bases
    masked_gram = basis.gram * np.outer(zf, zf)
    dmat = masked_gram + np.eye(num_bases) / tau2_hat
    chol = np.linalg.cholesky(dmat)
    # tr(S) = tr(D^-1 G'G) via two triangular solves
    tmp = np.linalg.solve(chol, masked_gram)
    inner = np.linalg.solve(np.transpose(chol), tmp)
    trace = float(np.trace(inner))
    gty = zf * (basis.values.T @ curve.y)
    coef = np.linalg.solve(np.transpose(chol), np.linalg.solve(chol, gty))
    fitted = basis.values @ (zf * coef)
    resid = curve.y - fitted
    denom = 1.0 - trace / n
    if denom <= 0.0:
        raise UndefinedGCVError(
            f"effective dimension tr(S)={trace:.3f} reaches n={n}"
        )
    return (float(resid @ resid) / n) / (denom * denom)


def gcv_mean(data, bases, z_hat, tau2_hat):
    """Average GCV over curves; the model-choice score for one basis size."""
    scores = np.array(
        [gcv(c, b, z_hat[i], tau2_hat) for i, (c, b) in enumerate(zip(data.curves, bases))]
    )
    return float(scores.mean()), scores


def summarize(samples, data, bases, hyp, estimator="map"):
    """Assemble the full FitSummary for one posterior sample."""
    beta_hat, z_hat, sigma2_hat, tau2_hat, xi_hat = map_estimates(
        samples, data, bases, hyp, estimator=estimator
    )
    per_curve = metric_per_curve(data, bases, z_hat, beta_hat)
    mean_gcv, per_curve_gcv = gcv_mean(data, bases, z_hat, tau2_hat)
    return FitSummary(
        beta_hat=beta_hat,
        z_hat=z_hat,
        xi_hat=xi_hat,
        sigma2_hat=sigma2_hat,
        tau2_hat=tau2_hat,
        k_end=int(np.count_nonzero(np.abs(xi_hat) > 0.0)),
        metric_global=metric_global(data, bases, xi_hat),
        metric_per_curve=per_curve,
        metric_per_curve_mean=float(per_curve.mean()),
        gcv_per_curve=per_curve_gcv,
        gcv_mean=mean_gcv,
        estimator=estimator,
    )
