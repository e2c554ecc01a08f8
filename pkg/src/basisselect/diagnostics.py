"""Convergence assessment via the Gelman-Rubin potential scale reduction factor."""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateChainError, InvalidConfigurationError

__all__ = ["ConvergenceReport", "gelman_rubin", "convergence_report"]


def gelman_rubin(chains):
    """Potential scale reduction factor for one scalar parameter.

    ``chains`` is a sequence of at least two equally long draw sequences
    (>= 2 draws each). With W the mean within-chain variance and B the
    between-chain variance (n times the variance of the chain means, both
    with denominator count-1):

        rhat = sqrt(((n - 1)/n * W + B/n) / W)

    Values near 1 indicate the chains have mixed.
    """
    arrs = [np.asarray(c, dtype=float) for c in chains]
    if len(arrs) < 2:
        raise InvalidConfigurationError("need at least two chains")
    n = arrs[0].size
    if n < 2:
        raise InvalidConfigurationError("each chain needs at least two draws")
    if any(a.ndim != 1 or a.size != n for a in arrs):
        raise InvalidConfigurationError("chains must be 1-D and equally long")
    stacked = np.stack(arrs)
    within = float(np.mean(np.var(stacked, axis=1, ddof=1)))
    if within == 0.0:
        raise DegenerateChainError("zero within-chain variance")
    between = n * float(np.var(np.mean(stacked, axis=1), ddof=1))
    vhat = (n - 1) / n * within + between / n
    return float(np.sqrt(vhat / within))


@dataclass
class ConvergenceReport:
    """Scale reduction factors for a fit, plus the pass/fail verdict."""

    rhat_beta: np.ndarray          # (m, K)
    threshold: float
    converged: bool
    max_rhat: float
    num_chains: int
    draws_per_chain: int
    rhat_sigma2: float | None = None
    rhat_tau2: float | None = None

    def to_dict(self):
        out = {
            "threshold": self.threshold,
            "converged": bool(self.converged),
            "max_rhat": self.max_rhat,
            "num_chains": self.num_chains,
            "draws_per_chain": self.draws_per_chain,
            "rhat_beta": self.rhat_beta.tolist(),
        }
        if self.rhat_sigma2 is not None:
            out["rhat_sigma2"] = self.rhat_sigma2
        if self.rhat_tau2 is not None:
            out["rhat_tau2"] = self.rhat_tau2
        return out


def convergence_report(samples, threshold=1.1, include_scale_params=False):
    """Gelman-Rubin factors for every beta chain of a posterior sample.

    The factors are computed on the retained (post burn-in, thinned) draws.
    ``converged`` requires every monitored factor to stay below ``threshold``.
    Scale parameters sigma2/tau2 are reported on request and then also count
    toward the verdict.
    """
    if samples.num_chains < 2:
        raise InvalidConfigurationError(
            "convergence assessment needs at least two chains"
        )
    beta = samples.array_draws("beta")  # (chains, draws, m, K)
    _, _, m, num_bases = beta.shape
    rhat = np.empty((m, num_bases))
    for i in range(m):
        for k in range(num_bases):
            rhat[i, k] = gelman_rubin(beta[:, :, i, k])
    tracked = [float(rhat.max())]
    rhat_s2 = rhat_t2 = None
    if include_scale_params:
        rhat_s2 = gelman_rubin(samples.scalar_draws("sigma2"))
        rhat_t2 = gelman_rubin(samples.scalar_draws("tau2"))
        tracked += [rhat_s2, rhat_t2]
    max_rhat = max(tracked)
    return ConvergenceReport(
        rhat_beta=rhat,
        threshold=threshold,
        converged=bool(max_rhat < threshold),
        max_rhat=float(max_rhat),
        num_chains=samples.num_chains,
        draws_per_chain=samples.draws_per_chain,
        rhat_sigma2=rhat_s2,
        rhat_tau2=rhat_t2,
    )
