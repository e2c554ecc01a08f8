"""Pick the basis-family size by generalized cross-validation.

Fits the same simulated curves with several B-spline family sizes and
compares the across-curve mean GCV; the generating size (K=10) should score
lowest. The shortened schedule keeps the loop at a few seconds.
"""

from basisselect.bases import make_bspline_basis
from basisselect.model import Hyperparameters, design_matrices
from basisselect.sampler import GibbsConfig, run_gibbs
from basisselect.summary import gcv_mean, map_estimates
from basisselect.synth import generate_study1

synth = generate_study1(m=3, n=60, sigma=0.1, seed=13)
domain = (float(synth.t.min()), float(synth.t.max()))
hyp = Hyperparameters(mu=0.1)

scores = {}
for k in (6, 8, 10, 12, 14):
    system = make_bspline_basis(domain, num_bases=k)
    bases = design_matrices(system, synth.data)
    config = GibbsConfig(num_iterations=1200, num_chains=2,
                         burn_in_fraction=0.5, thinning=20, seed=(4, k))
    samples = run_gibbs(synth.data, bases, hyp, config)
    _, z_hat, _, tau2_hat, _ = map_estimates(samples, synth.data, bases, hyp)
    scores[k], _ = gcv_mean(synth.data, bases, z_hat, tau2_hat)
    print(f"K={k:<3} mean GCV = {scores[k]:.6g}")

best = min(scores, key=scores.get)
print("selected size:", best)
