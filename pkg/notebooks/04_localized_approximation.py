# %% [markdown]
# # Localized approximation with 2d + 1 sigmoids
#
# Two hidden layers suffice to approximate the indicator of a box away
# from its boundary; the error decays exponentially in the sharpness.

# %%
import numpy as np

from netcap.network import evaluate, localized_net

rng = np.random.default_rng(0)
lo, hi = np.array([-0.5, -0.2]), np.array([0.4, 0.6])
X = rng.uniform(-1, 1, (20_000, 2))
inside = np.all((X > lo) & (X < hi), axis=1)
gap = np.min(np.abs(np.concatenate([X - lo, X - hi], axis=1)), axis=1)
far = gap > 0.05

# %%
for K in (10, 30, 100, 300, 1000):
    arch, params = localized_net(2, lo, hi, K)
    err = np.abs(evaluate(arch, params, X[far]) - inside[far])
    print(f"K = {K:5d}  max error away from the boundary {err.max():.2e}")
