# %% [markdown]
# # Covering numbers of structured nets
#
# Weight sharing shrinks the number of free parameters ``n``, and the
# covering bound depends on ``n`` rather than on the number of entries.
# We compare a dense layer stack with a Toeplitz (convolution) stack of
# the same shape.

# %%
import numpy as np

from netcap.capacity import enumerate_epsilon_net, network_covering_bound, packing_vs_bound_report, parameter_grid
from netcap.fixtures import chain
from netcap.network import dense, toeplitz1d

d = 4
conv = toeplitz1d(d, kernel_width=3, depth=2)
full = dense([d, d, d])
print("free parameters  conv:", conv.n, " dense:", full.n)

# %%
for eps in (0.5, 0.1, 0.01):
    bc = network_covering_bound(conv, eps)
    bf = network_covering_bound(full, eps)
    print(f"eps={eps:<5} log2 N  conv {bc.log2_tight:9.1f}   dense {bf.log2_tight:9.1f}")

# %% [markdown]
# The bounds are astronomically loose for small nets.  A direct look: a
# greedy packing of a two-layer chain on a parameter grid stays tiny.

# %%
arch = chain(5)
thetas = parameter_grid(arch, per_axis=7)
for eps in (0.5, 0.25, 0.1):
    rep = packing_vs_bound_report(arch, eps, thetas)
    print(f"eps={eps}: packing at 2 eps = {rep.empirical_packing:3d}, bound 2^{rep.log2_tight:.0f}")

# %% [markdown]
# An explicit net for a three-parameter chain, checked on random draws.

# %%
small = chain(3)
net = enumerate_epsilon_net(small, 0.25)
worst, tol, _, _ = net.validate(500)
print("net size", net.size, "certified radius", round(net.radius, 4), "worst sampled distance", round(worst, 4))
print("points per axis", [len(a) for a in net.axes])
