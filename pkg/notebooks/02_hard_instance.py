# %% [markdown]
# # A well-separated family of smooth functions
#
# Bumps on a grid of ``N^d`` cells, signed by the words of a binary code,
# give many functions of the smoothness class that sit far apart in L1.

# %%
import numpy as np

from netcap.hard_instance import (
    build_family,
    make_bump,
    min_admissible_c0,
    separation_bound,
    verify_class_membership,
    verify_separation,
)

d, r, N = 2, 1.0, 4
c0 = 8.0
print("smallest admissible c0 for this profile:", round(min_admissible_c0(d, r), 4))
fam = build_family(N, make_bump(d, r, c0))
print("cells", fam.partition.n_cells, "code words", len(fam.code), "min code l1", fam.code.min_l1)

# %%
sep = verify_separation(fam, pair_budget=50)
print("closest pair distance", round(sep.min_distance, 5), ">= bound", round(separation_bound(d, r, N), 5))
print("closed form agrees to", f"{sep.max_closed_form_rel_err:.1e}")

# %%
worst, reps = verify_class_membership(fam, n_members=3, n_pairs=2000)
print("worst Holder ratio", round(worst.max_ratio, 3), "against c0 =", c0)

# %% [markdown]
# A member on a coarse grid, printed as signs of the cell values.

# %%
f = fam.member(1)
xs = fam.partition.axis_centers
X = np.array([[x, y] for y in xs[::-1] for x in xs])
print(np.sign(f(X)).reshape(N, N).astype(int))
