# %% [markdown]
# # Lower bounds and the shallow/deep gap
#
# The deep-net lower bound decays like ``(n log n)^{-r/d}`` up to
# constants; shallow nets reach ``n^{-r/d}``.  Their ratio grows only
# like a power of ``log n``.

# %%
import numpy as np

from netcap.bounds import deep_net_lower_bound, fit_loglog_slope, fit_polylog, gap_report
from netcap.capacity import constant_ledger

led = constant_ledger(1.0, 1.0, 1)
cert = deep_net_lower_bound(1024, 2, 1.0, 2, 1.0, 1, led)
print("C =", cert.constant)
for key, val in cert.trail.items():
    print(f"  {key}: {val}")

# %%
ns = [2**k for k in range(10, 21)]
table = gap_report(1.0, 1, 2, ns, led)
lower = np.array(table.curves["deep-lower"])
print("slope with log factor removed:", round(fit_loglog_slope(ns, lower * np.log2(ns)), 4))
a, b = fit_polylog(ns, table.ratio)
print(f"ratio ~ {a:.3f} (ln n)^{b:.3f}")

# %%
for n, row in zip(table.n[::3], table.ratio[::3]):
    print(f"n = {n:8d}   normalised shallow / deep = {row:6.3f}")
