# %% [markdown]
# # Monte Carlo comparison
#
# 200 noise realizations per strategy. The designed input is fixed across
# runs; the standard input (Gaussian or PRBS) is redrawn each run.

# %%
import numpy as np

from smmdesign import McConfig, baseline_robustness, compare, snr_sweep


def show(comp):
    for name, s in comp.summaries.items():
        q1, med, q3 = np.percentile(s.fit, [25, 50, 75])
        print(f"  {name:10s} W median {med:6.2f} IQR [{q1:6.2f}, {q3:6.2f}]   "
              f"|g|^2 median {np.median(s.g_norm_sq):.4f}")


# %%
print("energy constraint")
show(compare(McConfig(constraint="energy")))
print("magnitude constraint")
show(compare(McConfig(constraint="magnitude")))

# %% [markdown]
# The advantage grows as the noise level rises.

# %%
for s2, comp in snr_sweep(McConfig(), [0.1, 0.01, 0.001]).items():
    print(f"sigma2 = {s2}")
    show(comp)

# %% [markdown]
# A rough baseline is enough: an SMM model from a prior experiment at
# SNR 10 dB designs nearly as good an input as the true system.

# %%
for comp in baseline_robustness(McConfig(baseline_sigma2=0.1), ["true", "prior_smm"]):
    print(f"baseline {comp.baseline.source}")
    show(comp)
