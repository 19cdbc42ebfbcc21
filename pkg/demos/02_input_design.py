# %% [markdown]
# # Designing the excitation input
#
# Under the relaxed likelihood the estimate covariance is sigma2 * |g|^2 * I,
# so shrinking |g|^2 shrinks the A-, D- and E-optimality criteria together.
# g depends on the output data, which is unknown before the experiment, so
# the outputs are predicted with a baseline FIR model.

# %%
import numpy as np

from smmdesign import (
    DesignProblem,
    EnergyConstraint,
    MagnitudeConstraint,
    benchmark_system,
    design_objective,
    gen_gaussian_input,
    gen_prbs,
    impulse_response,
    optimality_criteria,
    optimize_input,
)
from smmdesign.design import structure_check

N, L0, Lf, sigma2 = 63, 8, 13, 0.01
h_base = impulse_response(benchmark_system(), Lf + 1).values

# %% [markdown]
# Energy constraint |u|^2 <= N. Ten starts, projected gradient with an
# adjoint gradient of |g(u)|^2.

# %%
problem = DesignProblem(N, L0, Lf, sigma2, h_base, EnergyConstraint(1.0), seed=0)
res = optimize_input(problem)
print(f"designed |g|^2 = {res.objective:.5f} after {res.iterations} iterations (start {res.best_start})")
print("per-start objectives:", np.round(res.start_objectives, 5))

u_rand = gen_gaussian_input(N, 1.0, seed=5).values
print(f"random input  |g|^2 = {design_objective(u_rand, problem)[0]:.5f}")

crit = optimality_criteria(L0 + Lf, sigma2, res.objective)
print(f"J_A = {crit.J_A:.3e}, J_D = {crit.J_D:.2f}, J_E = {crit.J_E:.3e}")

# %% [markdown]
# The optimized input is nearly zero in its first L0 and last Lf - 1 samples:
# those samples only ever sit in the past or future window of a column.

# %%
check = structure_check(res.u, L0, Lf)
print("edge |u| / max |u| =", round(check["edge_ratio"], 4))
print(np.array2string(res.u, precision=2, max_line_width=88))

# %% [markdown]
# Magnitude constraint |u_t| <= 1. The optimum is not a binary sequence.

# %%
box = DesignProblem(N, L0, Lf, sigma2, h_base, MagnitudeConstraint(-1.0, 1.0), seed=0)
res_box = optimize_input(box)
u_prbs = gen_prbs(N, -1.0, 1.0, seed=5).values
print(f"designed |g|^2 = {res_box.objective:.5f}, PRBS |g|^2 = {design_objective(u_prbs, box)[0]:.5f}")
print(f"energy {res_box.u @ res_box.u:.1f} of at most {N}; samples at the bounds:",
      int(np.sum(np.isclose(np.abs(res_box.u), 1.0))))
