# %% [markdown]
# # Sweeping and refining pulse parameters
#
# A coarse amplitude/chirp grid written to CSV, followed by a local
# Nelder-Mead refinement from an offset starting point.

# %%
import tempfile
from pathlib import Path

from rydberg_cd.config import load_protocol
from rydberg_cd.sweep import Axis, FreeParam, OptimizerSpec, SweepSpec, optimize, run_sweep

base, _ = load_protocol(preset="fig2")
axes = (
    Axis("pulse.omega_max", (15.0, 20.0, 25.0), "MHz_over_2pi"),
    Axis("pulse.delta0", (5.0, 10.0, 15.0), "MHz_over_2pi"),
)
res = run_sweep(SweepSpec(base, axes, "bell_infidelity"))
xs, ys, grid = res.grid()
print("rows: Omega_max", xs, " cols: delta0", ys)
print(grid)

out = Path(tempfile.mkdtemp())
print("written:", res.to_csv(out / "sweep.csv"), res.write_grid(out / "grid.csv"))

# %% Refinement (about 10 s)
params = (
    FreeParam("pulse.omega_max", 15.0, 25.0, 18.0, "MHz_over_2pi"),
    FreeParam("pulse.delta0", 5.0, 15.0, 12.0, "MHz_over_2pi"),
)
opt = optimize(OptimizerSpec(base, params, max_evals=150))
print(opt.best, f"1 - F = {opt.best_value:.2e} after {opt.n_evals} evaluations")
