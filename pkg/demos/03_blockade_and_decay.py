# %% [markdown]
# # Finite blockade and Rydberg decay
#
# Bell fidelity of the CZ gate as the blockade grows, then the shipped
# Cs and Rb presets where spontaneous emission is switched on.

# %%
from rydberg_cd.config import load_protocol
from rydberg_cd.gate import prepare_bell
from rydberg_cd.units import ghz

base, _ = load_protocol(preset="fig2")
for b in (0.5, 1, 2, 4):
    score = prepare_bell(base.set("blockade", ghz(b)))
    print(f"B/2pi = {b:>3} GHz   1 - F = {score.infidelity:.2e}")

# %% With decay the run switches to a density matrix
for name in ("fig4", "fig4_rb"):
    score = prepare_bell(load_protocol(preset=name)[0])
    print(f"{name:8s} F = {score.fidelity:.6f}  leakage = {score.leakage:.1e}  ({score.wall_clock:.1f} s)")
