# %% [markdown]
# # Three-photon ladder: chirped passage against a phase-jump pulse
#
# The strong middle field pushes the intermediate levels away; larger
# Omega2 means less intermediate population and better fidelity.
# The 10 GHz points take a couple of minutes each on one core.

# %%
from rydberg_cd.config import load_protocol
from rydberg_cd.gate import prepare_bell
from rydberg_cd.units import ghz

for name in ("fig7b_cdarp", "fig7b_phasejump"):
    base, _ = load_protocol(preset=name)
    for w in (2, 5, 10):
        score = prepare_bell(base.set("omega2", ghz(w)))
        print(f"{name:16s} Omega2/2pi = {w:>2} GHz   F = {score.fidelity:.5f}  ({score.wall_clock:.0f} s)")
