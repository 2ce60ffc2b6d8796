# %% [markdown]
# # Pulse shapes and the counterdiabatic term
#
# A super-Gaussian amplitude with a sine chirp, plus the imaginary
# correction that keeps the passage adiabatic even for a 50 ns pulse.

# %%
import numpy as np

from rydberg_cd.pulsegen import PulseParams, cd_term, omega0, sample_sequence
from rydberg_cd.units import mhz

p = PulseParams(omega_max=mhz(20), delta0=mhz(10), T=0.05)
print(f"edge offset a = {p.a:.3e}, width = {p.width} us")

# %% The amplitude starts and ends at exactly zero
print(omega0(-p.T / 2, p), omega0(0.0, p) / p.omega_max, omega0(p.T / 2, p))

# %% The correction peaks close to the pulse centre and flips sign with the chirp slope
t = np.linspace(-p.T / 2, p.T / 2, 2001)
cd = cd_term(t, p)
k = np.argmax(np.abs(cd))
print(f"peak |Omega_CD| = {abs(cd[k]):.2f} rad/us at t = {t[k] * 1e3:+.2f} ns")

# %% Both pulses of the gate, sampled over [-T, T]
s = sample_sequence(p, points_per_pulse=5)
for row in zip(s["t_us"], s["omega0"], s["omega_cd"], s["delta"]):
    print("  ".join(f"{v:+9.3f}" for v in row))
