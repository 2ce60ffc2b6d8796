# %% [markdown]
# # Two passages make a pi phase
#
# A single atom driven |1> -> |r> -> |1> by two identical chirped pulses
# returns with a sign flip.  Inverting the second pulse removes the phase.

# %%
import math

import numpy as np

from rydberg_cd.dynamics import accumulated_phase, propagate_schrodinger
from rydberg_cd.model import LevelScheme, single_atom_hamiltonian
from rydberg_cd.pulsegen import PulseParams, SinglePhotonDrive
from rydberg_cd.units import mhz

scheme = LevelScheme("single_photon")


def run(pulse):
    drive = SinglePhotonDrive(pulse)
    psi0 = np.zeros(scheme.n, complex)
    psi0[scheme.index("1")] = 1
    return propagate_schrodinger(
        lambda t: single_atom_hamiltonian(scheme, drive, t), psi0, pulse.span, labels=list(scheme.levels)
    )


# %%
for sign in (1, -1):
    tr = run(PulseParams(mhz(20), mhz(10), 0.05, second_pulse_sign=sign))
    phi = accumulated_phase(tr, "1").value
    print(f"second pulse {sign:+d}: P(1) = {tr.population('1')[-1]:.6f}, "
          f"min P(1) = {tr.population('1').min():.1e}, phase/pi = {phi / math.pi:+.4f}")
