# %% [markdown]
# # Inside one time-division solve
#
# The alternating loop starts from the TDMA schedule, takes trust-region
# steps on the per-slot covariances, and re-solves the duration LP. The
# objective trace only ever goes up.

# %%
import numpy as np

from tdbeam import (AlgorithmSettings, ChannelModelParams, EhParams, dbm_to_watts, multibeam,
                    sample_channels, time_division)

eh = EhParams()
ch = sample_channels(ChannelModelParams(), seed=3)
p = dbm_to_watts(38)

_, mb = multibeam(ch, p, 1.0, eh)
sched, rep = time_division(ch, p, 1.0, eh, AlgorithmSettings())
print(f"multibeam     {mb.min_dc_energy:.4f} mW")
print(f"time division {rep.min_dc_energy:.4f} mW  ({rep.status}, {rep.outer_iterations} outer, "
      f"{rep.inner_iterations} inner)")
print("trace:", np.round(rep.objective_trace, 4))

# %% which slots survive, and how many beams each uses
for tau, cov in sched.slots:
    if tau > 1e-9:
        print(f"tau {tau:.4f}  rank {cov.rank}  trace {cov.trace:.3f} W")

# %% every certificate from the kernels
for c in rep.certificates[:5]:
    print(c)
