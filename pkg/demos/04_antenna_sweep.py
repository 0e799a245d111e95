# %% [markdown]
# # Min harvested power versus antenna count at 40 dBm
#
# More antennas bring more array gain, pushing receivers into the concave
# region where one multi-beam covariance is already optimal. Isotropic
# transmission gets no array gain, but its *minimum* over 30 receivers still
# moves with M: fewer antennas mean more spread in ||h_k||^2 and a weaker
# worst receiver.

# %%
import numpy as np

from tdbeam import ScenarioConfig, run_sweep

cfg = ScenarioConfig(p_max_dbm_grid=[40], m_grid=[2, 3, 4, 5, 6], num_trials=8, seed=2)
res = run_sweep(cfg, out_dir="sweep_antennas")

# %%
rows = {(a["num_antennas"], a["scheme"]): a["mean_min_dc_mw"] for a in res.aggregate}
for M in cfg.m_grid:
    print(f"M={M}  " + "  ".join(f"{s}={rows[(M, s)]:.4f}" for s in cfg.schemes))

# %% per-receiver isotropic RF has mean (p/M) E||h||^2 = p g regardless of M
from tdbeam import ChannelModelParams, dbm_to_watts, sample_channels

for M in cfg.m_grid:
    model = ChannelModelParams(num_antennas=M)
    rf = [1e3 * dbm_to_watts(40) / M * sample_channels(model, s).gains for s in range(200)]
    rf = np.array(rf)
    print(f"M={M}  mean RF {rf.mean():.3f} mW   mean of min RF {rf.min(axis=1).mean():.3f} mW")
