# %% [markdown]
# # Min harvested power versus transmit power (M = 4, K = 30)
#
# Each trial draws one Rician channel set. Below roughly 40 dBm the weakest
# receivers sit in the convex region and time-division beamforming gains a
# few percent over a single multi-beam covariance; at higher power the two
# coincide. Trials are kept small here so the script runs in a few minutes;
# use ``tdbeam sweep`` for full runs.

# %%
from tdbeam import ScenarioConfig, run_sweep

cfg = ScenarioConfig(p_max_dbm_grid=[34, 36, 38, 40, 42], m_grid=[4], num_trials=10, seed=1)
res = run_sweep(cfg, out_dir="sweep_power")

# %%
rows = {(a["p_max_dbm"], a["scheme"]): a for a in res.aggregate}
print("p_dBm " + " ".join(f"{s:>14s}" for s in cfg.schemes) + "   td/mb")
for p in cfg.p_max_dbm_grid:
    vals = [rows[(p, s)]["mean_min_dc_mw"] for s in cfg.schemes]
    gain = rows[(p, "time_division")]["mean_min_dc_mw"] / rows[(p, "multibeam")]["mean_min_dc_mw"]
    print(f"{p:5.0f} " + " ".join(f"{v:14.4f}" for v in vals) + f"   {gain:.3f}")
