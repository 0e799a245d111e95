# %% [markdown]
# # The sigmoid harvesting curve
#
# A rectifier turns RF power into DC power along an S-shaped curve: convex
# below its center b, concave above. That shape is why time sharing can help.

# %%
import numpy as np

from tdbeam import EhParams, dc_power, dc_power_derivative, inflection_point

eh = EhParams()          # q_max = 10.73 mW, a = 0.2308 / mW, b = 5.365 mW
print(eh)

# %% zero in, zero out; saturation at q_max
for q in [0.0, 1.5, 3.0, inflection_point(eh), 10.0, 20.0, 60.0]:
    print(f"RF {q:7.3f} mW -> DC {dc_power(eh, q):7.4f} mW   slope {dc_power_derivative(eh, q):.4f}")

# %% [markdown]
# Sending all power to one receiver half the time beats sending half the
# power all the time while the curve is convex:

# %%
print("0.5 * Q(3.0) =", 0.5 * dc_power(eh, 3.0))
print("      Q(1.5) =", dc_power(eh, 1.5))

# %% second differences change sign at b
q = np.linspace(0, 15, 301)
d2 = np.diff(dc_power(eh, q), 2)
flip = q[1:-1][np.argmax(d2 < 0)]
print(f"curvature turns negative near {flip:.2f} mW (b = {eh.b})")
