# id: line_panels
# layout: multi_subplot
# provenance: bundled seed; 1x3 row of line panels sharing the y axis
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

x = np.linspace(0, 10, 40)
fig, axes = plt.subplots(1, 3, figsize=(9.0, 3.2), dpi=100, sharey=True)
for ax, k, name in zip(axes, [0.5, 1.0, 2.0], ["low", "mid", "high"]):
    ax.plot(x, np.exp(-0.1 * k * x) * np.cos(k * x))
    ax.set_title(f"damping: {name}")
    ax.set_xlabel("time (s)")
axes[0].set_ylabel("amplitude")
fig.tight_layout()
fig.savefig("chart.png")
