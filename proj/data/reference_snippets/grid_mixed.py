# id: grid_mixed
# layout: multi_subplot
# provenance: bundled seed; 2x2 grid mixing line, bar, scatter and pie panels
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

rng = np.random.default_rng(7)
fig, axes = plt.subplots(2, 2, figsize=(8.0, 6.0), dpi=100)

t = np.arange(12)
axes[0, 0].plot(t, 50 + 3 * t + rng.normal(0, 2, 12))
axes[0, 0].set_title("(a) Monthly visits")

axes[0, 1].bar(["A", "B", "C", "D"], [14, 22, 9, 17], color="tab:orange")
axes[0, 1].set_title("(b) Defects by line")

x = rng.normal(0, 1, 60)
axes[1, 0].scatter(x, 0.8 * x + rng.normal(0, 0.4, 60), s=12)
axes[1, 0].set_title("(c) Load vs latency")

axes[1, 1].pie([45, 30, 25], labels=["Web", "App", "Store"], autopct="%1.0f%%")
axes[1, 1].set_title("(d) Channel share")

fig.tight_layout()
fig.savefig("chart.png")
