# id: bar_grouped
# layout: single_plot
# provenance: bundled seed; grouped bar chart with value labels
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

regions = ["North", "South", "East", "West"]
q1 = [42, 35, 51, 28]
q2 = [47, 33, 55, 31]
x = np.arange(len(regions))
w = 0.38

fig, ax = plt.subplots(figsize=(6.4, 4.0), dpi=100)
b1 = ax.bar(x - w / 2, q1, w, label="Q1")
b2 = ax.bar(x + w / 2, q2, w, label="Q2")
ax.bar_label(b1, fontsize=8)
ax.bar_label(b2, fontsize=8)
ax.set_xticks(x, regions)
ax.set_ylabel("Orders (thousands)")
ax.set_title("Orders per region")
ax.legend()
fig.tight_layout()
fig.savefig("chart.png")
