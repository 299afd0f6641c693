# id: heatmap_single
# layout: single_plot
# provenance: bundled seed; annotated heatmap with colorbar
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

days = ["Mon", "Tue", "Wed", "Thu", "Fri"]
hours = ["8h", "10h", "12h", "14h", "16h", "18h"]
data = np.array([
    [3, 7, 9, 6, 4, 2],
    [4, 8, 10, 7, 5, 3],
    [2, 6, 8, 9, 6, 4],
    [5, 9, 11, 8, 6, 3],
    [6, 7, 7, 5, 3, 1],
])

fig, ax = plt.subplots(figsize=(6.4, 4.0), dpi=100)
im = ax.imshow(data, cmap="viridis")
ax.set_xticks(range(len(hours)), hours)
ax.set_yticks(range(len(days)), days)
for i in range(len(days)):
    for j in range(len(hours)):
        ax.text(j, i, data[i, j], ha="center", va="center", color="w", fontsize=8)
fig.colorbar(im, ax=ax, label="Tickets")
ax.set_title("Support tickets by hour")
fig.tight_layout()
fig.savefig("chart.png")
