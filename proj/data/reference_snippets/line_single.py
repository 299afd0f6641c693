# id: line_single
# layout: single_plot
# provenance: bundled seed; line chart with two series, legend and grid
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

years = [2016, 2017, 2018, 2019, 2020, 2021, 2022]
solar = [12.1, 15.4, 19.8, 24.0, 27.5, 33.9, 41.2]
wind = [20.3, 22.8, 24.1, 26.7, 28.0, 30.4, 31.9]

fig, ax = plt.subplots(figsize=(6.4, 4.0), dpi=100)
ax.plot(years, solar, marker="o", label="Solar")
ax.plot(years, wind, marker="s", label="Wind")
ax.set_title("Installed capacity by source")
ax.set_xlabel("Year")
ax.set_ylabel("Capacity (GW)")
ax.grid(alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig("chart.png")
