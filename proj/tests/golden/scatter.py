# Scatter plot.
# Replace the example data with your own, e.g.
#   x_data = df["height"].to_numpy(); y_data = df["weight"].to_numpy()
import matplotlib.pyplot as plt
import numpy as np

# Tick labels read from the image, for reference.
x_ticks = ["0", "20", "40", "60", "80", "100"]
series_names = ["Series 1"]
rng = np.random.default_rng(0)
x_data = rng.uniform(0, 100, 30)
y_data = rng.uniform(0, 100, 30)

x = x_data
y = y_data

# Figure size is (width, height) in inches; change it to resize the chart.
fig, ax = plt.subplots(figsize=(8, 6))
# s sets the marker size, c the color.
ax.scatter(x, y, s=40, c="tab:blue", label=series_names[0])

ax.set_title("Height vs Weight")
ax.set_xlabel("Height")
# No y-axis label was found in the image; uncomment the line below to add one.
# ax.set_ylabel("y label")

plt.tight_layout()
plt.show()
