# Pie chart.
# Replace the example data with your own; sizes are relative, they need not
# sum to 100. e.g. sizes_data = df["count"].to_numpy()
import matplotlib.pyplot as plt
import numpy as np

labels_data = ["Apple", "Pear", "Kiwi", "Mango"]
sizes_data = np.random.default_rng(0).uniform(1, 100, len(labels_data))

labels = labels_data
sizes = sizes_data

# Figure size is (width, height) in inches; change it to resize the chart.
fig, ax = plt.subplots(figsize=(8, 6))
# autopct prints each share; set it to None to hide the numbers.
ax.pie(sizes, labels=labels, autopct="%1.1f%%", startangle=90)
ax.axis("equal")  # keeps the pie round

ax.set_title("Fruit \"Market\" Share")

plt.tight_layout()
plt.show()
