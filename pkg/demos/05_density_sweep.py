"""Trade vertex budget against fidelity with the tolerance sweep, and
plot the structural side of the tradeoff.

Run:  python demos/05_density_sweep.py   (writes sweep.png)
"""

import numpy as np

import trajseg as T
from trajseg import Instance, RleSource
from trajseg.evalharness import sweep_to_csv


def make_instances(seed: int, count: int, n: int = 64) -> list[Instance]:
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:n, 0:n]
    out = []
    for k in range(count):
        m = np.zeros((n, n), dtype=bool)
        for _ in range(rng.integers(1, 4)):
            cx, cy = rng.uniform(10, n - 10, 2)
            rx, ry = rng.uniform(4, 16, 2)
            m |= ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
        out.append(Instance(f"e{k}", "", T.ImageSize(n, n),
                            RleSource(tuple(T.encode_rle(m)), (n, n))))
    return out


ladder = [0.0, 0.0005, 0.001, 0.002, 0.005, 0.01, 0.02, 0.05]
rows = T.epsilon_sweep(make_instances(3, 200), ladder)
print(sweep_to_csv(rows))

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax1 = plt.subplots(figsize=(6, 4))
    eps = [r.epsilon_rel for r in rows]
    ax1.plot(eps, [r.mean_vertices for r in rows], "o-", label="mean vertices")
    ax1.set_xscale("symlog", linthresh=1e-4)
    ax1.set_xlabel("tolerance (relative to perimeter)")
    ax1.set_ylabel("mean vertices per mask")
    ax2 = ax1.twinx()
    ax2.plot(eps, [r.mean_roundtrip_iou for r in rows], "s--", color="tab:red",
             label="round-trip IoU")
    ax2.set_ylabel("mean round-trip IoU")
    fig.tight_layout()
    fig.savefig("sweep.png", dpi=120)
    print("wrote sweep.png")
except ImportError:
    print("matplotlib not installed; skipped the plot")
