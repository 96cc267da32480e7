"""How responses earn (or lose) reward, and how groups normalize.

Run:  python demos/03_reward_anatomy.py
"""

import numpy as np

import trajseg as T
from trajseg import PerturbKind, PerturbSpec

gt = np.zeros((40, 40), dtype=bool)
gt[8:30, 10:32] = True
size = T.ImageSize(40, 40)
gt_text = T.serialize([T.simplify(r, 0.0) for r in T.trace_contours(gt)], size)

candidates = {
    "exact trajectory": gt_text,
    "small jitter": T.perturb(gt_text, PerturbSpec(PerturbKind.JITTER, seed=1,
                                                   sigma=0.01), size),
    "heavy jitter": T.perturb(gt_text, PerturbSpec(PerturbKind.JITTER, seed=2,
                                                   sigma=0.08), size),
    "shuffled ring": T.perturb(gt_text, PerturbSpec(PerturbKind.SHUFFLE_ORDER,
                                                    seed=3), size),
    "truncated": T.perturb(gt_text, PerturbSpec(PerturbKind.TRUNCATE, seed=4,
                                                fraction=0.6), size),
    "wrong shape": "[0.25, 0.2, 0.8, 0.75]",
}

print(f"{'response':<18} {'format':>6} {'IoU':>6} {'r_iou':>7} {'r_dist':>8} {'total':>8}")
for name, text in candidates.items():
    b = T.total_reward(text, gt)
    print(f"{name:<18} {str(b.format_ok):>6} {b.iou_value:>6.3f} "
          f"{b.r_iou:>7.3f} {b.r_dist:>8.4f} {b.total:>8.4f}")

rewards = [T.total_reward(t, gt).total for t in candidates.values()]
adv = T.group_advantages(rewards + [0.0, 0.0])  # pad to a group of 8
print("\ngroup advantages (mean 0, std 1):")
for name, a in zip(list(candidates) + ["pad", "pad"], adv):
    print(f"  {name:<18} {a:+.3f}")

# The IoU term gates at tau: a sub-threshold overlap earns nothing.
pred = np.zeros((40, 40), dtype=bool)
pred[8:30, 10:24]  = True  # ~64% of gt
below = T.total_reward(
    T.serialize(T.trace_contours(pred), size), gt, T.RewardConfig(tau=0.7))
print(f"\nwith tau=0.7: IoU {below.iou_value:.3f} -> r_iou {below.r_iou}")
