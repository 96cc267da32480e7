"""Generate unified query pairs from one annotated instance.

Run:  python demos/04_query_pairs.py
"""

import numpy as np

import trajseg as T
from trajseg import Instance, RleSource

mask = np.zeros((25, 25), dtype=bool)
mask[4:18, 6:20] = True
mask[14:21, 3:10] = True

inst = Instance(
    id="demo-001",
    image_ref="images/demo.jpg",
    size=T.ImageSize(25, 25),
    mask_source=RleSource(tuple(T.encode_rle(mask)), (25, 25)),
    caption="the gray excavator",
)

bundle = T.derive_targets(inst)
print("weak labels derived from the mask alone:")
print(f"  point  {bundle.point_text}")
print(f"  bbox   {bundle.bbox_text}")
print(f"  mask   {bundle.polygon_text[:68]}...")

print("\none JSONL line per (input -> output) task:")
for pair in T.generate_pairs(inst, seed=7):
    print(pair.to_json_line())

# Every response must itself parse under the grammar.
for pair in T.generate_pairs(inst, seed=7):
    T.parse(pair.response)
print("\nall responses re-parse cleanly")
