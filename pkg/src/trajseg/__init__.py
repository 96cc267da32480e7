"""trajseg: masks as point trajectories.

Converts binary masks to ordered vertex rings and back, serializes them
in a normalized coordinate text grammar, computes rule-based RL rewards
and referring-segmentation metrics, and generates unified query-pair
instruction data.
"""

from .geometry import (
    BBox,
    EmptyMaskError,
    ImageSize,
    Point,
    box_iou,
    is_clockwise,
    mask_bbox,
    mask_centroid,
    polygon_centroid,
    signed_area,
    size_of,
    vertex_mean,
)
from .codec import (
    SimplifyTolerance,
    rasterize,
    rasterize_like,
    roundtrip,
    simplify,
    trace_contours,
)
from .grammar import (
    DEFAULT_DECIMALS,
    BBoxText,
    MultiPolygonText,
    ParseError,
    ParseErrorKind,
    PointText,
    PolygonText,
    ShapeKind,
    denormalize,
    parse,
    quantize,
    serialize,
)
from .metrics import CorpusScores, SamplePair, aggregate, centroid_sq_dist, mask_iou
from .reward import (
    LengthPenalty,
    RewardBreakdown,
    RewardConfig,
    format_reward,
    group_advantages,
    total_reward,
)
from .dataset import (
    DEFAULT_TEMPLATES,
    ALL_TASKS,
    Instance,
    MaskFileSource,
    PolygonSource,
    QueryPair,
    RleFormatError,
    RleSource,
    TaskKind,
    decode_rle,
    derive_targets,
    encode_rle,
    generate_pairs,
    load_coco,
    load_mask,
    load_mask_dir,
    load_mask_png,
    load_templates,
    rle_from_string,
    rle_to_string,
    save_mask_png,
)
from .rollout_sim import PerturbKind, PerturbSpec, RolloutGroup, gen_group, perturb
from .evalharness import (
    EvalReport,
    PredictionRecord,
    SweepRow,
    epsilon_sweep,
    evaluate,
    sweep_to_csv,
)

__version__ = "0.1.0"
