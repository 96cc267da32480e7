"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 input-format error, 3 internal
error.  stdout carries data only; warnings and errors go to stderr.
"""

from __future__ import annotations

import argparse
import functools
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, UnidentifiedImageError

from . import codec, dataset, evalharness, grammar, reward, rollout_sim
from ._parallel import default_jobs, parallel_map
from .geometry import EmptyMaskError, ImageSize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3

OVERLAY_RGBA = (255, 64, 128, 110)
MARKER_RGBA = (255, 64, 128, 255)
MARKER_RADIUS = 2

_INPUT_ERRORS = (
    grammar.ParseError,
    dataset.RleFormatError,
    EmptyMaskError,
    FileNotFoundError,
    UnidentifiedImageError,
    json.JSONDecodeError,
    KeyError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse defaults to exit code 2; usage errors are code 1 here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _read_text_arg(value: str) -> str:
    return sys.stdin.read() if value == "-" else value


def _open_out(path: str):
    return sys.stdout if path == "-" else open(path, "w", encoding="utf-8")


def _load_instances(args):
    # lazy: streaming subcommands hold O(1) instances at a time
    if getattr(args, "coco", None):
        return dataset.load_coco(args.coco)
    captions = None
    if getattr(args, "captions", None):
        with open(args.captions, "r", encoding="utf-8") as f:
            captions = json.load(f)
    return dataset.load_mask_dir(args.masks_dir, captions)


def _add_instance_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--coco", help="COCO-style annotation JSON")
    src.add_argument("--masks-dir", help="directory of id-named mask PNGs")
    p.add_argument("--captions", help="JSON file mapping instance id to caption "
                                      "(with --masks-dir)")


def cmd_encode(args) -> int:
    mask = dataset.load_mask_png(args.mask)
    if not mask.any():
        print("error: empty mask", file=sys.stderr)
        return EXIT_INPUT
    h, w = mask.shape
    rings = [codec.simplify(r, args.epsilon) for r in codec.trace_contours(mask)]
    print(grammar.serialize(rings, ImageSize(w, h), args.decimals))
    return EXIT_OK


def cmd_decode(args) -> int:
    if args.width <= 0 or args.height <= 0:
        print("error: --width and --height must be positive", file=sys.stderr)
        return EXIT_USAGE
    text = _read_text_arg(args.text)
    try:
        parsed = grammar.parse(
            text, (grammar.ShapeKind.POLYGON, grammar.ShapeKind.MULTIPOLYGON))
    except grammar.ParseError as e:
        print(f"error: {e.kind.value} at byte {e.byte_offset}: {e.detail}",
              file=sys.stderr)
        return EXIT_INPUT
    size = ImageSize(args.width, args.height)
    mask = codec.rasterize(grammar.denormalize(parsed, size), size)
    dataset.save_mask_png(mask, args.out)
    return EXIT_OK


def _parse_reward_config(path: str | None) -> reward.RewardConfig:
    if path is None:
        return reward.RewardConfig()
    fields: dict = {}
    length_lambda = None
    length_budget = None
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key == "tau":
                fields["tau"] = float(value)
            elif key == "scale":
                fields["scale"] = float(value)
            elif key == "w_iou":
                fields["w_iou"] = float(value)
            elif key == "w_dist":
                fields["w_dist"] = float(value)
            elif key == "group_size":
                fields["group_size"] = int(value)
            elif key == "dist_mean":
                fields["dist_mean"] = value.lower() in ("1", "true", "yes")
            elif key == "length_lambda":
                length_lambda = float(value)
            elif key == "length_budget":
                length_budget = int(value)
            else:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    if (length_lambda is None) != (length_budget is None):
        raise ValueError(f"{path}: length_lambda and length_budget go together")
    if length_lambda is not None:
        fields["length_penalty"] = reward.LengthPenalty(length_lambda, length_budget)
    return reward.RewardConfig(**fields)


def cmd_reward(args) -> int:
    try:
        cfg = _parse_reward_config(args.config)
    except (OSError, ValueError) as e:
        print(f"error: unreadable config: {e}", file=sys.stderr)
        return EXIT_USAGE
    gt_dir = Path(args.gt_dir)
    cache: dict[str, np.ndarray] = {}
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        rid = rec["id"]
        if rid not in cache:
            path = gt_dir / f"{rid}.png"
            cache[rid] = dataset.load_mask_png(path) if path.exists() else None
            if len(cache) > 256:
                cache.pop(next(iter(cache)))
        gt = cache[rid]
        if gt is None:
            print(json.dumps({"id": rid, "error": "unknown-id"}))
            continue
        breakdown = reward.total_reward(rec["text"], gt, cfg)
        print(json.dumps({"id": rid, **breakdown.to_dict()}))
    return EXIT_OK


def _convert_one(inst, tasks, templates, epsilon, seed, decimals):
    try:
        pairs = dataset.generate_pairs(inst, tasks, templates, epsilon, seed,
                                       decimals)
    except EmptyMaskError:
        return None
    return [qp.to_json_line() for qp in pairs]


def cmd_convert(args) -> int:
    tasks = dataset.ALL_TASKS
    if args.tasks:
        by_value = {t.value: t for t in dataset.TaskKind}
        tasks = tuple(by_value[name.strip()] for name in args.tasks.split(","))
    templates = dataset.load_templates(args.templates) if args.templates else None
    worker = functools.partial(_convert_one, tasks=tasks, templates=templates,
                               epsilon=args.epsilon, seed=args.seed,
                               decimals=args.decimals)
    skipped = 0
    out = _open_out(args.out)
    try:
        if args.jobs > 1:
            results = parallel_map(worker, list(_load_instances(args)), args.jobs)
        else:
            results = map(worker, _load_instances(args))
        for lines in results:
            if lines is None:
                skipped += 1
                continue
            for line in lines:
                out.write(line + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    if skipped:
        _warn(f"skipped {skipped} empty-mask instance(s)")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    with open(args.preds, "r", encoding="utf-8") as f:
        preds = [json.loads(line) for line in f if line.strip()]
    report = evalharness.evaluate(preds, _load_instances(args), jobs=args.jobs)
    out = _open_out(args.out)
    try:
        out.write(report.to_json() + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_sweep(args) -> int:
    eps_list = [float(e) for e in args.eps.split(",") if e.strip() != ""]
    counts: dict = {}
    rows = evalharness.epsilon_sweep(
        _load_instances(args), eps_list, args.decimals, jobs=args.jobs,
        counts_out=counts)
    if counts.get("skipped"):
        _warn(f"skipped {counts['skipped']} empty-mask instance(s)")
    out = _open_out(args.out)
    try:
        out.write(evalharness.sweep_to_csv(rows))
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _default_specs(group_size: int, seed: int, instance_id: str):
    from ._rng import derive_seed
    menu = [
        dict(kind=rollout_sim.PerturbKind.JITTER, sigma=0.0),
        dict(kind=rollout_sim.PerturbKind.JITTER, sigma=0.01),
        dict(kind=rollout_sim.PerturbKind.JITTER, sigma=0.02),
        dict(kind=rollout_sim.PerturbKind.JITTER, sigma=0.05),
        dict(kind=rollout_sim.PerturbKind.VERTEX_DROPOUT, p=0.2),
        dict(kind=rollout_sim.PerturbKind.SHUFFLE_ORDER),
        dict(kind=rollout_sim.PerturbKind.TRUNCATE, fraction=0.5),
        dict(kind=rollout_sim.PerturbKind.CORRUPT_FORMAT),
    ]
    specs = []
    for slot in range(group_size):
        kw = menu[slot % len(menu)]
        specs.append(rollout_sim.PerturbSpec(
            seed=derive_seed(seed, instance_id, slot), **kw))
    return specs


def cmd_simulate(args) -> int:
    cfg = reward.RewardConfig(group_size=args.group_size)
    skipped = 0
    for inst in _load_instances(args):
        try:
            bundle = dataset.derive_targets(inst, args.epsilon, args.decimals)
        except EmptyMaskError:
            skipped += 1
            continue
        specs = _default_specs(args.group_size, args.seed, inst.id)
        group = rollout_sim.gen_group(
            inst.id, bundle.polygon_text, bundle.mask, specs, cfg, args.decimals)
        print(json.dumps({
            "id": group.instance_id,
            "responses": group.responses,
            "rewards": [float(r) for r in group.rewards],
            "advantages": [float(a) for a in group.advantages],
        }, ensure_ascii=False))
    if skipped:
        _warn(f"skipped {skipped} empty-mask instance(s)")
    return EXIT_OK


def cmd_render(args) -> int:
    with Image.open(args.image) as img:
        base = img.convert("RGBA")
    overlay = Image.new("RGBA", base.size, (0, 0, 0, 0))
    draw = ImageDraw.Draw(overlay)
    size = ImageSize(base.size[0], base.size[1])
    if args.text is not None:
        text = _read_text_arg(args.text)
        try:
            parsed = grammar.parse(
                text, (grammar.ShapeKind.POLYGON, grammar.ShapeKind.MULTIPOLYGON))
        except grammar.ParseError as e:
            print(f"error: {e.kind.value} at byte {e.byte_offset}: {e.detail}",
                  file=sys.stderr)
            return EXIT_INPUT
        rings = grammar.denormalize(parsed, size)
        if isinstance(rings, np.ndarray):
            rings = [rings]
        for ring in rings:
            pts = [(float(x), float(y)) for x, y in ring]
            if len(pts) >= 3:
                draw.polygon(pts, fill=OVERLAY_RGBA, outline=MARKER_RGBA)
            for x, y in pts:
                draw.ellipse([x - MARKER_RADIUS, y - MARKER_RADIUS,
                              x + MARKER_RADIUS, y + MARKER_RADIUS],
                             fill=MARKER_RGBA)
    else:
        mask = dataset.load_mask_png(args.mask)
        if mask.shape != (base.size[1], base.size[0]):
            print("error: mask size does not match image", file=sys.stderr)
            return EXIT_INPUT
        tint = np.zeros((mask.shape[0], mask.shape[1], 4), dtype=np.uint8)
        tint[mask] = OVERLAY_RGBA
        overlay = Image.fromarray(tint, "RGBA")
    Image.alpha_composite(base, overlay).save(args.out, format="PNG")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trajseg",
                     description="mask/point-trajectory toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", parents=[], help="mask PNG -> polygon text")
    p.add_argument("--mask", required=True)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--decimals", type=int, default=grammar.DEFAULT_DECIMALS)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="polygon text -> mask PNG")
    p.add_argument("--text", required=True, help="grammar text, or - for stdin")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("reward", help="score JSONL responses from stdin")
    p.add_argument("--gt-dir", required=True, help="directory of <id>.png masks")
    p.add_argument("--config", help="flat key=value reward config")
    p.set_defaults(func=cmd_reward)

    p = sub.add_parser("convert", help="annotations -> query-pair JSONL")
    _add_instance_source(p)
    p.add_argument("--tasks", help="comma-separated task kinds (default: all)")
    p.add_argument("--templates", help="template file")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--decimals", type=int, default=grammar.DEFAULT_DECIMALS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.add_argument("--jobs", type=int, default=default_jobs())
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("evaluate", help="score predictions JSONL against GT")
    p.add_argument("--preds", required=True)
    _add_instance_source(p)
    p.add_argument("--out", default="-")
    p.add_argument("--jobs", type=int, default=default_jobs())
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="tolerance-density sweep CSV")
    _add_instance_source(p)
    p.add_argument("--eps", required=True, help="comma-separated ascending list")
    p.add_argument("--decimals", type=int, default=grammar.DEFAULT_DECIMALS)
    p.add_argument("--out", default="-")
    p.add_argument("--jobs", type=int, default=default_jobs())
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="perturbed rollout groups JSONL")
    _add_instance_source(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--group-size", type=int, default=8)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--decimals", type=int, default=grammar.DEFAULT_DECIMALS)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("render", help="overlay mask/polygon on an image PNG")
    p.add_argument("--image", required=True)
    what = p.add_mutually_exclusive_group(required=True)
    what.add_argument("--text", help="grammar text, or - for stdin")
    what.add_argument("--mask", help="mask PNG")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _INPUT_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except BrokenPipeError:
        return EXIT_OK
    except Exception as e:  # noqa: BLE001 - last-resort mapping to exit code 3
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
