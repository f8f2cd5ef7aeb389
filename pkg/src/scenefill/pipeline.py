"""Batch operations behind the command line: inpaint, estimate masks, evaluate, synthesize."""

from __future__ import annotations

import json
import os
from concurrent.futures import Executor, ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict
from pathlib import Path
from typing import Any, Iterator, Literal, Sequence

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from scenefill.config import settings
from scenefill.core.types import Frame, Mask, WarpField
from scenefill.errors import ImageIOError, InputError
from scenefill.flow import FlowParams, chain
from scenefill.inpaint import InpaintParams, InpaintResult, estimate_mask, inpaint_frame
from scenefill.io.flo import read_warp_flo
from scenefill.io.flow_cache import FlowCache
from scenefill.io.images import (
    ESTIMATED_MASK_NAME,
    list_frames,
    load_masks,
    load_sequence,
    read_frames,
    write_frame,
    write_frames,
    write_mask,
)
from scenefill.metrics import MetricReport, evaluate_sequence
from scenefill.synth import generate_from_manifest, load_manifest, write_sequence
from scenefill.template import (
    SceneTemplate,
    compute_adjacent_flows,
    run_joint_optimization,
    sliding_window_run,
)
from scenefill.utils.dates import timed, utc_now
from scenefill.utils.logging import get_logger
from scenefill.utils.staging import staged_directory


logger = get_logger(__name__)

TEMPLATE_NAME = "template.png"
RUN_RECORD_NAME = "run.json"
REPORT_NAME = "report.json"


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    input_dir: Path
    mask_dir: Path | None = None
    output_dir: Path
    mode: Literal["full", "sliding"] = "full"
    window: int = Field(default_factory=lambda: settings.WINDOW)
    key_frame: int | Literal["middle"] = "middle"
    beta: float = Field(default_factory=lambda: settings.INPAINT_BETA, ge=0.0)
    alpha: float = Field(default_factory=lambda: settings.MASK_ALPHA, gt=0.0)
    max_outer: int = Field(default_factory=lambda: settings.MAX_OUTER, ge=0)
    refine: bool = True
    use_samples: bool = True
    flow_cache_dir: Path | None = None
    threads: int = Field(default_factory=lambda: settings.THREADS, ge=0)

    @model_validator(mode="after")
    def _check_window(self) -> "RunConfig":
        if self.mode == "sliding" and self.window < 2:
            raise ValueError("window must be >= 2 in sliding mode")
        return self

    @classmethod
    def from_sources(cls, config_file: str | Path | None = None, **overrides: Any) -> "RunConfig":
        """Values from the JSON file, then every override that is not None."""
        values: dict[str, Any] = {}
        if config_file is not None:
            path = Path(config_file)
            try:
                values.update(json.loads(path.read_text(encoding="utf-8")))
            except OSError as exc:
                raise ImageIOError(f"cannot read config {path}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise InputError(f"config {path} is not valid JSON: {exc}") from exc
        values.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls.model_validate(values)
        except ValidationError as exc:
            first = exc.errors()[0]
            location = ".".join(str(part) for part in first["loc"]) or "config"
            raise InputError(f"invalid config field '{location}': {first['msg']}") from exc

    def inpaint_params(self) -> InpaintParams:
        return InpaintParams(beta=self.beta, alpha=self.alpha, use_samples=self.use_samples)

    def resolved_key_frame(self, n: int) -> int:
        return n // 2 if self.key_frame == "middle" else int(self.key_frame)


@contextmanager
def worker_pool(threads: int) -> Iterator[Executor | None]:
    """threads=1 runs serially; 0 means one worker per CPU."""
    workers = (os.cpu_count() or 1) if threads == 0 else threads
    if workers <= 1:
        yield None
        return
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="scenefill") as pool:
        yield pool


def _inpaint_sequence(
    config: RunConfig,
    frames: Sequence[Frame],
    masks: Sequence[Mask],
    executor: Executor | None,
    timings: dict[str, float],
) -> tuple[list[InpaintResult], SceneTemplate, dict[str, Any]]:
    params = FlowParams.from_settings()
    inpaint_params = config.inpaint_params()
    cache = FlowCache(config.flow_cache_dir) if config.flow_cache_dir else None
    extra: dict[str, Any] = {}

    if config.mode == "sliding":
        with timed(timings, "sliding_window"):
            outcome = sliding_window_run(
                frames,
                masks,
                config.window,
                params,
                inpaint_params,
                max_outer=config.max_outer if config.refine else 0,
                executor=executor,
                cache=cache,
            )
        return outcome.results, outcome.template, extra

    with timed(timings, "joint_optimization"):
        state = run_joint_optimization(
            frames,
            masks,
            key_frame=config.resolved_key_frame(len(frames)),
            params=params,
            max_outer=config.max_outer,
            refine=config.refine,
            executor=executor,
            cache=cache,
        )
    with timed(timings, "inpaint"):
        if executor is None:
            results = [inpaint_frame(state, t, inpaint_params) for t in range(len(frames))]
        else:
            results = list(executor.map(lambda t: inpaint_frame(state, t, inpaint_params), range(len(frames))))
    extra["energy_trace"] = state.energy_trace
    extra["outer_iterations"] = state.outer_iterations
    extra["refine_skipped"] = sorted(state.refine_skipped)
    return results, state.template, extra


def _write_outputs(
    stage: Path,
    config: RunConfig,
    names: Sequence[str],
    masks: Sequence[Mask],
    results: Sequence[InpaintResult],
    template: SceneTemplate,
    timings: dict[str, float],
    extra: dict[str, Any],
) -> dict[str, Any]:
    write_frames(stage, [r.frame for r in results], names)
    write_frame(stage / TEMPLATE_NAME, template.to_frame())
    record = {
        "created_at": utc_now().isoformat(),
        "config": config.model_dump(mode="json"),
        "flow_params": asdict(FlowParams.from_settings()),
        "timings": timings,
        "template": {"width": template.domain.width, "height": template.domain.height, "coverage": template.coverage},
        "frames": [
            {"name": name, "masked": mask.count, "unfilled": result.unfilled.count}
            for name, mask, result in zip(names, masks, results)
        ],
        **extra,
    }
    (stage / RUN_RECORD_NAME).write_text(json.dumps(record, indent=2), encoding="utf-8")
    return record


def run_inpaint(config: RunConfig) -> dict[str, Any]:
    """Inpaint every frame of input_dir under the masks of mask_dir; returns the run record."""
    if config.mask_dir is None:
        raise InputError("inpaint needs a mask directory")
    timings: dict[str, float] = {}
    with timed(timings, "load"):
        paths, frames, masks = load_sequence(config.input_dir, config.mask_dir)
    logger.info("inpainting %d frames from %s (%s mode)", len(frames), config.input_dir, config.mode)

    with worker_pool(config.threads) as executor:
        results, template, extra = _inpaint_sequence(config, frames, masks, executor, timings)
    with staged_directory(config.output_dir) as stage:
        record = _write_outputs(stage, config, [p.name for p in paths], masks, results, template, timings, extra)
    return record


def _nearest_annotated(i: int, annotated: Sequence[int]) -> int:
    return min(annotated, key=lambda a: (abs(a - i), a))


def _frame_to_template(
    i: int, anchor: int, inv_anchor: WarpField, forward: Sequence[WarpField], backward: Sequence[WarpField]
) -> WarpField:
    """Chain adjacent flows from frame i to the annotated anchor, then the anchor's inverse warp."""
    if i > anchor:
        steps = [backward[k] for k in range(i - 1, anchor - 1, -1)]
    else:
        steps = [forward[k] for k in range(i, anchor)]
    return chain([*steps, inv_anchor])


def run_estimate_mask(config: RunConfig, annotated_prefix: int | None = None) -> dict[str, Any]:
    """Estimate masks for frames without annotations from a template of the annotated ones, then inpaint.

    With `annotated_prefix` the first that many frames must carry masks; otherwise every frame with a
    mask file counts as annotated.
    """
    if config.mask_dir is None:
        raise InputError("estimate-mask needs a mask directory with the annotated frames")
    if annotated_prefix is not None and annotated_prefix < 1:
        raise InputError("at least one annotated frame is required")
    timings: dict[str, float] = {}
    paths = list_frames(config.input_dir)
    if not paths:
        raise InputError(f"no %06d.png frames found in {config.input_dir}")
    if annotated_prefix is not None:
        if annotated_prefix > len(paths):
            raise InputError(f"{annotated_prefix} annotated frames requested, sequence has {len(paths)}")
        loaded = load_masks(paths[:annotated_prefix], config.mask_dir, required=True)
        loaded += [None] * (len(paths) - annotated_prefix)
    else:
        loaded = load_masks(paths, config.mask_dir, required=False)
    annotated = [i for i, m in enumerate(loaded) if m is not None]
    if not annotated:
        raise InputError(f"no annotated frames found in {config.mask_dir}")
    with timed(timings, "load"):
        frames = read_frames(paths)
    for i in annotated:
        loaded[i].check_matches(frames[i])  # type: ignore[union-attr]

    params = FlowParams.from_settings()
    cache = FlowCache(config.flow_cache_dir) if config.flow_cache_dir else None
    provisional = [m if m is not None else Mask.like(f) for m, f in zip(loaded, frames)]
    with worker_pool(config.threads) as executor:
        with timed(timings, "adjacent_flows"):
            forward, backward = (
                compute_adjacent_flows(frames, provisional, params, executor, cache) if len(frames) > 1 else ([], [])
            )
        contiguous = annotated == list(range(annotated[0], annotated[-1] + 1))
        adjacent = (forward[annotated[0] : annotated[-1]], backward[annotated[0] : annotated[-1]]) if contiguous else None
        with timed(timings, "annotated_template"):
            state = run_joint_optimization(
                [frames[i] for i in annotated],
                [provisional[i] for i in annotated],
                params=params,
                max_outer=config.max_outer,
                refine=config.refine,
                adjacent=adjacent if len(annotated) > 1 else None,
                executor=executor,
            )

        estimated: dict[int, Mask] = {}
        with timed(timings, "estimate_masks"):
            for i in range(len(frames)):
                if i in annotated:
                    continue
                anchor = _nearest_annotated(i, annotated)
                inv = _frame_to_template(i, anchor, state.inv_warps[annotated.index(anchor)], forward, backward)
                estimated[i] = estimate_mask(frames[i], state.template, inv, config.alpha)
        logger.info("estimated %d masks from %d annotated frames", len(estimated), len(annotated))

        masks = [estimated.get(i, provisional[i]) for i in range(len(frames))]
        results, template, extra = _inpaint_sequence(config, frames, masks, executor, timings)

    names = [p.name for p in paths]
    extra["annotated"] = [names[i] for i in annotated]
    extra["estimated"] = {names[i]: m.count for i, m in sorted(estimated.items())}
    with staged_directory(config.output_dir) as stage:
        for i, mask in estimated.items():
            write_mask(stage / ESTIMATED_MASK_NAME.format(int(paths[i].stem)), mask)
        record = _write_outputs(stage, config, names, masks, results, template, timings, extra)
    return record


def _load_flows(flow_dir: Path, n: int, frames: Sequence[Frame]) -> list[WarpField] | None:
    paths = [flow_dir / f"{t:06d}_{t + 1:06d}.flo" for t in range(n - 1)]
    if not all(p.exists() for p in paths):
        return None
    rect = frames[0].rect
    return [read_warp_flo(p, rect, rect) for p in paths]


def run_eval(
    result_dir: str | Path,
    gt_dir: str | Path,
    mask_dir: str | Path | None = None,
    flow_dir: str | Path | None = None,
    report_path: str | Path | None = None,
) -> MetricReport:
    """Compare numbered result frames with ground truth; writes report.json next to the results."""
    result_paths = list_frames(result_dir)
    gt_paths = list_frames(gt_dir)
    if len(result_paths) != len(gt_paths):
        raise InputError(f"{len(result_paths)} result frames but {len(gt_paths)} ground-truth frames")
    mismatched = [(r.name, g.name) for r, g in zip(result_paths, gt_paths) if r.name != g.name]
    if mismatched:
        raise InputError(f"sequences are not aligned: {mismatched[0][0]} vs {mismatched[0][1]}")
    if not result_paths:
        raise InputError(f"no %06d.png frames found in {result_dir}")
    results = read_frames(result_paths)
    ground_truth = read_frames(gt_paths)

    masks = None
    if mask_dir is not None and list_frames(mask_dir):
        masks = [m for m in load_masks(gt_paths, mask_dir, required=True) if m is not None]

    flows = None
    if masks is not None:
        candidate = Path(flow_dir) if flow_dir is not None else Path(gt_dir).parent / "flows"
        if candidate.is_dir():
            flows = _load_flows(candidate, len(ground_truth), ground_truth)
            if flows is not None:
                logger.info("using adjacent flows from %s", candidate)

    report = evaluate_sequence(results, ground_truth, masks, flows)
    report.to_json(report_path or Path(result_dir) / REPORT_NAME)
    return report


def run_synth(spec_file: str | Path, out_dir: str | Path) -> Path:
    manifest = load_manifest(spec_file)
    seq = generate_from_manifest(manifest)
    with staged_directory(out_dir) as stage:
        write_sequence(seq, stage, manifest)
    return Path(out_dir)


__all__ = [
    "RunConfig",
    "run_estimate_mask",
    "run_eval",
    "run_inpaint",
    "run_synth",
    "worker_pool",
]
