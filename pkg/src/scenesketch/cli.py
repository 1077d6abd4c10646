"""Operator command line.

Subcommands wrap the library's operations as thin, deterministic, logged
steps: identical invocations produce byte-identical artifacts.  Every
command takes ``--preset`` (desk | paper), ``--seed``, ``--out`` and
repeatable ``--config key=value`` overrides, and writes a ``run_*.json``
manifest recording the resolved configuration and its hash.

Exit codes: 0 success; 1 runtime failure inside a module; 2 usage errors
(bad flags, unknown preset, missing input files).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from .assemble import assemble_scene, render_svg, scene_polylines_json
from .composer.sample import LayoutScene, load_composer, sample_layout
from .composer.train import train_composer
from .data.errors import DataError
from .data.layout import parse_layout_dataset, write_layout_dataset
from .data.strokes import (parse_stroke_dataset, stroke5_to_polylines,
                           write_stroke_dataset)
from .data.synthetic import (DEFAULT_TRIPLES, STROKE_FAMILIES,
                             generate_stroke_family,
                             generate_synthetic_layout_corpus,
                             render_description)
from .engine import CheckpointError, TrainingError
from .evaluation import run_eval
from .presets import Preset, UsageError, apply_overrides, resolve_preset
from .rng import child_seed, derived_seed
from .sketcher.registry import (RegistryError, load_registry,
                                write_registry_manifest)
from .sketcher.train import train_sketcher

__all__ = ["main", "build_parser"]

_RUNTIME_ERRORS = (DataError, TrainingError, CheckpointError, RegistryError,
                   OSError)


def _require_file(path: str | Path, what: str) -> Path:
    path = Path(path)
    if not path.exists():
        raise UsageError(f"{what} not found: {path}")
    return path


def _canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _write_run_manifest(out_dir: Path, command: str, preset: Preset,
                        seed: int, overrides: list[str],
                        inputs: dict | None = None) -> Path:
    resolved = {
        "composer": dict(sorted(preset.composer.items())),
        "sketcher": dict(sorted(preset.sketcher.items())),
        "corpus": preset.corpus.to_dict(),
        "eval": preset.eval.to_dict(),
    }
    body = {
        "command": command,
        "preset": preset.name,
        "seed": seed,
        "overrides": sorted(overrides),
        "resolved": resolved,
        "inputs": inputs or {},
    }
    digest = hashlib.sha256(
        json.dumps(body, sort_keys=True).encode()).hexdigest()[:16]
    body["config_hash"] = digest
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"run_{command.replace('-', '_')}.json"
    path.write_text(_canonical_json(body))
    return path


def _resolved_preset(args) -> Preset:
    return apply_overrides(resolve_preset(args.preset), args.config)


def _add_common(parser: argparse.ArgumentParser, default_out: str) -> None:
    parser.add_argument("--preset", default="desk",
                        help="named parameter set: desk or paper")
    parser.add_argument("--seed", type=int, default=0,
                        help="root seed; all streams derive from it")
    parser.add_argument("--out", default=default_out,
                        help="output directory for artifacts")
    parser.add_argument("--config", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="override a preset value, e.g. "
                             "composer.train_steps=100 (repeatable)")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_gen_corpus(args) -> int:
    preset = _resolved_preset(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    layouts = generate_synthetic_layout_corpus(
        preset.corpus.n_layouts, seed=derived_seed(args.seed, "corpus"))
    layout_path = out / "layouts.jsonl"
    write_layout_dataset(layout_path, layouts)
    print(f"wrote {len(layouts)} layouts -> {layout_path}")

    stroke_seed = derived_seed(args.seed, "stroke-corpus")
    for index, family in enumerate(sorted(STROKE_FAMILIES)):
        records = generate_stroke_family(
            family, preset.corpus.strokes_per_class,
            seed=child_seed(stroke_seed, index))
        path = out / f"strokes_{family}.jsonl"
        write_stroke_dataset(
            path, [stroke5_to_polylines(r.strokes) for r in records])
        print(f"wrote {len(records)} {family} sketches -> {path}")

    _write_run_manifest(out, "gen-corpus", preset, args.seed, args.config)
    return 0


def cmd_train_composer(args) -> int:
    preset = _resolved_preset(args)
    corpus_path = _require_file(args.corpus, "layout corpus")
    parsed = parse_layout_dataset(corpus_path)
    out = Path(args.out)
    result = train_composer(parsed.records, seed=args.seed,
                            config_kwargs=dict(preset.composer),
                            out_dir=out)
    _write_run_manifest(out, "train-composer", preset, args.seed, args.config,
                        inputs={"corpus": str(corpus_path)})
    final = ", ".join(f"{k}={v:.4f}" for k, v in result.final_losses.items())
    print(f"composer checkpoint -> {result.checkpoint_path}")
    print(f"final losses: {final}")
    return 0


def cmd_train_sketcher(args) -> int:
    preset = _resolved_preset(args)
    corpus_path = _require_file(args.corpus, "stroke corpus")
    records = parse_stroke_dataset(corpus_path, args.label)
    out = Path(args.out)
    result = train_sketcher(records, seed=args.seed,
                            config_kwargs=dict(preset.sketcher),
                            out_dir=out)

    # Maintain the registry manifest beside the checkpoints so sampling
    # commands can resolve classes without extra bookkeeping.
    manifest_path = out / "registry.json"
    classes: dict[str, str] = {}
    fallback = args.fallback
    if manifest_path.exists():
        existing = json.loads(manifest_path.read_text())
        classes.update(existing.get("classes", {}))
        fallback = args.fallback or existing.get("fallback")
    classes[args.label] = result.checkpoint_path.name
    write_registry_manifest(manifest_path, classes, fallback=fallback)

    _write_run_manifest(out, f"train-sketcher-{args.label}", preset,
                        args.seed, args.config,
                        inputs={"corpus": str(corpus_path),
                                "label": args.label})
    final = ", ".join(f"{k}={v:.4f}" for k, v in result.final_losses.items())
    print(f"sketcher checkpoint -> {result.checkpoint_path}")
    print(f"registry -> {manifest_path}")
    print(f"final losses: {final}")
    return 0


def _load_pipeline(composer_path, registry_path):
    bundle = load_composer(_require_file(composer_path, "composer checkpoint"))
    registry = load_registry(_require_file(registry_path, "registry manifest"))
    registry.ensure_covers(bundle.label_vocab.to_list())
    return bundle, registry


def _write_scene(out: Path, layout: LayoutScene, registry, temperature: float,
                 seed: int) -> None:
    scene = assemble_scene(layout, registry, temperature=temperature,
                           seed=seed)
    (out / "layout.json").write_text(_canonical_json(layout.to_dict()))
    (out / "scene.svg").write_text(render_svg(scene))
    (out / "scene.json").write_text(_canonical_json(scene_polylines_json(scene)))
    print(f"layout -> {out / 'layout.json'}")
    print(f"svg -> {out / 'scene.svg'}")


def cmd_sample(args) -> int:
    preset = _resolved_preset(args)
    bundle, registry = _load_pipeline(args.composer, args.registry)
    if not args.desc.strip():
        raise UsageError("--desc must be a nonempty description")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    temperature = (preset.eval.temperature if args.temperature is None
                   else args.temperature)
    layout = sample_layout(bundle, args.desc,
                           seed=derived_seed(args.seed, "sampling"),
                           temperature=temperature)
    _write_scene(out, layout, registry, temperature,
                 seed=derived_seed(args.seed, "service"))
    _write_run_manifest(out, "sample", preset, args.seed, args.config,
                        inputs={"composer": str(args.composer),
                                "registry": str(args.registry),
                                "desc": args.desc})
    return 0


def cmd_render(args) -> int:
    preset = _resolved_preset(args)
    layout_path = _require_file(args.layout, "layout document")
    registry = load_registry(_require_file(args.registry, "registry manifest"))
    try:
        doc = json.loads(layout_path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"layout document is not valid JSON: {exc}") from exc
    layout = LayoutScene.from_dict(doc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    temperature = (preset.eval.temperature if args.temperature is None
                   else args.temperature)
    _write_scene(out, layout, registry, temperature,
                 seed=derived_seed(args.seed, "service"))
    _write_run_manifest(out, "render", preset, args.seed, args.config,
                        inputs={"layout": str(layout_path),
                                "registry": str(args.registry)})
    return 0


def cmd_eval(args) -> int:
    preset = _resolved_preset(args)
    bundle = load_composer(_require_file(args.composer, "composer checkpoint"))
    corpus_path = _require_file(args.corpus, "layout corpus")
    parsed = parse_layout_dataset(corpus_path)
    prompts = args.prompt or [render_description(t) for t in DEFAULT_TRIPLES]
    out = Path(args.out)
    report = run_eval(bundle, parsed.records, prompts,
                      layouts_per_prompt=preset.eval.layouts_per_prompt,
                      points_per_box=preset.eval.points_per_box,
                      temperature=preset.eval.temperature,
                      seed=args.seed, out_dir=out,
                      heatmap_resolution=preset.eval.heatmap_resolution)
    _write_run_manifest(out, "eval", preset, args.seed, args.config,
                        inputs={"composer": str(args.composer),
                                "corpus": str(corpus_path),
                                "prompts": prompts})
    for row in report.rows:
        print(f"{row.prompt}: model={row.model_pct:.1f}% "
              f"heuristic={row.heuristic_pct:.1f}% random={row.random_pct:.1f}%")
    print(f"report -> {report.csv_path}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    ckpt_dir = args.checkpoint_dir or os.environ.get("SCENESKETCH_CKPT_DIR")
    if not ckpt_dir:
        raise UsageError("pass --checkpoint-dir or set SCENESKETCH_CKPT_DIR")
    bind = args.bind or os.environ.get("SCENESKETCH_BIND", "127.0.0.1:8008")
    host, _, port = bind.rpartition(":")
    if not host or not port.isdigit():
        raise UsageError(f"bind address must be host:port, got {bind!r}")
    snapshot = args.snapshot or os.environ.get("SCENESKETCH_SNAPSHOT")
    app = create_app(ckpt_dir, snapshot_path=snapshot, seed=args.seed)
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenesketch",
        description="Text-to-scene sketch pipeline: corpus generation, "
                    "training, sampling, evaluation, rendering, serving.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", help="write synthetic layout and "
                                          "stroke corpora")
    _add_common(p, "runs/corpus")
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("train-composer", help="train the layout generator")
    _add_common(p, "runs/composer")
    p.add_argument("--corpus", required=True, help="layouts JSONL path")
    p.set_defaults(func=cmd_train_composer)

    p = sub.add_parser("train-sketcher", help="train one class's stroke "
                                              "generator")
    _add_common(p, "runs/sketcher")
    p.add_argument("--corpus", required=True, help="strokes JSONL path")
    p.add_argument("--label", required=True, help="object class to train")
    p.add_argument("--fallback", default=None,
                   help="registry fallback class for unmodeled labels")
    p.set_defaults(func=cmd_train_sketcher)

    p = sub.add_parser("sample", help="sample a layout and render its scene")
    _add_common(p, "runs/sample")
    p.add_argument("--composer", required=True, help="composer checkpoint")
    p.add_argument("--registry", required=True, help="registry manifest")
    p.add_argument("--desc", required=True, help="scene description text")
    p.add_argument("--temperature", type=float, default=None,
                   help="sampling temperature (default: preset eval value)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("render", help="render an existing layout document")
    _add_common(p, "runs/render")
    p.add_argument("--layout", required=True, help="layout JSON path")
    p.add_argument("--registry", required=True, help="registry manifest")
    p.add_argument("--temperature", type=float, default=None)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("eval", help="overlap evaluation vs. baselines")
    _add_common(p, "runs/eval")
    p.add_argument("--composer", required=True, help="composer checkpoint")
    p.add_argument("--corpus", required=True,
                   help="ground-truth layouts JSONL")
    p.add_argument("--prompt", action="append", default=[],
                   help="evaluation prompt (repeatable; default: the four "
                        "synthetic-corpus prompts)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the interactive HTTP service")
    _add_common(p, "runs/serve")
    p.add_argument("--checkpoint-dir", default=None,
                   help="directory with composer.ckpt and registry.json "
                        "(or SCENESKETCH_CKPT_DIR)")
    p.add_argument("--bind", default=None,
                   help="host:port (or SCENESKETCH_BIND; default "
                        "127.0.0.1:8008)")
    p.add_argument("--snapshot", default=None,
                   help="session snapshot JSON path (or SCENESKETCH_SNAPSHOT)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except _RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
