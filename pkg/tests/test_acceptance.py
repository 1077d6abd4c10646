"""Acceptance suite: the package's release criteria, one test per criterion.

Run with ``pytest -v tests/test_acceptance.py`` to get one pass/fail line
per criterion.  The two training fixtures are module-scoped and budgeted:
a desk composer fitted on a 2000-layout synthetic corpus and a desk
sketcher fitted on the synthetic tree family.  Criteria and tolerances:

1. gradient suite        -- every loss gradient matches central finite
                            differences within relative error 1e-4 on tiny
                            configs (d_model=8, M=2, hidden=16), < 1 min.
2. mixture normalization -- an M=5 bivariate Gaussian mixture integrates
                            to 1.0 +/- 0.02 over a +/-6 sigma grid.
3. overlap-metric oracle -- Monte-Carlo overlap (1000 points, fixed seed)
                            within 3-sigma binomial error of exact values
                            on 10 hand-constructed box pairs.
4. overlap ordering      -- desk composer trained <= 10 min; with 100
                            layouts/prompt and 1000 points/box,
                            model > heuristic > random on every prompt and
                            model - random >= 20 points.
5. relational correctness-- >= 80% of 100 sampled layouts per prompt
                            satisfy the prompt's center-ordering predicate.
6. ratio conditioning    -- sketcher trained <= 5 min; over requested
                            r in {0.5, 1.0, 1.5, 2.0} x 50 samples,
                            corr(requested, mean achieved) >= 0.8 and
                            mean(r=2.0) > mean(r=1.0).
7. autocompletion        -- 100 seeds: the user box is returned verbatim
                            and the completion satisfies an "under" prompt
                            relation >= 80% of the time.
8. determinism           -- every train/sample/eval command, rerun with
                            identical seed and config, writes byte-identical
                            artifacts (checkpoints, CSVs, SVGs).
9. end to end            -- the sample command emits a well-formed SVG with
                            one placed sketch per layout box, each fitting
                            its box within 1e-6.
"""

from __future__ import annotations

import json
import time
import xml.etree.ElementTree as ET
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pytest

from overlap_cases import ANALYTIC_OVERLAP_CASES, binomial_3sigma_pct
from scenesketch.cli import main
from scenesketch.composer import (ComposerConfig, composer_forward,
                                  composer_losses, init_composer_params)
from scenesketch.composer.sample import (autocomplete_layout,
                                         bundle_from_result, sample_layout)
from scenesketch.composer.train import train_composer
from scenesketch.data.layout import Box, PlacedObject
from scenesketch.data.relations import extract_relation, relation_satisfied
from scenesketch.data.synthetic import (DEFAULT_TRIPLES,
                                        generate_stroke_family,
                                        generate_synthetic_layout_corpus,
                                        render_description)
from scenesketch.engine import grad_check
from scenesketch.evaluation import mc_overlap, run_eval
from scenesketch.kernels import mixture_density_grid
from scenesketch.rng import child_seed, derived_seed, make_rng
from scenesketch.sketcher.model import (SketcherConfig, init_sketcher_params,
                                        sketcher_forward)
from scenesketch.sketcher.registry import write_registry_manifest
from scenesketch.sketcher.sample import (sample_sketch,
                                         sketcher_bundle_from_result)
from scenesketch.sketcher.train import (build_stroke_arrays, sketch_losses,
                                        train_sketcher)


# ---------------------------------------------------------------------------
# Budgeted training fixtures
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def desk_corpus():
    return generate_synthetic_layout_corpus(2000, seed=derived_seed(0, "corpus"))


@pytest.fixture(scope="module")
def composer_fit(desk_corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance_composer")
    start = time.monotonic()
    result = train_composer(desk_corpus, seed=0, out_dir=out)
    elapsed = time.monotonic() - start
    return SimpleNamespace(bundle=bundle_from_result(result), out=out,
                           elapsed=elapsed)


@pytest.fixture(scope="module")
def sketcher_fit(tmp_path_factory):
    records = generate_stroke_family(
        "tree", 400, seed=derived_seed(0, "stroke-corpus"))
    out = tmp_path_factory.mktemp("acceptance_sketcher")
    start = time.monotonic()
    result = train_sketcher(records, seed=0, out_dir=out)
    elapsed = time.monotonic() - start
    write_registry_manifest(out / "registry.json",
                            {"tree": result.checkpoint_path},
                            fallback="tree")
    return SimpleNamespace(bundle=sketcher_bundle_from_result(result),
                           out=out, elapsed=elapsed)


# ---------------------------------------------------------------------------
# 1. Gradient suite
# ---------------------------------------------------------------------------

class TestGradientSuite:
    def test_all_loss_gradients_match_finite_differences(self):
        start = time.monotonic()

        config = ComposerConfig(text_vocab_size=12, num_classes=4, d_model=8,
                                n_layers=1, n_heads=2, d_ff=16, max_seq_len=6,
                                max_text_len=8, n_mixtures=2,
                                class_lstm_size=8, class_lstm_layers=2)
        params = init_composer_params(config, make_rng(0, "composer-init"))
        rng = np.random.default_rng(5)
        batch, t, tt = 2, 3, 4
        text_ids = rng.integers(2, config.text_vocab_size, size=(batch, tt))
        text_mask = np.ones((batch, tt))
        coords = rng.uniform(0.1, 0.9, size=(batch, t, 4))
        labels = rng.integers(0, config.num_classes, size=(batch, t))
        flags = np.zeros((batch, t), dtype=np.int64)
        flags[:, 0] = 1
        target_xy = rng.uniform(0.1, 0.9, size=(batch, t, 2))
        t_coords = rng.uniform(0.2, 0.8, size=coords.shape)
        t_labels = rng.integers(0, config.num_classes, size=labels.shape)
        t_flags = np.zeros_like(flags)
        t_flags[:, -1] = 2
        step_mask = np.ones(labels.shape, dtype=np.float64)
        box_mask = (t_flags == 0).astype(np.float64)

        def composer_loss_fn(key):
            def f():
                out = composer_forward(params, config, text_ids, text_mask,
                                       coords, labels, flags, target_xy)
                return composer_losses(out, config, t_coords, t_labels,
                                       t_flags, step_mask, box_mask)[key]
            return f

        # step=1e-4 keeps the central-difference probe above the
        # cancellation noise floor of these O(10) losses.
        for key in ("L_xy", "L_wh", "L_p", "L_class", "L_SC"):
            report = grad_check(composer_loss_fn(key), params,
                                tolerance=1e-4, step=1e-4,
                                max_coords_per_param=2)
            assert report.passed, (key, report.failures[:3])

        sk_config = SketcherConfig(hidden_size=16, n_mixtures=2, max_steps=8)
        sk_params = init_sketcher_params(sk_config,
                                         make_rng(0, "sketcher-init"))
        arrays = build_stroke_arrays(
            generate_stroke_family("tree", 2, seed=1))
        idx = np.array([0, 1])

        def sketch_loss_fn():
            mdn, pen_logits = sketcher_forward(
                sk_params, sk_config, arrays.inputs[idx], arrays.ratios[idx])
            return sketch_losses(mdn, pen_logits, arrays, idx)["L_R"]

        report = grad_check(sketch_loss_fn, sk_params, tolerance=1e-4,
                            step=1e-4, max_coords_per_param=2)
        assert report.passed, report.failures[:3]

        assert time.monotonic() - start < 60.0


# ---------------------------------------------------------------------------
# 2. Mixture normalization
# ---------------------------------------------------------------------------

class TestMixtureNormalization:
    def test_five_component_density_integrates_to_one(self):
        rng = np.random.default_rng(11)
        m = 5
        weights = rng.dirichlet(np.ones(m))
        mean_x = rng.uniform(-0.5, 0.5, m)
        mean_y = rng.uniform(-0.5, 0.5, m)
        std_x = rng.uniform(0.05, 0.30, m)
        std_y = rng.uniform(0.05, 0.30, m)
        corr = rng.uniform(-0.6, 0.6, m)

        xs = np.linspace(float(np.min(mean_x - 6 * std_x)),
                         float(np.max(mean_x + 6 * std_x)), 801)
        ys = np.linspace(float(np.min(mean_y - 6 * std_y)),
                         float(np.max(mean_y + 6 * std_y)), 801)
        grid = mixture_density_grid(xs, ys, weights, mean_x, mean_y,
                                    std_x, std_y, corr)
        integral = float(np.trapezoid(np.trapezoid(grid, xs, axis=1), ys))
        assert integral == pytest.approx(1.0, abs=0.02)


# ---------------------------------------------------------------------------
# 3. Overlap-metric oracle
# ---------------------------------------------------------------------------

class TestOverlapOracle:
    def test_ten_analytic_cases_within_three_sigma(self):
        failures = []
        for name, generated, truth, exact in ANALYTIC_OVERLAP_CASES:
            estimate = mc_overlap(generated, truth,
                                  points_per_box=1000, seed=123)
            tolerance = binomial_3sigma_pct(exact, 1000) + 1e-9
            if abs(estimate - 100.0 * exact) > tolerance:
                failures.append((name, estimate, 100.0 * exact, tolerance))
        assert len(ANALYTIC_OVERLAP_CASES) == 10
        assert not failures, failures


# ---------------------------------------------------------------------------
# 4. Overlap ordering against baselines
# ---------------------------------------------------------------------------

class TestOverlapOrdering:
    def test_model_beats_heuristic_beats_random_on_every_prompt(
            self, composer_fit, desk_corpus):
        assert composer_fit.elapsed < 600.0, \
            f"composer training took {composer_fit.elapsed:.0f}s"
        prompts = [render_description(t) for t in DEFAULT_TRIPLES]
        report = run_eval(composer_fit.bundle, desk_corpus, prompts,
                          layouts_per_prompt=100, points_per_box=1000,
                          temperature=0.4, seed=0)
        assert len(report.rows) == 4
        for row in report.rows:
            assert row.model_pct > row.heuristic_pct > row.random_pct, \
                (row.prompt, row.model_pct, row.heuristic_pct, row.random_pct)
            assert row.model_pct - row.random_pct >= 20.0, \
                (row.prompt, row.model_pct, row.random_pct)


# ---------------------------------------------------------------------------
# 5. Relational correctness of sampled layouts
# ---------------------------------------------------------------------------

class TestRelationalCorrectness:
    def test_center_ordering_holds_on_at_least_80_percent(self, composer_fit):
        base = derived_seed(0, "sampling")
        for prompt_index, triple in enumerate(DEFAULT_TRIPLES):
            prompt = render_description(triple)
            relation = extract_relation(prompt)
            prompt_seed = child_seed(base, prompt_index)
            hits = 0
            for i in range(100):
                layout = sample_layout(composer_fit.bundle, prompt,
                                       seed=child_seed(prompt_seed, i),
                                       temperature=0.4)
                hits += relation_satisfied(relation, layout)
            assert hits >= 80, (prompt, hits)


# ---------------------------------------------------------------------------
# 6. Aspect-ratio conditioning
# ---------------------------------------------------------------------------

class TestAspectRatioConditioning:
    def test_achieved_ratio_tracks_requested(self, sketcher_fit):
        assert sketcher_fit.elapsed < 300.0, \
            f"sketcher training took {sketcher_fit.elapsed:.0f}s"
        requested = [0.5, 1.0, 1.5, 2.0]
        base = derived_seed(0, "sampling")
        means = []
        for r_index, ratio in enumerate(requested):
            ratio_seed = child_seed(base, r_index)
            achieved = [
                sample_sketch(sketcher_fit.bundle, ratio, temperature=0.4,
                              seed=child_seed(ratio_seed, i)).aspect_ratio
                for i in range(50)
            ]
            means.append(float(np.mean(achieved)))
        correlation = float(np.corrcoef(requested, means)[0, 1])
        assert correlation >= 0.8, (requested, means, correlation)
        assert means[3] > means[1], means


# ---------------------------------------------------------------------------
# 7. Autocompletion contract
# ---------------------------------------------------------------------------

class TestAutocompletion:
    def test_user_box_verbatim_and_relation_consistent(self, composer_fit):
        prompt = "a horse under a tree"
        relation = extract_relation(prompt)
        user_box = PlacedObject("horse", Box(x=0.5, y=0.74, w=0.2, h=0.12))
        base = derived_seed(0, "sampling")
        hits = 0
        for i in range(100):
            layout = autocomplete_layout(composer_fit.bundle, prompt,
                                         [user_box],
                                         seed=child_seed(base, i),
                                         temperature=0.4)
            first = layout.objects[0]
            assert first.label == "horse"
            assert (first.box.x, first.box.y, first.box.w, first.box.h) == \
                (0.5, 0.74, 0.2, 0.12)
            hits += relation_satisfied(relation, layout)
        assert hits >= 80, hits


# ---------------------------------------------------------------------------
# 8. Determinism of command reruns
# ---------------------------------------------------------------------------

TINY = [
    "--config", "composer.train_steps=60",
    "--config", "composer.d_model=16",
    "--config", "composer.n_heads=2",
    "--config", "composer.d_ff=32",
    "--config", "composer.class_lstm_size=8",
    "--config", "sketcher.train_steps=25",
    "--config", "sketcher.hidden_size=24",
    "--config", "corpus.n_layouts=60",
    "--config", "corpus.strokes_per_class=12",
    "--config", "eval.layouts_per_prompt=5",
    "--config", "eval.points_per_box=100",
    "--config", "eval.heatmap_resolution=16",
]


class TestDeterminism:
    def test_identical_reruns_write_byte_identical_artifacts(self, tmp_path):
        def run_all(root: Path) -> None:
            corpus, ckpt = root / "corpus", root / "ckpt"
            assert main(["gen-corpus", "--out", str(corpus), *TINY]) == 0
            assert main(["train-composer", "--corpus",
                         str(corpus / "layouts.jsonl"), "--out", str(ckpt),
                         "--seed", "1", *TINY]) == 0
            assert main(["train-sketcher", "--corpus",
                         str(corpus / "strokes_tree.jsonl"),
                         "--label", "tree", "--fallback", "tree",
                         "--out", str(ckpt), "--seed", "2", *TINY]) == 0
            assert main(["sample", "--composer", str(ckpt / "composer.ckpt"),
                         "--registry", str(ckpt / "registry.json"),
                         "--desc", "a horse under a tree", "--seed", "5",
                         "--out", str(root / "sample"), *TINY]) == 0
            assert main(["eval", "--composer", str(ckpt / "composer.ckpt"),
                         "--corpus", str(corpus / "layouts.jsonl"),
                         "--prompt", "a horse under a tree",
                         "--out", str(root / "eval"), *TINY]) == 0

        run_all(tmp_path / "a")
        run_all(tmp_path / "b")

        files_a = sorted(p.relative_to(tmp_path / "a")
                         for p in (tmp_path / "a").rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(tmp_path / "b")
                         for p in (tmp_path / "b").rglob("*") if p.is_file())
        assert files_a == files_b

        # Run manifests record input paths, which differ between the two
        # roots by construction; every other artifact must match exactly.
        mismatched = [
            str(rel) for rel in files_a
            if not rel.name.startswith("run_")
            and (tmp_path / "a" / rel).read_bytes()
            != (tmp_path / "b" / rel).read_bytes()
        ]
        assert not mismatched, mismatched


# ---------------------------------------------------------------------------
# 9. End to end: sampled scene SVG
# ---------------------------------------------------------------------------

class TestEndToEnd:
    def test_sample_command_emits_fitting_svg(self, composer_fit,
                                              sketcher_fit, tmp_path):
        assert main(["sample", "--composer",
                     str(composer_fit.out / "composer.ckpt"),
                     "--registry", str(sketcher_fit.out / "registry.json"),
                     "--desc", "a horse under a tree", "--seed", "11",
                     "--out", str(tmp_path)]) == 0

        svg_text = (tmp_path / "scene.svg").read_text()
        root = ET.fromstring(svg_text)
        assert root.tag.endswith("svg")

        layout = json.loads((tmp_path / "layout.json").read_text())
        scene = json.loads((tmp_path / "scene.json").read_text())
        assert len(layout["objects"]) >= 1
        assert len(scene["objects"]) == len(layout["objects"])

        groups = [el for el in root.iter() if el.tag.endswith("}g")]
        assert len(groups) == len(layout["objects"])

        for obj in scene["objects"]:
            box = obj["box"]
            points = np.concatenate(
                [np.asarray(line, dtype=np.float64)
                 for line in obj["polylines"]], axis=0)
            left, right = box["x"] - box["w"] / 2, box["x"] + box["w"] / 2
            top, bottom = box["y"] - box["h"] / 2, box["y"] + box["h"] / 2
            assert abs(points[:, 0].min() - left) <= 1e-6
            assert abs(points[:, 0].max() - right) <= 1e-6
            assert abs(points[:, 1].min() - top) <= 1e-6
            assert abs(points[:, 1].max() - bottom) <= 1e-6
