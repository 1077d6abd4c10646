"""Named run presets and key=value override resolution.

Two presets ship:

* ``desk`` — trains end to end on a laptop CPU in minutes; the default for
  every CLI command and for the acceptance suite.
* ``paper`` — full-scale hyper-parameters (512-wide 6-layer composer,
  2048-unit sketcher, small learning rates, long schedules).  Provided for
  completeness; training it is far outside desk budgets.

Overrides are ``section.key=value`` strings (``composer.d_model=32``,
``sketcher.train_steps=200``, ``corpus.n_layouts=500``); a bare ``key=value``
applies to whichever single section defines the key, and errors if the key
is ambiguous or unknown.
"""

from __future__ import annotations

from dataclasses import MISSING, dataclass, field, fields, replace

from .composer.model import ComposerConfig
from .sketcher.model import SketcherConfig

__all__ = ["Preset", "PRESETS", "resolve_preset", "apply_overrides",
           "UsageError"]


class UsageError(Exception):
    """Bad operator input: unknown preset, malformed or unknown override."""


@dataclass(frozen=True)
class CorpusParams:
    n_layouts: int = 2000
    strokes_per_class: int = 400
    seed: int = 0

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class EvalParams:
    layouts_per_prompt: int = 100
    points_per_box: int = 1000
    temperature: float = 0.4
    heatmap_resolution: int = 64

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class Preset:
    """A named bundle of composer/sketcher/corpus/eval parameters."""

    name: str
    composer: dict = field(default_factory=dict)
    sketcher: dict = field(default_factory=dict)
    corpus: CorpusParams = CorpusParams()
    eval: EvalParams = EvalParams()

    def composer_config(self, text_vocab_size: int, num_classes: int,
                        **extra) -> ComposerConfig:
        kwargs = dict(self.composer)
        kwargs.update(extra)
        return ComposerConfig(text_vocab_size=text_vocab_size,
                              num_classes=num_classes, **kwargs)

    def sketcher_config(self, **extra) -> SketcherConfig:
        kwargs = dict(self.sketcher)
        kwargs.update(extra)
        return SketcherConfig(**kwargs)


# Desk scale: ComposerConfig/SketcherConfig defaults already are the desk
# values, so the desk preset carries no overrides.
_DESK = Preset(name="desk")

# Full scale.  Head count and feed-forward width follow the usual
# d_ff = 4*d_model, d_model/64-heads conventions for this width; schedules
# are sized for a large scene corpus, not the synthetic desk corpus.
_PAPER = Preset(
    name="paper",
    composer=dict(
        d_model=512, n_layers=6, n_heads=8, d_ff=2048,
        max_seq_len=18, max_text_len=32,
        class_lstm_size=512, class_lstm_layers=2,
        lambda_xy=1.0, lambda_wh=1.0, lambda_p=1e-5, lambda_class=1e-3,
        learning_rate=1e-5, clip_norm=1.0,
        batch_size=64, train_steps=200_000,
    ),
    sketcher=dict(
        hidden_size=2048, n_mixtures=5, max_steps=128,
        learning_rate=1e-4, clip_norm=1.0,
        batch_size=100, train_steps=100_000,
    ),
    corpus=CorpusParams(n_layouts=50_000, strokes_per_class=10_000),
    eval=EvalParams(layouts_per_prompt=100, points_per_box=1000),
)

PRESETS: dict[str, Preset] = {"desk": _DESK, "paper": _PAPER}


def resolve_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise UsageError(f"unknown preset {name!r}; available: "
                         f"{', '.join(sorted(PRESETS))}") from None


def _field_types(cls, skip: frozenset[str] = frozenset()) -> dict[str, type]:
    return {f.name: type(f.default) for f in fields(cls)
            if f.name not in skip and f.default is not MISSING}


_SECTION_TYPES: dict[str, dict[str, type]] = {
    "composer": _field_types(ComposerConfig,
                             skip=frozenset({"text_vocab_size", "num_classes"})),
    "sketcher": _field_types(SketcherConfig),
    "corpus": _field_types(CorpusParams),
    "eval": _field_types(EvalParams),
}
_SECTION_FIELDS = {section: set(types)
                   for section, types in _SECTION_TYPES.items()}


def _coerce_value(raw: str, expected: type, item: str):
    """Parse ``raw`` as the field's declared type, or raise UsageError."""
    if expected is bool:
        lowered = raw.lower()
        if lowered in ("true", "1"):
            return True
        if lowered in ("false", "0"):
            return False
        raise UsageError(f"override {item!r} needs a boolean value")
    try:
        if expected is int:
            return int(raw)
        if expected is float:
            return float(raw)
    except ValueError:
        raise UsageError(f"override {item!r} needs a value of type "
                         f"{expected.__name__}, got {raw!r}") from None
    return raw


def apply_overrides(preset: Preset, overrides: list[str]) -> Preset:
    """Apply ``[section.]key=value`` strings on top of a preset."""
    composer = dict(preset.composer)
    sketcher = dict(preset.sketcher)
    corpus = preset.corpus
    eval_params = preset.eval

    for item in overrides:
        if "=" not in item:
            raise UsageError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        key = key.strip()
        raw = raw.strip()

        if "." in key:
            section, name = key.split(".", 1)
            if section not in _SECTION_FIELDS:
                raise UsageError(
                    f"unknown override section {section!r} in {item!r}; "
                    f"sections: {', '.join(sorted(_SECTION_FIELDS))}")
            if name not in _SECTION_FIELDS[section]:
                raise UsageError(f"unknown key {name!r} for section {section!r}")
        else:
            owners = [s for s, names in _SECTION_FIELDS.items() if key in names]
            if not owners:
                raise UsageError(f"unknown override key {key!r}")
            if len(owners) > 1:
                raise UsageError(
                    f"override key {key!r} is ambiguous across sections "
                    f"{', '.join(sorted(owners))}; qualify it as section.key")
            section, name = owners[0], key

        value = _coerce_value(raw, _SECTION_TYPES[section][name], item)
        if section == "composer":
            composer[name] = value
        elif section == "sketcher":
            sketcher[name] = value
        elif section == "corpus":
            corpus = replace(corpus, **{name: value})
        else:
            eval_params = replace(eval_params, **{name: value})

    return Preset(name=preset.name, composer=composer, sketcher=sketcher,
                  corpus=corpus, eval=eval_params)
