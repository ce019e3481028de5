"""Pipeline configuration: per-category thresholds plus stage toggles."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Any, Mapping

STAGES = ("preprocess", "stwo", "stw", "mtm", "global_refine", "local_refine")
METRICS = ("iou_bev", "iou_3d", "giou_3d")
MOTION_MODELS = ("CV", "CTRA")

_METRIC_ALIASES = {m.lower(): m for m in METRICS} | {"iou": "iou_bev", "giou": "giou_3d"}


class ConfigError(ValueError):
    """Raised for a bad config value; ``field`` names the offending entry."""

    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field = field_path


def normalize_metric(name: str) -> str:
    key = str(name).lower()
    if key not in _METRIC_ALIASES:
        raise ValueError(f"unknown metric {name!r}; expected one of {METRICS}")
    return _METRIC_ALIASES[key]


@dataclass(frozen=True)
class CategoryConfig:
    theta_age: int = 3
    theta_score: float = 0.2
    theta_blo: float = 0.9
    theta_multi: float = 0.75
    # connect iff gIoU > 0.3
    theta_stw: float = 0.7
    motion_model: str = "CTRA"
    metric: str = "iou_bev"
    topk: int = 10
    window_halfspan: float = 2.0
    rigid: bool = True
    prediction_cap: float = 1.0

    def check(self, prefix: str) -> None:
        if not (isinstance(self.theta_age, int) and self.theta_age >= 0):
            raise ConfigError(f"{prefix}.theta_age", "must be a non-negative integer")
        for name in ("theta_score", "theta_blo", "theta_multi", "theta_stw"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{prefix}.{name}", f"must be in [0, 1], got {v}")
        if self.motion_model not in MOTION_MODELS:
            raise ConfigError(f"{prefix}.motion_model", f"must be one of {MOTION_MODELS}")
        if self.metric not in METRICS:
            raise ConfigError(f"{prefix}.metric", f"must be one of {METRICS}")
        if not (isinstance(self.topk, int) and self.topk >= 1):
            raise ConfigError(f"{prefix}.topk", "must be a positive integer")
        if not 0.0 < self.window_halfspan <= 4.0:
            raise ConfigError(f"{prefix}.window_halfspan", "must be in (0, 4] seconds")
        if not self.prediction_cap >= 0.0:
            raise ConfigError(f"{prefix}.prediction_cap", "must be non-negative")


def _default_categories() -> dict[str, CategoryConfig]:
    base = CategoryConfig()
    return {
        "car": base,
        "truck": base,
        "bus": base,
        "trailer": base,
        "bicycle": base,
        "motorcycle": base,
        "pedestrian": replace(base, rigid=False),
    }


@dataclass(frozen=True)
class RefineWeights:
    position: float = 1.0
    velocity: float = 0.5
    # multiplied by the box half-diagonal, turning radians into metres
    heading: float = 1.0


@dataclass(frozen=True)
class PipelineConfig:
    categories: Mapping[str, CategoryConfig] = field(default_factory=_default_categories)
    default: CategoryConfig = field(default_factory=CategoryConfig)
    order: tuple[str, ...] = STAGES
    enabled: frozenset[str] = frozenset(STAGES)
    stwo_max_sweeps: int = 4
    max_cardinality: bool = False
    stw_use_interpolated: bool = True
    stw_entangled_runs: bool = False
    # "touched": relink split pieces against the whole output; "cluster": within the cluster only
    stw_reorganize_scope: str = "touched"
    interpolated_weight: float = 0.5
    refine_weights: RefineWeights = field(default_factory=RefineWeights)
    lm_max_iter: int = 100

    def for_category(self, cls: str) -> CategoryConfig:
        return self.categories.get(cls, self.default)

    def stage_sequence(self) -> tuple[str, ...]:
        return tuple(s for s in self.order if s in self.enabled)

    def with_stages(self, *names: str, enabled: bool = True) -> "PipelineConfig":
        on = set(self.enabled)
        on = on | set(names) if enabled else on - set(names)
        return replace(self, enabled=frozenset(on))

    def check(self) -> "PipelineConfig":
        if sorted(self.order) != sorted(STAGES):
            raise ConfigError("order", f"must be a permutation of {STAGES}")
        unknown = set(self.enabled) - set(STAGES)
        if unknown:
            raise ConfigError("stages", f"unknown stage(s) {sorted(unknown)}")
        if not (isinstance(self.stwo_max_sweeps, int) and self.stwo_max_sweeps >= 1):
            raise ConfigError("stwo_max_sweeps", "must be a positive integer")
        if self.stw_reorganize_scope not in ("touched", "cluster"):
            raise ConfigError("stw_reorganize_scope", "must be 'touched' or 'cluster'")
        if not 0.0 <= self.interpolated_weight <= 1.0:
            raise ConfigError("interpolated_weight", "must be in [0, 1]")
        self.default.check("default")
        for name, cat in self.categories.items():
            cat.check(f"categories.{name}")
        return self


def _category_from(raw: Mapping[str, Any], base: CategoryConfig, prefix: str) -> CategoryConfig:
    known = {f.name for f in fields(CategoryConfig)}
    for key in raw:
        if key not in known:
            raise ConfigError(f"{prefix}.{key}", "unknown field")
    values = dict(raw)
    if "metric" in values:
        try:
            values["metric"] = normalize_metric(values["metric"])
        except ValueError as exc:
            raise ConfigError(f"{prefix}.metric", str(exc)) from None
    if "motion_model" in values:
        values["motion_model"] = str(values["motion_model"]).upper()
    for name in ("theta_score", "theta_blo", "theta_multi", "theta_stw", "window_halfspan",
                 "prediction_cap"):
        if name in values:
            try:
                values[name] = float(values[name])
            except (TypeError, ValueError):
                raise ConfigError(f"{prefix}.{name}", "must be a number") from None
    return replace(base, **values)


def config_from_dict(raw: Mapping[str, Any] | None) -> PipelineConfig:
    """Build and range-check a config from a parsed JSON/YAML mapping.

    Recognised keys: ``default`` and ``categories`` (per-category overrides,
    layered on ``default``), ``order``, ``stages`` (name -> bool), and the
    scalar fields of :class:`PipelineConfig`.
    """
    raw = dict(raw or {})
    cfg = PipelineConfig()
    default = _category_from(raw.pop("default", {}) or {}, CategoryConfig(), "default")
    cats = {name: replace(default, rigid=cat.rigid) for name, cat in cfg.categories.items()}
    for name, over in (raw.pop("categories", {}) or {}).items():
        cats[name] = _category_from(over or {}, cats.get(name, default), f"categories.{name}")
    changes: dict[str, Any] = {"default": default, "categories": cats}
    if "order" in raw:
        changes["order"] = tuple(raw.pop("order"))
    if "stages" in raw:
        stages = raw.pop("stages") or {}
        enabled = set(STAGES)
        for name, on in stages.items():
            if name not in STAGES:
                raise ConfigError(f"stages.{name}", "unknown stage")
            (enabled.add if on else enabled.discard)(name)
        changes["enabled"] = frozenset(enabled)
    if "refine_weights" in raw:
        rw = raw.pop("refine_weights") or {}
        try:
            changes["refine_weights"] = RefineWeights(**rw)
        except TypeError as exc:
            raise ConfigError("refine_weights", str(exc)) from None
    known = {f.name for f in fields(PipelineConfig)}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(key, "unknown field")
        changes[key] = value
    return replace(cfg, **changes).check()
