"""Ground-truth manufacturability engine.

Evaluates machining feasibility rules over parametric designs at
worst-case tolerance-adjusted dimensions and reports the violated
conditions. Rules fall into four categories: process (geometric
infeasibility), structural (remaining material), tooling (catalog
limits), and tolerance (process capability).

All thresholds live in :class:`RuleConfig` so datasets can be
regenerated under alternative shop policies; the resolved configuration
is content-hashed into dataset manifests.

Convention: a rule is satisfied at exact equality with its threshold;
violations require strictly crossing it. Worst-case evaluation always
picks the tolerance extreme least favorable to the rule being checked.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .scenarios import COMBINED, DRILLING, MILLING, DesignRecord, get_schema

CATEGORY_PROCESS = "process"
CATEGORY_STRUCTURAL = "structural"
CATEGORY_TOOLING = "tooling"
CATEGORY_TOLERANCE = "tolerance"


@dataclass(frozen=True)
class RuleConfig:
    """Named rule constants (mm unless noted). Defaults give the shop
    policy used for the shipped datasets."""

    # drill catalog and drilling rules
    drill_min_dia: float = 1.0
    drill_max_dia: float = 30.0
    drill_step_fine: float = 0.5
    drill_fine_limit: float = 13.0
    drill_step_coarse: float = 1.0
    drill_reach_factor: float = 10.0
    drill_reach_cap: float = 150.0
    drill_depth_ratio: float = 5.0
    drill_bottom_min: float = 1.0
    drill_bottom_dia_factor: float = 0.25
    drill_wall_min: float = 1.0
    drill_wall_dia_factor: float = 0.5
    # end mill catalog and milling rules
    mill_min_dia: float = 1.0
    mill_max_dia: float = 50.0
    mill_depth_ratio: float = 4.0
    mill_flute_factor: float = 3.0
    mill_flute_cap: float = 60.0
    mill_wall_min: float = 1.5
    mill_wall_depth_factor: float = 0.2
    mill_bottom_min: float = 1.5
    mill_bottom_side_factor: float = 0.1
    # feature interaction rules
    web_min: float = 1.0
    web_dia_factor: float = 0.5
    web_depth_factor: float = 0.1
    # tolerance process capability
    tol_band_min: float = 0.1


@dataclass(frozen=True)
class Tool:
    diameter: float
    reach: float  # usable depth: drill max depth / end mill flute length


@dataclass
class ToolCatalog:
    """Commercially available drills and end mills, diameters ascending."""

    drills: list[Tool]
    end_mills: list[Tool]

    def __post_init__(self) -> None:
        for tools in (self.drills, self.end_mills):
            dias = [t.diameter for t in tools]
            if any(b <= a for a, b in zip(dias, dias[1:])):
                raise ValueError("catalog diameters must be strictly increasing")
            if any(t.diameter <= 0 or t.reach <= 0 for t in tools):
                raise ValueError("catalog entries must be positive")

    @property
    def drill_dias(self) -> np.ndarray:
        return np.array([t.diameter for t in self.drills])

    @property
    def drill_reaches(self) -> np.ndarray:
        return np.array([t.reach for t in self.drills])

    @property
    def mill_dias(self) -> np.ndarray:
        return np.array([t.diameter for t in self.end_mills])

    @property
    def mill_reaches(self) -> np.ndarray:
        return np.array([t.reach for t in self.end_mills])


def _size_series(lo, fine_limit, step_fine, hi, step_coarse):
    fine = np.arange(lo, fine_limit + 1e-9, step_fine)
    coarse = np.arange(np.ceil(fine_limit) + step_coarse, hi + 1e-9, step_coarse)
    return np.concatenate([fine, coarse])


def build_catalog(cfg: RuleConfig) -> ToolCatalog:
    drill_sizes = _size_series(
        cfg.drill_min_dia, cfg.drill_fine_limit, cfg.drill_step_fine,
        cfg.drill_max_dia, cfg.drill_step_coarse,
    )
    drills = [
        Tool(float(d), float(min(cfg.drill_reach_factor * d, cfg.drill_reach_cap)))
        for d in drill_sizes
    ]
    mill_sizes = _size_series(
        cfg.mill_min_dia, cfg.drill_fine_limit, cfg.drill_step_fine, 30.0, 1.0
    )
    mill_sizes = np.concatenate([mill_sizes, np.array([32.0, 35.0, 40.0, 45.0, 50.0])])
    mill_sizes = mill_sizes[mill_sizes <= cfg.mill_max_dia + 1e-9]
    end_mills = [
        Tool(float(d), float(min(cfg.mill_flute_factor * d, cfg.mill_flute_cap)))
        for d in mill_sizes
    ]
    return ToolCatalog(drills=drills, end_mills=end_mills)


def select_drill(diameter: float, depth: float, catalog: ToolCatalog) -> Tool | None:
    """Smallest catalog drill covering the requested diameter, or None
    when the size class does not exist or cannot reach the depth."""
    if diameter <= 0 or depth <= 0:
        raise ValueError("diameter and depth must be positive")
    dias = catalog.drill_dias
    if diameter < dias[0] or diameter > dias[-1]:
        return None
    i = int(np.searchsorted(dias, diameter, side="left"))
    tool = catalog.drills[i]
    if depth > tool.reach:
        return None
    return tool


def select_end_mill(corner_radius: float, depth: float, catalog: ToolCatalog) -> Tool | None:
    """Largest end mill fitting the corner radius with enough flute for
    the depth; None when nothing satisfies both size and reach."""
    if depth <= 0:
        raise ValueError("depth must be positive")
    if corner_radius <= 0:
        return None
    dias = catalog.mill_dias
    i = int(np.searchsorted(dias, 2.0 * corner_radius, side="right")) - 1
    while i >= 0:
        tool = catalog.end_mills[i]
        if depth <= tool.reach:
            return tool
        i -= 1
    return None


def worst_case(dim_nominal: float, tol_lower: float, tol_upper: float, direction: str) -> float:
    """Tolerance-band extreme of a dimension; inverted bands are a
    tolerance violation reported by the rule engine, never raised here."""
    if direction == "max":
        return dim_nominal + tol_upper
    if direction == "min":
        return dim_nominal + tol_lower
    raise ValueError("direction must be 'max' or 'min'")


# ---------------------------------------------------------------------------
# Condition registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Condition:
    key: str
    rule_id: str
    category: str
    message: str
    features: tuple[str, ...]


@dataclass(frozen=True)
class Violation:
    rule_id: str
    condition: str
    category: str
    message: str
    offending_features: tuple[str, ...]


@dataclass
class RuleReport:
    manufacturable: bool
    violations: list[Violation]

    def categories(self) -> set[str]:
        return {v.category for v in self.violations}

    def rule_ids(self) -> set[str]:
        return {v.rule_id for v in self.violations}

    def as_dict(self) -> dict:
        return {
            "manufacturable": self.manufacturable,
            "violations": [asdict(v) for v in self.violations],
        }


def _tol_conditions(prefix: str, rule_id: str, dims: tuple[str, ...]) -> list[Condition]:
    out = []
    for d in dims:
        out.append(Condition(
            f"{prefix}_INVERTED_{d}", rule_id, CATEGORY_TOLERANCE,
            f"{d} tolerance band inverted (upper below lower)",
            (f"{d}_UT", f"{d}_LT"),
        ))
        out.append(Condition(
            f"{prefix}_NARROW_{d}", rule_id, CATEGORY_TOLERANCE,
            f"{d} tolerance band narrower than the process capability floor",
            (f"{d}_UT", f"{d}_LT"),
        ))
    return out


_DRILL_CONDITIONS: list[Condition] = [
    Condition("D1_DIA_SMALL", "R-D1", CATEGORY_TOOLING,
              "worst-case hole diameter below the smallest catalog drill",
              ("H1", "H1_LT")),
    Condition("D1_DIA_LARGE", "R-D1", CATEGORY_TOOLING,
              "worst-case hole diameter above the largest catalog drill",
              ("H1", "H1_UT")),
    Condition("D2_DEPTH_RATIO", "R-D2", CATEGORY_PROCESS,
              "worst-case hole depth exceeds the depth-to-diameter limit",
              ("H1", "H2", "H2_UT", "H1_LT")),
    Condition("D3_NO_TOOL", "R-D3", CATEGORY_TOOLING,
              "no catalog drill exists for the requested diameter",
              ("H1",)),
    Condition("D3_REACH", "R-D3", CATEGORY_TOOLING,
              "worst-case hole depth exceeds the selected drill's reach",
              ("H2", "H2_UT", "H1")),
    Condition("D4_BOTTOM", "R-D4", CATEGORY_STRUCTURAL,
              "blind-hole bottom thinner than the structural minimum",
              ("B3", "H2", "H2_UT")),
    Condition("D5_WALL_XLO", "R-D5", CATEGORY_STRUCTURAL,
              "wall between hole and the x=0 block face is too thin",
              ("H3", "H1", "H3_LT", "H1_UT")),
    Condition("D5_WALL_XHI", "R-D5", CATEGORY_STRUCTURAL,
              "wall between hole and the x=B1 block face is too thin",
              ("H3", "H1", "B1", "H3_UT", "H1_UT")),
    Condition("D5_WALL_YLO", "R-D5", CATEGORY_STRUCTURAL,
              "wall between hole and the y=0 block face is too thin",
              ("H4", "H1", "H4_LT", "H1_UT")),
    Condition("D5_WALL_YHI", "R-D5", CATEGORY_STRUCTURAL,
              "wall between hole and the y=B2 block face is too thin",
              ("H4", "H1", "B2", "H4_UT", "H1_UT")),
    Condition("D6_BREAK_XLO", "R-D6", CATEGORY_PROCESS,
              "worst-case hole breaks out of the block at x=0",
              ("H3", "H1")),
    Condition("D6_BREAK_XHI", "R-D6", CATEGORY_PROCESS,
              "worst-case hole breaks out of the block at x=B1",
              ("H3", "H1", "B1")),
    Condition("D6_BREAK_YLO", "R-D6", CATEGORY_PROCESS,
              "worst-case hole breaks out of the block at y=0",
              ("H4", "H1")),
    Condition("D6_BREAK_YHI", "R-D6", CATEGORY_PROCESS,
              "worst-case hole breaks out of the block at y=B2",
              ("H4", "H1", "B2")),
    Condition("D6_DEPTH", "R-D6", CATEGORY_PROCESS,
              "hole depth exceeds the block height",
              ("H2", "B3")),
] + _tol_conditions("D7", "R-D7", ("H1", "H2", "H3", "H4"))


_MILL_CONDITIONS: list[Condition] = [
    Condition("M1_SHARP", "R-M1", CATEGORY_PROCESS,
              "sharp internal pocket corner cannot be cut by a rotating end mill",
              ("P3",)),
    Condition("M1_RADIUS_SIDE", "R-M1", CATEGORY_PROCESS,
              "corner fillets exceed the smaller pocket side",
              ("P3", "P1", "P2")),
    Condition("M2_DEPTH_RATIO", "R-M2", CATEGORY_TOOLING,
              "worst-case pocket depth exceeds the depth-to-tool-diameter limit",
              ("P4", "P4_UT", "P3")),
    Condition("M3_NO_TOOL", "R-M3", CATEGORY_TOOLING,
              "no catalog end mill fits the pocket corner radius",
              ("P3",)),
    Condition("M3_REACH", "R-M3", CATEGORY_TOOLING,
              "worst-case pocket depth exceeds the end mill flute length",
              ("P4", "P4_UT", "P3")),
    Condition("M4_BREAK_XLO", "R-M4", CATEGORY_PROCESS,
              "worst-case pocket breaks out of the block at x=0",
              ("P5", "P5_LT")),
    Condition("M4_BREAK_XHI", "R-M4", CATEGORY_PROCESS,
              "worst-case pocket breaks out of the block at x=B1",
              ("P5", "P1", "B1", "P5_UT", "P1_UT")),
    Condition("M4_BREAK_YLO", "R-M4", CATEGORY_PROCESS,
              "worst-case pocket breaks out of the block at y=0",
              ("P6", "P6_LT")),
    Condition("M4_BREAK_YHI", "R-M4", CATEGORY_PROCESS,
              "worst-case pocket breaks out of the block at y=B2",
              ("P6", "P2", "B2", "P6_UT", "P2_UT")),
    Condition("M4_DEPTH", "R-M4", CATEGORY_PROCESS,
              "pocket depth exceeds the block height",
              ("P4", "B3")),
    Condition("M5_WALL_XLO", "R-M5", CATEGORY_STRUCTURAL,
              "wall between pocket and the x=0 block face is too thin",
              ("P5", "P5_LT", "P4")),
    Condition("M5_WALL_XHI", "R-M5", CATEGORY_STRUCTURAL,
              "wall between pocket and the x=B1 block face is too thin",
              ("P5", "P1", "B1", "P5_UT", "P1_UT", "P4")),
    Condition("M5_WALL_YLO", "R-M5", CATEGORY_STRUCTURAL,
              "wall between pocket and the y=0 block face is too thin",
              ("P6", "P6_LT", "P4")),
    Condition("M5_WALL_YHI", "R-M5", CATEGORY_STRUCTURAL,
              "wall between pocket and the y=B2 block face is too thin",
              ("P6", "P2", "B2", "P6_UT", "P2_UT", "P4")),
    Condition("M6_BOTTOM", "R-M6", CATEGORY_STRUCTURAL,
              "pocket floor thinner than the structural minimum",
              ("B3", "P4", "P4_UT")),
] + _tol_conditions("M7", "R-M7", ("P1", "P2", "P4", "P5", "P6"))


_COMBINED_EXTRA: list[Condition] = [
    Condition("C1_OVERLAP", "R-C1", CATEGORY_PROCESS,
              "worst-case hole and pocket footprints intersect",
              ("H3", "H4", "H1", "P5", "P6", "P1", "P2")),
    Condition("C2_WEB", "R-C2", CATEGORY_STRUCTURAL,
              "web between hole wall and pocket wall is too thin",
              ("H3", "H4", "H1", "P5", "P6", "P1", "P2")),
    Condition("C3_DEEP_WEB", "R-C3", CATEGORY_STRUCTURAL,
              "web too thin for the combined worst-case cutting depth",
              ("H3", "H4", "H2", "P4", "P5", "P6")),
]


def conditions_for(scenario_id: str) -> list[Condition]:
    if scenario_id == DRILLING:
        return list(_DRILL_CONDITIONS)
    if scenario_id == MILLING:
        return list(_MILL_CONDITIONS)
    if scenario_id == COMBINED:
        return list(_DRILL_CONDITIONS) + list(_MILL_CONDITIONS) + list(_COMBINED_EXTRA)
    raise KeyError(f"unknown scenario {scenario_id!r}")


# ---------------------------------------------------------------------------
# Vectorized evaluation
# ---------------------------------------------------------------------------

class _Cols:
    """Named read-only column access over a feature matrix."""

    def __init__(self, X: np.ndarray, names: list[str], nominal: bool = False):
        self.X = X
        self.names = {n: i for i, n in enumerate(names)}
        self.nominal = nominal

    def __getitem__(self, name: str) -> np.ndarray:
        if self.nominal and (name.endswith("_UT") or name.endswith("_LT")):
            return np.zeros(len(self.X))
        return self.X[:, self.names[name]]

    def wc_max(self, dim: str) -> np.ndarray:
        ut = f"{dim}_UT"
        return self[dim] + (self[ut] if ut in self.names else 0.0)

    def wc_min(self, dim: str) -> np.ndarray:
        lt = f"{dim}_LT"
        return self[dim] + (self[lt] if lt in self.names else 0.0)


def _smallest_drill_at_least(dias: np.ndarray, reaches: np.ndarray, requested: np.ndarray):
    """Vectorized size-class lookup; returns (exists, reach)."""
    idx = np.searchsorted(dias, requested, side="left")
    exists = (requested >= dias[0]) & (idx < len(dias))
    safe = np.minimum(idx, len(dias) - 1)
    return exists, reaches[safe]


def _largest_mill_at_most(dias: np.ndarray, reaches: np.ndarray, limit: np.ndarray):
    idx = np.searchsorted(dias, limit, side="right") - 1
    exists = idx >= 0
    safe = np.maximum(idx, 0)
    return exists, dias[safe], reaches[safe]


def _drill_conditions_eval(c: _Cols, cfg: RuleConfig, catalog: ToolCatalog) -> dict[str, np.ndarray]:
    dia = c["H1"]
    dia_max = c.wc_max("H1")
    dia_min = c.wc_min("H1")
    depth_max = c.wc_max("H2")
    out = {}
    out["D1_DIA_SMALL"] = dia_min < cfg.drill_min_dia
    out["D1_DIA_LARGE"] = dia_max > cfg.drill_max_dia
    out["D2_DEPTH_RATIO"] = depth_max > cfg.drill_depth_ratio * dia_min
    exists, reach = _smallest_drill_at_least(catalog.drill_dias, catalog.drill_reaches, dia)
    out["D3_NO_TOOL"] = ~exists
    out["D3_REACH"] = exists & (depth_max > reach)
    blind = c["H2"] < c["B3"]
    bottom_thr = np.maximum(cfg.drill_bottom_min, cfg.drill_bottom_dia_factor * dia_max)
    out["D4_BOTTOM"] = blind & (c["B3"] - depth_max < bottom_thr)
    rad_max = dia_max / 2.0
    wall_thr = np.maximum(cfg.drill_wall_min, cfg.drill_wall_dia_factor * dia_max)
    walls = {
        "XLO": c.wc_min("H3") - rad_max,
        "XHI": c["B1"] - c.wc_max("H3") - rad_max,
        "YLO": c.wc_min("H4") - rad_max,
        "YHI": c["B2"] - c.wc_max("H4") - rad_max,
    }
    for side, wall in walls.items():
        out[f"D5_WALL_{side}"] = wall < wall_thr
        out[f"D6_BREAK_{side}"] = wall < 0.0
    out["D6_DEPTH"] = c["H2"] > c["B3"]
    _tol_eval(out, c, cfg, "D7", ("H1", "H2", "H3", "H4"))
    return out


def _mill_conditions_eval(c: _Cols, cfg: RuleConfig, catalog: ToolCatalog) -> dict[str, np.ndarray]:
    r = c["P3"]
    depth_max = c.wc_max("P4")
    out = {}
    out["M1_SHARP"] = r <= 0.0
    out["M1_RADIUS_SIDE"] = 2.0 * r > np.minimum(c.wc_min("P1"), c.wc_min("P2"))
    fit, fit_dia, fit_reach = _largest_mill_at_most(
        catalog.mill_dias, catalog.mill_reaches, 2.0 * r
    )
    out["M2_DEPTH_RATIO"] = fit & (depth_max > cfg.mill_depth_ratio * fit_dia)
    out["M3_NO_TOOL"] = ~fit
    out["M3_REACH"] = fit & (depth_max > fit_reach)
    wall_thr = np.maximum(cfg.mill_wall_min, cfg.mill_wall_depth_factor * depth_max)
    walls = {
        "XLO": c.wc_min("P5"),
        "XHI": c["B1"] - c.wc_max("P5") - c.wc_max("P1"),
        "YLO": c.wc_min("P6"),
        "YHI": c["B2"] - c.wc_max("P6") - c.wc_max("P2"),
    }
    for side, wall in walls.items():
        out[f"M5_WALL_{side}"] = wall < wall_thr
        out[f"M4_BREAK_{side}"] = wall < 0.0
    out["M4_DEPTH"] = c["P4"] > c["B3"]
    bottom_thr = np.maximum(
        cfg.mill_bottom_min,
        cfg.mill_bottom_side_factor * np.minimum(c["P1"], c["P2"]),
    )
    out["M6_BOTTOM"] = c["B3"] - depth_max < bottom_thr
    _tol_eval(out, c, cfg, "M7", ("P1", "P2", "P4", "P5", "P6"))
    return out


def _tol_eval(out, c: _Cols, cfg: RuleConfig, prefix: str, dims) -> None:
    if c.nominal:
        for d in dims:
            out[f"{prefix}_INVERTED_{d}"] = np.zeros(len(c.X), dtype=bool)
            out[f"{prefix}_NARROW_{d}"] = np.zeros(len(c.X), dtype=bool)
        return
    for d in dims:
        ut, lt = c[f"{d}_UT"], c[f"{d}_LT"]
        out[f"{prefix}_INVERTED_{d}"] = ut < lt
        out[f"{prefix}_NARROW_{d}"] = (ut >= lt) & (ut - lt < cfg.tol_band_min)


def _web_distance(c: _Cols) -> np.ndarray:
    """Worst-case clearance between the hole wall and the pocket wall."""
    rad_max = c.wc_max("H1") / 2.0
    cx_lo, cx_hi = c.wc_min("H3"), c.wc_max("H3")
    cy_lo, cy_hi = c.wc_min("H4"), c.wc_max("H4")
    rx_lo, rx_hi = c.wc_min("P5"), c.wc_max("P5") + c.wc_max("P1")
    ry_lo, ry_hi = c.wc_min("P6"), c.wc_max("P6") + c.wc_max("P2")
    dx = np.maximum(0.0, np.maximum(rx_lo - cx_hi, cx_lo - rx_hi))
    dy = np.maximum(0.0, np.maximum(ry_lo - cy_hi, cy_lo - ry_hi))
    return np.hypot(dx, dy) - rad_max


def _combined_extra_eval(c: _Cols, cfg: RuleConfig) -> dict[str, np.ndarray]:
    web = _web_distance(c)
    dia_max = c.wc_max("H1")
    out = {}
    out["C1_OVERLAP"] = web < 0.0
    out["C2_WEB"] = web < np.maximum(cfg.web_min, cfg.web_dia_factor * dia_max)
    deepest = np.maximum(c.wc_max("H2"), c.wc_max("P4"))
    out["C3_DEEP_WEB"] = web < cfg.web_depth_factor * deepest
    return out


def evaluate_conditions(
    scenario_id: str,
    X: np.ndarray,
    cfg: RuleConfig | None = None,
    catalog: ToolCatalog | None = None,
    nominal: bool = False,
) -> tuple[np.ndarray, list[Condition]]:
    """Evaluates every scenario condition over feature rows.

    Returns (matrix, conditions) where ``matrix[n, j]`` is True when row
    ``n`` violates condition ``j``. ``nominal=True`` zeroes tolerances
    and skips tolerance-sanity conditions (used by dominance audits).
    """
    cfg = cfg or RuleConfig()
    catalog = catalog or build_catalog(cfg)
    schema = get_schema(scenario_id)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != schema.n_features:
        raise ValueError(
            f"expected {schema.n_features} features for {scenario_id}, got {X.shape[1]}"
        )
    c = _Cols(X, schema.feature_names, nominal=nominal)
    values: dict[str, np.ndarray] = {}
    if scenario_id in (DRILLING, COMBINED):
        values.update(_drill_conditions_eval(c, cfg, catalog))
    if scenario_id in (MILLING, COMBINED):
        values.update(_mill_conditions_eval(c, cfg, catalog))
    if scenario_id == COMBINED:
        values.update(_combined_extra_eval(c, cfg))
    conditions = conditions_for(scenario_id)
    matrix = np.column_stack([values[cond.key] for cond in conditions])
    return matrix, conditions


def labels(
    scenario_id: str,
    X: np.ndarray,
    cfg: RuleConfig | None = None,
    catalog: ToolCatalog | None = None,
) -> np.ndarray:
    """1 = manufacturable (no condition violated), 0 otherwise."""
    matrix, _ = evaluate_conditions(scenario_id, X, cfg, catalog)
    return (~matrix.any(axis=1)).astype(np.int8)


def _check(record: DesignRecord, scenario_id: str, cfg, catalog) -> RuleReport:
    if record.scenario_id != scenario_id:
        raise ValueError(
            f"record is for scenario {record.scenario_id!r}, expected {scenario_id!r}"
        )
    schema = get_schema(scenario_id)
    problems = schema.validate_values(record.values, check_range=False)
    if problems:
        raise ValueError("; ".join(problems))
    x = record.as_vector(schema)
    matrix, conditions = evaluate_conditions(scenario_id, x[None, :], cfg, catalog)
    violated = [cond for cond, hit in zip(conditions, matrix[0]) if hit]
    violations = [
        Violation(
            rule_id=cond.rule_id,
            condition=cond.key,
            category=cond.category,
            message=cond.message,
            offending_features=cond.features,
        )
        for cond in violated
    ]
    return RuleReport(manufacturable=not violations, violations=violations)


def check_drilling(record: DesignRecord, cfg=None, catalog=None) -> RuleReport:
    return _check(record, DRILLING, cfg, catalog)


def check_milling(record: DesignRecord, cfg=None, catalog=None) -> RuleReport:
    return _check(record, MILLING, cfg, catalog)


def check_combined(record: DesignRecord, cfg=None, catalog=None) -> RuleReport:
    return _check(record, COMBINED, cfg, catalog)


def check_record(record: DesignRecord, cfg=None, catalog=None) -> RuleReport:
    return _check(record, record.scenario_id, cfg, catalog)


# ---------------------------------------------------------------------------
# Configuration files and hashing
# ---------------------------------------------------------------------------

CONFIG_VERSION = 1


def config_payload(cfg: RuleConfig, catalog: ToolCatalog) -> dict:
    return {
        "version": CONFIG_VERSION,
        "constants": asdict(cfg),
        "catalog": {
            "drills": [[t.diameter, t.reach] for t in catalog.drills],
            "end_mills": [[t.diameter, t.reach] for t in catalog.end_mills],
        },
    }


def config_hash(cfg: RuleConfig, catalog: ToolCatalog | None = None) -> str:
    catalog = catalog or build_catalog(cfg)
    canon = json.dumps(config_payload(cfg, catalog), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def save_rule_config(cfg: RuleConfig, path: str | Path, catalog: ToolCatalog | None = None) -> None:
    catalog = catalog or build_catalog(cfg)
    Path(path).write_text(
        json.dumps(config_payload(cfg, catalog), indent=1) + "\n", encoding="utf-8"
    )


def load_rule_config(path: str | Path) -> tuple[RuleConfig, ToolCatalog]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("version") != CONFIG_VERSION:
        raise ValueError(f"unsupported rule config version in {path}")
    cfg = RuleConfig(**payload["constants"])
    cat = payload.get("catalog")
    if cat:
        catalog = ToolCatalog(
            drills=[Tool(d, r) for d, r in cat["drills"]],
            end_mills=[Tool(d, r) for d, r in cat["end_mills"]],
        )
    else:
        catalog = build_catalog(cfg)
    return cfg, catalog


# ---------------------------------------------------------------------------
# Boundary threshold solvers (used by the boundary-biased sampler)
# ---------------------------------------------------------------------------

def _row_value(values: dict[str, float], name: str) -> float:
    return float(values.get(name, 0.0))


def boundary_target(
    values: dict[str, float],
    condition_key: str,
    cfg: RuleConfig,
    catalog: ToolCatalog,
) -> tuple[str, float] | None:
    """Feature assignment that puts the record exactly on the condition's
    threshold, holding everything else fixed. None when the condition has
    no closed-form governing feature for this base record.

    Tolerance-band conditions return the upper-tolerance feature; callers
    perturb those by an absolute offset rather than a relative one.
    """
    v = lambda name: _row_value(values, name)

    def wc_max(dim):
        return v(dim) + v(f"{dim}_UT")

    def wc_min(dim):
        return v(dim) + v(f"{dim}_LT")

    if condition_key.startswith(("D7_NARROW", "M7_NARROW")):
        dim = condition_key.split("_")[-1]
        return f"{dim}_UT", v(f"{dim}_LT") + cfg.tol_band_min

    if condition_key == "D1_DIA_SMALL":
        return "H1", cfg.drill_min_dia - v("H1_LT")
    if condition_key == "D1_DIA_LARGE":
        return "H1", cfg.drill_max_dia - v("H1_UT")
    if condition_key == "D2_DEPTH_RATIO":
        return "H2", cfg.drill_depth_ratio * wc_min("H1") - v("H2_UT")
    if condition_key == "D3_REACH":
        tool_exists, reach = _smallest_drill_at_least(
            catalog.drill_dias, catalog.drill_reaches, np.array([v("H1")])
        )
        if not tool_exists[0]:
            return None
        return "H2", float(reach[0]) - v("H2_UT")
    if condition_key == "D4_BOTTOM":
        thr = max(cfg.drill_bottom_min, cfg.drill_bottom_dia_factor * wc_max("H1"))
        return "H2", v("B3") - thr - v("H2_UT")
    if condition_key.startswith("D5_WALL"):
        side = condition_key.split("_")[-1]
        rad = wc_max("H1") / 2.0
        thr = max(cfg.drill_wall_min, cfg.drill_wall_dia_factor * wc_max("H1"))
        if side == "XLO":
            return "H3", thr + rad - v("H3_LT")
        if side == "XHI":
            return "H3", v("B1") - thr - rad - v("H3_UT")
        if side == "YLO":
            return "H4", thr + rad - v("H4_LT")
        return "H4", v("B2") - thr - rad - v("H4_UT")

    if condition_key == "M1_RADIUS_SIDE":
        return "P3", min(wc_min("P1"), wc_min("P2")) / 2.0
    if condition_key == "M3_NO_TOOL":
        return "P3", float(catalog.mill_dias[0]) / 2.0
    if condition_key in ("M2_DEPTH_RATIO", "M3_REACH"):
        fit, fit_dia, fit_reach = _largest_mill_at_most(
            catalog.mill_dias, catalog.mill_reaches, np.array([2.0 * v("P3")])
        )
        if not fit[0]:
            return None
        if condition_key == "M2_DEPTH_RATIO":
            return "P4", cfg.mill_depth_ratio * float(fit_dia[0]) - v("P4_UT")
        return "P4", float(fit_reach[0]) - v("P4_UT")
    if condition_key == "M6_BOTTOM":
        thr = max(cfg.mill_bottom_min,
                  cfg.mill_bottom_side_factor * min(v("P1"), v("P2")))
        return "P4", v("B3") - thr - v("P4_UT")
    if condition_key.startswith("M5_WALL"):
        side = condition_key.split("_")[-1]
        thr = max(cfg.mill_wall_min, cfg.mill_wall_depth_factor * wc_max("P4"))
        if side == "XLO":
            return "P5", thr - v("P5_LT")
        if side == "XHI":
            return "P5", v("B1") - thr - wc_max("P1") - v("P5_UT")
        if side == "YLO":
            return "P6", thr - v("P6_LT")
        return "P6", v("B2") - thr - wc_max("P2") - v("P6_UT")

    if condition_key == "C2_WEB":
        thr = max(cfg.web_min, cfg.web_dia_factor * wc_max("H1"))
        rad = wc_max("H1") / 2.0
        rx_lo = wc_min("P5")
        rx_hi = wc_max("P5") + wc_max("P1")
        cy = v("H4")
        ry_lo, ry_hi = wc_min("P6"), wc_max("P6") + wc_max("P2")
        if not (ry_lo <= cy <= ry_hi):
            return None  # diagonal approach has no single governing feature
        if v("H3") <= rx_lo:
            return "H3", rx_lo - thr - rad - v("H3_UT")
        if v("H3") >= rx_hi:
            return "H3", rx_hi + thr + rad - v("H3_LT")
        return None

    return None


def solvable_conditions(scenario_id: str) -> list[str]:
    """Condition keys with closed-form boundary solvers, in registry order."""
    keys = []
    probe = {"B1": 100.0, "B2": 100.0, "B3": 100.0, "H1": 10.0, "H2": 20.0,
             "H3": 10.0, "H4": 50.0, "P1": 30.0, "P2": 30.0, "P3": 5.0,
             "P4": 10.0, "P5": 40.0, "P6": 40.0}
    cfg = RuleConfig()
    catalog = build_catalog(cfg)
    for cond in conditions_for(scenario_id):
        if boundary_target(probe, cond.key, cfg, catalog) is not None:
            keys.append(cond.key)
    return keys
