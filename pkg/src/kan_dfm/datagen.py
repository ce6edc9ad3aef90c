"""Synthetic dataset generation: uniform sampling over schema ranges,
boundary-biased sampling near rule thresholds, rule-engine labeling,
class balancing, and deterministic CSV emission.

Half of each shipped dataset is drawn uniformly at random; the other
half is steered to sit within a small perturbation of some rule's
threshold so the label flips under slight dimension changes.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .rules import (
    RuleConfig,
    ToolCatalog,
    boundary_target,
    build_catalog,
    config_hash,
    labels,
    solvable_conditions,
)
from .scenarios import (
    COMBINED,
    Dataset,
    DesignRecord,
    ScenarioSchema,
    get_schema,
    write_csv,
)

# Structural containment: each feature is drawn uniformly over its schema
# range intersected with bounds that keep the geometry representable
# (features inside the stock, fillets no larger than the pocket). Sampling
# a conditional uniform reproduces rejection of the unconditioned uniform.
# Manufacturability margins (walls, depth ratios, reach, webs, tolerance
# bands) stay unconstrained so both labels occur densely.


def _containment_bounds(name: str, get) -> tuple:
    """(extra_lo, extra_hi) bounds for a feature given already-sampled
    columns; ``get`` maps a feature name to its column. None = no bound."""
    if name == "H2":
        return None, get("B3")
    if name == "H3":
        return get("H1") / 2.0, get("B1") - get("H1") / 2.0
    if name == "H4":
        return get("H1") / 2.0, get("B2") - get("H1") / 2.0
    if name == "P1":
        return None, get("B1")
    if name == "P2":
        return None, get("B2")
    if name == "P3":
        return None, np.minimum(get("P1"), get("P2")) / 2.0
    if name == "P4":
        return None, get("B3")
    if name == "P5":
        return None, get("B1") - get("P1")
    if name == "P6":
        return None, get("B2") - get("P2")
    return None, None

# relative width of boundary perturbations; tolerance rules use an
# absolute +-0.05 mm instead
BOUNDARY_REL = 0.02
BOUNDARY_TOL_ABS = 0.05


@dataclass
class GenConfig:
    scenario_id: str
    n_total: int
    boundary_fraction: float = 0.5
    balance: bool = True
    seed: int = 0
    rule_config_hash: str = ""

    def __post_init__(self) -> None:
        if not 0.0 <= self.boundary_fraction <= 1.0:
            raise ValueError("boundary_fraction must be in [0, 1]")
        if self.balance and (self.n_total < 2 or self.n_total % 2):
            raise ValueError("balanced generation needs an even n_total >= 2")
        if self.n_total < 1:
            raise ValueError("n_total must be positive")


def sample_matrix(schema: ScenarioSchema, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform rows over schema ranges with containment bounds applied and
    tolerance pairs ordered (upper >= lower). Degenerate bounds (a feature
    that cannot fit at all) collapse to the lower endpoint."""
    X = np.empty((n, schema.n_features))
    cols = {f.name: i for i, f in enumerate(schema.features)}
    handled = set()
    for f in schema.features:
        if f.name in handled:
            continue
        i = cols[f.name]
        if f.role == "tol_upper":
            dim = f.linked_dimension
            a = rng.uniform(f.min, f.max, n)
            b = rng.uniform(f.min, f.max, n)
            X[:, i] = np.maximum(a, b)
            lt = f"{dim}_LT"
            X[:, cols[lt]] = np.minimum(a, b)
            handled.add(lt)
        elif f.role == "tol_lower":
            continue  # produced together with its upper bound
        else:
            lo = np.full(n, f.min)
            hi = np.full(n, f.max)
            extra_lo, extra_hi = _containment_bounds(f.name, lambda name: X[:, cols[name]])
            if extra_lo is not None:
                lo = np.maximum(lo, extra_lo)
            if extra_hi is not None:
                hi = np.minimum(hi, extra_hi)
            X[:, i] = rng.uniform(lo, np.maximum(hi, lo))
        handled.add(f.name)
    if schema.scenario_id == COMBINED:
        _separate_hole_from_pocket(schema, X, cols, rng)
    return X


def _separate_hole_from_pocket(schema, X, cols, rng, max_rounds: int = 50) -> None:
    """Redraws hole centers that landed on the pocket footprint: the hole
    is cut from the top face into solid stock, so overlapping nominal
    footprints are unrepresentable. Thin webs remain as sampled."""
    h1, h3, h4 = (cols[k] for k in ("H1", "H3", "H4"))
    for _ in range(max_rounds):
        rad = X[:, h1] / 2.0
        dx = np.maximum(
            0.0,
            np.maximum(X[:, cols["P5"]] - X[:, h3],
                       X[:, h3] - (X[:, cols["P5"]] + X[:, cols["P1"]])),
        )
        dy = np.maximum(
            0.0,
            np.maximum(X[:, cols["P6"]] - X[:, h4],
                       X[:, h4] - (X[:, cols["P6"]] + X[:, cols["P2"]])),
        )
        bad = np.flatnonzero(np.hypot(dx, dy) <= rad)
        if bad.size == 0:
            return
        for name, axis_col in (("H3", h3), ("H4", h4)):
            spec = schema.feature(name)
            lo = np.maximum(spec.min, X[bad, h1] / 2.0)
            block = X[bad, cols["B1" if name == "H3" else "B2"]]
            hi = np.maximum(np.minimum(spec.max, block - X[bad, h1] / 2.0), lo)
            X[bad, axis_col] = rng.uniform(lo, hi)


def sample_random(schema: ScenarioSchema, rng: np.random.Generator) -> DesignRecord:
    row = sample_matrix(schema, 1, rng)[0]
    return DesignRecord(schema.scenario_id, dict(zip(schema.feature_names, map(float, row))))


def _feature_bounds(schema: ScenarioSchema, name: str, values: dict) -> tuple[float, float]:
    spec = schema.feature(name)
    extra_lo, extra_hi = _containment_bounds(name, lambda k: float(values[k]))
    lo = spec.min if extra_lo is None else max(spec.min, float(extra_lo))
    hi = spec.max if extra_hi is None else min(spec.max, float(extra_hi))
    return lo, hi


def _perturbed_boundary_value(
    values: dict,
    condition_key: str,
    schema: ScenarioSchema,
    rng: np.random.Generator,
    cfg: RuleConfig,
    catalog: ToolCatalog,
) -> tuple[str, float] | None:
    solved = boundary_target(values, condition_key, cfg, catalog)
    if solved is None:
        return None
    feature, target = solved
    if "NARROW" in condition_key:
        value = target + rng.uniform(-BOUNDARY_TOL_ABS, BOUNDARY_TOL_ABS)
        spec = schema.feature(feature)
        lo, hi = spec.min, spec.max
    else:
        value = target * (1.0 + rng.uniform(-BOUNDARY_REL, BOUNDARY_REL))
        lo, hi = _feature_bounds(schema, feature, values)
    if not (lo <= target <= hi) or not (lo <= value <= hi):
        return None
    return feature, float(value)


def sample_boundary(
    schema: ScenarioSchema,
    rng: np.random.Generator,
    cfg: RuleConfig | None = None,
    catalog: ToolCatalog | None = None,
    max_tries: int = 200,
) -> DesignRecord:
    """Random design nudged onto a randomly chosen rule threshold.

    Draws a base record, solves the governing feature for the rule's
    threshold, and perturbs it by a small signed amount so roughly half
    of the samples land on each side of the rule.
    """
    cfg = cfg or RuleConfig()
    catalog = catalog or build_catalog(cfg)
    keys = solvable_conditions(schema.scenario_id)
    for _ in range(max_tries):
        record = sample_random(schema, rng)
        key = keys[int(rng.integers(len(keys)))]
        result = _perturbed_boundary_value(record.values, key, schema, rng, cfg, catalog)
        if result is None:
            continue
        feature, value = result
        record.values[feature] = value
        return record
    raise RuntimeError(
        f"no solvable boundary sample for {schema.scenario_id} in {max_tries} tries"
    )


def _boundary_chunk(
    schema: ScenarioSchema,
    n: int,
    rng: np.random.Generator,
    cfg: RuleConfig,
    catalog: ToolCatalog,
    keys: list[str],
) -> tuple[np.ndarray, np.ndarray]:
    """n boundary rows plus a success mask; unsolvable draws are marked
    failed and skipped by the caller."""
    rows = sample_matrix(schema, n, rng)
    picks = rng.integers(len(keys), size=n)
    names = schema.feature_names
    col = {name: i for i, name in enumerate(names)}
    ok = np.zeros(n, dtype=bool)
    for i, (row, pick) in enumerate(zip(rows, picks)):
        values = dict(zip(names, row))
        result = _perturbed_boundary_value(values, keys[pick], schema, rng, cfg, catalog)
        if result is None:
            continue
        feature, value = result
        rows[i, col[feature]] = value
        ok[i] = True
    return rows, ok


def generate_dataset(
    config: GenConfig,
    cfg: RuleConfig | None = None,
    catalog: ToolCatalog | None = None,
    chunk_size: int = 4096,
) -> tuple[Dataset, dict]:
    """Labeled dataset plus a generation manifest.

    With ``balance=True`` candidates are rejection-sampled until each
    class holds exactly ``n_total/2`` records; the draw budget is
    100x ``n_total``.
    """
    cfg = cfg or RuleConfig()
    catalog = catalog or build_catalog(cfg)
    schema = get_schema(config.scenario_id)
    rng = np.random.default_rng(config.seed)
    keys = solvable_conditions(config.scenario_id)
    rule_hash = config_hash(cfg, catalog)

    if config.balance:
        quota = {0: config.n_total // 2, 1: config.n_total // 2}
    else:
        quota = {0: config.n_total, 1: config.n_total}  # joint cap applied below
    taken_rows: list[np.ndarray] = []
    taken_labels: list[int] = []
    counts = {0: 0, 1: 0}
    drawn = 0
    boundary_accepted = 0
    budget = 100 * config.n_total

    def done() -> bool:
        if config.balance:
            return counts[0] >= quota[0] and counts[1] >= quota[1]
        return len(taken_rows) >= config.n_total

    while not done():
        if drawn >= budget:
            raise RuntimeError(
                "class balance unreachable within the rejection budget "
                f"({budget} candidates drawn, counts={counts})"
            )
        n = min(chunk_size, budget - drawn)
        source = rng.random(n) < config.boundary_fraction
        n_boundary = int(source.sum())
        X = np.empty((n, schema.n_features))
        keep = np.ones(n, dtype=bool)
        if n - n_boundary > 0:
            X[~source] = sample_matrix(schema, n - n_boundary, rng)
        if n_boundary > 0:
            rows, ok = _boundary_chunk(schema, n_boundary, rng, cfg, catalog, keys)
            X[source] = rows
            keep[source] = ok
        drawn += n
        X = X[keep]
        is_boundary = source[keep]
        y = labels(config.scenario_id, X, cfg, catalog)
        for row, lab, bnd in zip(X, y, is_boundary):
            lab = int(lab)
            if config.balance and counts[lab] >= quota[lab]:
                continue
            if not config.balance and len(taken_rows) >= config.n_total:
                break
            taken_rows.append(row)
            taken_labels.append(lab)
            counts[lab] += 1
            boundary_accepted += int(bnd)
            if done():
                break

    ds = Dataset(
        config.scenario_id,
        np.stack(taken_rows),
        np.array(taken_labels, dtype=np.int8),
        schema.feature_names,
    )
    manifest = {
        "generator_version": __version__,
        "config": asdict(config) | {"rule_config_hash": rule_hash},
        "rule_config_hash": rule_hash,
        "class_counts": {"0": counts[0], "1": counts[1]},
        "candidates_drawn": drawn,
        "acceptance_rate": len(ds) / drawn,
        "boundary_fraction_accepted": boundary_accepted / len(ds),
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }
    return ds, manifest


def manifest_path_for(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".manifest.json")


def write_dataset(ds: Dataset, manifest: dict, csv_path: str | Path) -> None:
    write_csv(ds, csv_path)
    manifest_path_for(csv_path).write_text(
        json.dumps(manifest, indent=1) + "\n", encoding="utf-8"
    )


def relabel(ds: Dataset, cfg: RuleConfig | None = None, catalog: ToolCatalog | None = None) -> np.ndarray:
    """Recomputed labels for audit: must equal the stored column."""
    return labels(ds.scenario_id, ds.X, cfg, catalog)


def boundary_proximity_fraction(
    ds: Dataset,
    cfg: RuleConfig | None = None,
    catalog: ToolCatalog | None = None,
    rel_tol: float = BOUNDARY_REL,
) -> float:
    """Fraction of rows whose governing feature sits within ``rel_tol``
    of at least one solvable rule threshold."""
    cfg = cfg or RuleConfig()
    catalog = catalog or build_catalog(cfg)
    schema = get_schema(ds.scenario_id)
    keys = solvable_conditions(ds.scenario_id)
    names = schema.feature_names
    col = {n: i for i, n in enumerate(names)}
    hits = 0
    for row in ds.X:
        values = dict(zip(names, row))
        for key in keys:
            solved = boundary_target(values, key, cfg, catalog)
            if solved is None:
                continue
            feature, target = solved
            actual = row[col[feature]]
            if "NARROW" in key:
                close = abs(actual - target) <= BOUNDARY_TOL_ABS + 1e-12
            else:
                close = abs(target) > 1e-9 and abs(actual - target) <= rel_tol * abs(target)
            if close:
                hits += 1
                break
    return hits / len(ds)
