"""Parametric design schemas for the three machining scenarios.

Each scenario is a flat, ordered feature list: block dimensions, feature
dimensions/positions, and signed tolerance bounds (upper/lower, in mm)
linked to specific dimensions. Geometry conventions used throughout:

* block occupies ``[0, B1] x [0, B2]`` with height ``B3``
* hole: center ``(H3, H4)``, diameter ``H1``, depth ``H2`` cut from the top
* pocket: min-corner ``(P5, P6)``, extents ``P1 x P2``, corner radius
  ``P3``, depth ``P4`` cut from the top
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DRILLING = "drilling"
MILLING = "milling"
COMBINED = "combined"

ROLE_BLOCK = "block_dim"
ROLE_FEATURE = "feature_dim"
ROLE_POSITION = "position"
ROLE_TOL_UPPER = "tol_upper"
ROLE_TOL_LOWER = "tol_lower"


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    description: str
    min: float
    max: float
    role: str
    linked_dimension: str | None = None
    unit: str = "mm"


@dataclass(frozen=True)
class ScenarioSchema:
    scenario_id: str
    features: tuple[FeatureSpec, ...]

    @property
    def feature_names(self) -> list[str]:
        return [f.name for f in self.features]

    @property
    def n_features(self) -> int:
        return len(self.features)

    def index(self, name: str) -> int:
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise KeyError(f"unknown feature {name!r} for scenario {self.scenario_id}")

    def feature(self, name: str) -> FeatureSpec:
        return self.features[self.index(name)]

    def validate_values(
        self, values: dict[str, float], check_range: bool = True
    ) -> list[str]:
        """Returns a list of human-readable problems (empty = valid)."""
        problems = []
        names = set(self.feature_names)
        for key in values:
            if key not in names:
                problems.append(f"unknown parameter {key!r}")
        for spec in self.features:
            if spec.name not in values:
                problems.append(f"missing parameter {spec.name!r}")
                continue
            v = values[spec.name]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                problems.append(f"{spec.name}: expected a number, got {type(v).__name__}")
            elif not np.isfinite(v):
                problems.append(f"{spec.name}: value must be finite")
            elif check_range and not (spec.min <= float(v) <= spec.max):
                problems.append(
                    f"{spec.name}: {v} outside allowed range [{spec.min}, {spec.max}]"
                )
        return problems


def _dim(name, desc, lo, hi, role):
    return FeatureSpec(name, desc, lo, hi, role)


def _tols(dim_name: str) -> list[FeatureSpec]:
    return [
        FeatureSpec(f"{dim_name}_UT", f"{dim_name} upper tolerance", -0.5, 0.5,
                    ROLE_TOL_UPPER, linked_dimension=dim_name),
        FeatureSpec(f"{dim_name}_LT", f"{dim_name} lower tolerance", -0.5, 0.5,
                    ROLE_TOL_LOWER, linked_dimension=dim_name),
    ]


def _drilling_schema() -> ScenarioSchema:
    dims = [
        _dim("B1", "Block length", 15.0, 200.0, ROLE_BLOCK),
        _dim("B2", "Block width", 14.0, 199.3, ROLE_BLOCK),
        _dim("B3", "Block height", 4.0, 200.0, ROLE_BLOCK),
        _dim("H1", "Hole diameter", 1.0, 30.0, ROLE_FEATURE),
        _dim("H2", "Hole depth", 4.0, 198.9, ROLE_FEATURE),
        _dim("H3", "Hole x pos.", 1.5, 196.2, ROLE_POSITION),
        _dim("H4", "Hole y pos.", 1.5, 177.6, ROLE_POSITION),
    ]
    tols = [t for d in ("H1", "H2", "H3", "H4") for t in _tols(d)]
    return ScenarioSchema(DRILLING, tuple(dims + tols))


def _milling_schema() -> ScenarioSchema:
    dims = [
        _dim("B1", "Block length", 15.0, 200.0, ROLE_BLOCK),
        _dim("B2", "Block width", 14.0, 199.3, ROLE_BLOCK),
        _dim("B3", "Block height", 4.0, 200.0, ROLE_BLOCK),
        _dim("P1", "Pocket length", 3.4, 193.7, ROLE_FEATURE),
        _dim("P2", "Pocket width", 3.0, 180.0, ROLE_FEATURE),
        _dim("P3", "Pocket radius", 0.0, 25.0, ROLE_FEATURE),
        _dim("P4", "Pocket depth", 2.0, 195.2, ROLE_FEATURE),
        _dim("P5", "Pocket x pos.", 0.6, 182.0, ROLE_POSITION),
        _dim("P6", "Pocket y pos.", 0.6, 155.8, ROLE_POSITION),
    ]
    tols = [t for d in ("P1", "P2", "P4", "P5", "P6") for t in _tols(d)]
    return ScenarioSchema(MILLING, tuple(dims + tols))


def _combined_schema() -> ScenarioSchema:
    dims = [
        _dim("B1", "Block length", 25.3, 300.0, ROLE_BLOCK),
        _dim("B2", "Block width", 16.2, 296.7, ROLE_BLOCK),
        _dim("B3", "Block height", 4.0, 299.9, ROLE_BLOCK),
        _dim("H1", "Hole diameter", 1.0, 30.0, ROLE_FEATURE),
        _dim("H2", "Hole depth", 2.0, 297.1, ROLE_FEATURE),
        _dim("H3", "Hole x pos.", 1.7, 294.0, ROLE_POSITION),
        _dim("H4", "Hole y pos.", 1.6, 289.8, ROLE_POSITION),
        _dim("P1", "Pocket length", 5.8, 150.0, ROLE_FEATURE),
        _dim("P2", "Pocket width", 3.2, 148.5, ROLE_FEATURE),
        _dim("P3", "Pocket radius", 0.0, 25.0, ROLE_FEATURE),
        _dim("P4", "Pocket depth", 2.0, 294.7, ROLE_FEATURE),
        _dim("P5", "Pocket x pos.", 0.6, 284.2, ROLE_POSITION),
        _dim("P6", "Pocket y pos.", 0.6, 270.4, ROLE_POSITION),
    ]
    tols = [t for d in ("H1", "H2", "H3", "H4") for t in _tols(d)]
    tols += [t for d in ("P1", "P2", "P4", "P5", "P6") for t in _tols(d)]
    return ScenarioSchema(COMBINED, tuple(dims + tols))


_SCHEMAS = {
    DRILLING: _drilling_schema(),
    MILLING: _milling_schema(),
    COMBINED: _combined_schema(),
}


def get_schema(scenario_id: str) -> ScenarioSchema:
    try:
        return _SCHEMAS[scenario_id]
    except KeyError:
        raise KeyError(
            f"unknown scenario {scenario_id!r}; expected one of {sorted(_SCHEMAS)}"
        )


def all_schemas() -> dict[str, ScenarioSchema]:
    return dict(_SCHEMAS)


@dataclass
class DesignRecord:
    """One parametric design: named dimension and tolerance values in mm."""

    scenario_id: str
    values: dict[str, float]
    label: int | None = None

    def as_vector(self, schema: ScenarioSchema | None = None) -> np.ndarray:
        schema = schema or get_schema(self.scenario_id)
        return np.array([float(self.values[n]) for n in schema.feature_names])


@dataclass
class Dataset:
    """Column-ordered design matrix plus optional labels."""

    scenario_id: str
    X: np.ndarray
    y: np.ndarray | None = None
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.feature_names:
            self.feature_names = get_schema(self.scenario_id).feature_names
        if self.X.ndim != 2 or self.X.shape[1] != len(self.feature_names):
            raise ValueError("X shape does not match feature names")
        if self.y is not None and len(self.y) != len(self.X):
            raise ValueError("label count does not match row count")

    def __len__(self) -> int:
        return len(self.X)

    def subset(self, idx) -> "Dataset":
        y = None if self.y is None else self.y[idx]
        return Dataset(self.scenario_id, self.X[idx], y, list(self.feature_names))

    def record(self, i: int) -> DesignRecord:
        values = {n: float(v) for n, v in zip(self.feature_names, self.X[i])}
        label = None if self.y is None else int(self.y[i])
        return DesignRecord(self.scenario_id, values, label)

    def records(self) -> list[DesignRecord]:
        return [self.record(i) for i in range(len(self))]


def as_dataset(records, scenario_id: str | None = None) -> Dataset:
    """Accepts a Dataset or a sequence of DesignRecords."""
    if isinstance(records, Dataset):
        return records
    records = list(records)
    if not records:
        raise ValueError("empty record collection")
    sid = scenario_id or records[0].scenario_id
    schema = get_schema(sid)
    X = np.stack([r.as_vector(schema) for r in records])
    labels = [r.label for r in records]
    y = None if any(l is None for l in labels) else np.array(labels, dtype=np.int8)
    return Dataset(sid, X, y, schema.feature_names)


def write_csv(ds: Dataset, path: str | Path) -> None:
    """Deterministic CSV: schema column order plus trailing label, repr
    floats, '.' decimal, LF line endings."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        header = list(ds.feature_names) + (["label"] if ds.y is not None else [])
        fh.write(",".join(header) + "\n")
        for i in range(len(ds)):
            cells = [repr(float(v)) for v in ds.X[i]]
            if ds.y is not None:
                cells.append(str(int(ds.y[i])))
            fh.write(",".join(cells) + "\n")


def read_csv(path: str | Path, scenario_id: str | None = None) -> Dataset:
    """Loads a dataset CSV; infers the scenario from the header when not
    given. Raises ValueError naming the offending line on parse errors."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file")
        has_label = header and header[-1] == "label"
        names = header[:-1] if has_label else header
        if scenario_id is None:
            for sid, schema in _SCHEMAS.items():
                if schema.feature_names == names:
                    scenario_id = sid
                    break
            else:
                raise ValueError(f"{path}: header matches no known scenario schema")
        else:
            if get_schema(scenario_id).feature_names != names:
                raise ValueError(f"{path}: header does not match {scenario_id} schema")
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}: line {lineno}: expected {len(header)} cells")
            try:
                vals = [float(c) for c in row[: len(names)]]
                if has_label:
                    labels.append(int(row[-1]))
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: unparseable numeric value")
            rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    X = np.array(rows)
    y = np.array(labels, dtype=np.int8) if has_label else None
    return Dataset(scenario_id, X, y)
