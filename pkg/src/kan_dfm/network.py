"""Spline-edge network: forward evaluation, loss, analytic gradients,
classification, latent extraction, and versioned JSON serialization.

Every connection from input i to output j of a layer is a learnable
univariate spline; node outputs are plain sums of incoming edge values
(no weights, no bias, no residual activation). The final layer produces
one scalar that is squashed by a logistic to a probability.

Layer input domains: layer 0 sees min-max normalized features in [0, 1];
hidden layers see summed spline outputs, whose knots span [-1, 1].
Inputs beyond a layer's extended knot span are clamped to it, and layer-0
clamps are reported to the caller.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .metrics import LOG_CLIP
from .preprocess import Scaler
from .scenarios import DesignRecord, get_schema
from .splines import (
    KnotVector,
    SplineEdge,
    basis_and_derivative_matrix,
    basis_matrix,
    build_knot_vector,
)

FORMAT_VERSION = 1
INPUT_DOMAIN = (0.0, 1.0)
HIDDEN_DOMAIN = (-1.0, 1.0)


@dataclass
class KanLayer:
    """d_in x d_out grid of spline edges sharing one knot configuration.

    Coefficients are stored as one (d_in, d_out, n_basis) tensor so batch
    evaluation reduces to einsums over precomputed basis matrices.
    """

    kv: KnotVector
    coef: np.ndarray

    def __post_init__(self) -> None:
        self.coef = np.asarray(self.coef, dtype=float)
        if self.coef.ndim != 3 or self.coef.shape[2] != self.kv.n_basis:
            raise ValueError("coefficient tensor must be (d_in, d_out, n_basis)")

    @property
    def d_in(self) -> int:
        return self.coef.shape[0]

    @property
    def d_out(self) -> int:
        return self.coef.shape[1]

    def edge(self, i: int, j: int) -> SplineEdge:
        return SplineEdge(self.kv, self.coef[i, j].copy())

    def clamp(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.kv.extended_span
        clamped = (x < lo) | (x > hi)
        return np.clip(x, lo, hi), clamped


def layer_forward(layer: KanLayer, x) -> np.ndarray:
    """Single-vector layer map: out_j = sum_i phi_ij(x_i)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (layer.d_in,):
        raise ValueError(f"expected input of length {layer.d_in}, got {x.shape}")
    xc, _ = layer.clamp(x)
    basis = basis_matrix(layer.kv, xc)  # (d_in, M)
    return np.einsum("im,iom->o", basis, layer.coef)


def _layer_forward_batch(layer: KanLayer, X: np.ndarray, with_grad: bool):
    """Batch layer map with optional caches for backprop.

    Returns (out, cache) where cache holds the basis matrix, derivative
    matrix, and in-domain mask needed by the backward pass.
    """
    Xc, clamped = layer.clamp(X)
    flat = Xc.reshape(-1)
    if with_grad:
        b, d = basis_and_derivative_matrix(layer.kv, flat)
        basis = b.reshape(*Xc.shape, layer.kv.n_basis)
        dbasis = d.reshape(*Xc.shape, layer.kv.n_basis)
    else:
        basis = basis_matrix(layer.kv, flat).reshape(*Xc.shape, layer.kv.n_basis)
        dbasis = None
    out = np.einsum("nim,iom->no", basis, layer.coef)
    cache = {"basis": basis, "dbasis": dbasis, "mask": ~clamped}
    return out, cache


@dataclass
class KanModel:
    layers: list[KanLayer]
    scaler: Scaler
    threshold_tau: float = 0.5
    scenario_id: str = ""
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.layers:
            raise ValueError("model needs at least one layer")
        for a, b in zip(self.layers, self.layers[1:]):
            if a.d_out != b.d_in:
                raise ValueError("layer dimensions do not chain")
        if self.layers[-1].d_out != 1:
            raise ValueError("final layer must have a single output")
        if not 0.0 < self.threshold_tau < 1.0:
            raise ValueError("threshold must lie strictly inside (0, 1)")
        if self.feature_names and len(self.feature_names) != self.layers[0].d_in:
            raise ValueError("feature name count must match first layer width")

    @property
    def n_features(self) -> int:
        return self.layers[0].d_in

    def coefficient_count(self) -> int:
        return sum(l.coef.size for l in self.layers)

    def copy_coefficients(self) -> list[np.ndarray]:
        return [l.coef.copy() for l in self.layers]

    def set_coefficients(self, tensors: list[np.ndarray]) -> None:
        for layer, t in zip(self.layers, tensors):
            if t.shape != layer.coef.shape:
                raise ValueError("coefficient shapes do not match model")
            layer.coef = t.copy()


def init_model(
    n_features: int,
    arch: list[int],
    grid: int = 3,
    order_k: int = 3,
    seed: int = 0,
    scaler: Scaler | None = None,
    scenario_id: str = "",
    feature_names: list[str] | None = None,
    threshold_tau: float = 0.5,
) -> KanModel:
    """Fresh model with zero-mean uniform coefficients scaled so initial
    pre-squash outputs stay O(1) and the logistic is unsaturated."""
    rng = np.random.default_rng(seed)
    widths = [n_features] + list(arch) + [1]
    layers = []
    for idx, (d_in, d_out) in enumerate(zip(widths, widths[1:])):
        lo, hi = INPUT_DOMAIN if idx == 0 else HIDDEN_DOMAIN
        kv = build_knot_vector(grid, order_k, lo, hi)
        scale = 1.0 / np.sqrt(d_in * kv.n_basis)
        coef = rng.uniform(-scale, scale, size=(d_in, d_out, kv.n_basis))
        layers.append(KanLayer(kv, coef))
    if scaler is None:
        scaler = Scaler(np.zeros(n_features), np.ones(n_features))
    return KanModel(
        layers=layers,
        scaler=scaler,
        threshold_tau=threshold_tau,
        scenario_id=scenario_id,
        feature_names=list(feature_names or []),
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def forward_batch(model: KanModel, X_raw: np.ndarray, with_grad: bool = False):
    """Vectorized forward pass over raw (mm) feature rows.

    Returns (probs, activations, clamped_inputs, caches): activations[0]
    is the normalized input, activations[-1] the pre-squash scalar column.
    """
    Xn = model.scaler.apply(np.asarray(X_raw, dtype=float))
    activations = [Xn]
    caches = []
    clamped0 = None
    out = Xn
    for idx, layer in enumerate(model.layers):
        lo, hi = layer.kv.extended_span
        if idx == 0:
            clamped0 = (out < lo) | (out > hi)
        out, cache = _layer_forward_batch(layer, out, with_grad)
        if not np.all(np.isfinite(out)):
            raise FloatingPointError("non-finite activation: training diverged")
        caches.append(cache)
        activations.append(out)
    probs = _sigmoid(out[:, 0])
    return probs, activations, clamped0, caches


def forward(model: KanModel, raw_x) -> tuple[float, list[np.ndarray], bool]:
    """Single-design forward: returns (probability, per-layer activations,
    whether any input feature was clamped into its spline span)."""
    if isinstance(raw_x, DesignRecord):
        if raw_x.scenario_id != model.scenario_id:
            raise ValueError(
                f"record scenario {raw_x.scenario_id!r} does not match model "
                f"{model.scenario_id!r}"
            )
        schema = get_schema(model.scenario_id)
        problems = schema.validate_values(raw_x.values, check_range=False)
        if problems:
            raise ValueError("; ".join(problems))
        x = raw_x.as_vector(schema)
    else:
        x = np.asarray(raw_x, dtype=float)
    if x.shape != (model.n_features,):
        raise ValueError(f"expected {model.n_features} features, got {x.shape}")
    probs, activations, clamped, _ = forward_batch(model, x[None, :])
    return float(probs[0]), [a[0] for a in activations], bool(clamped.any())


def classify(prob: float, tau: float) -> int:
    """Inclusive threshold rule: manufacturable (1) when prob >= tau."""
    if not 0.0 <= prob <= 1.0:
        raise ValueError("prob must be in [0, 1]")
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must be in (0, 1)")
    return 1 if prob >= tau else 0


def latent(model: KanModel, raw_x) -> tuple[float, float]:
    """The two penultimate-layer activations used as a learned 2-D
    projection of the design space."""
    if len(model.layers) < 2 or model.layers[-1].d_in != 2:
        raise ValueError("latent extraction needs a 2-wide penultimate layer")
    _, activations, _ = forward(model, raw_x)
    u, v = activations[-2]
    return float(u), float(v)


def regularizer(model: KanModel) -> float:
    """Mean of squared spline coefficients across the whole model."""
    total = sum(float(np.sum(l.coef**2)) for l in model.layers)
    return total / model.coefficient_count()


def bce_loss(model: KanModel, X_raw, y, lam: float = 0.0) -> float:
    """Mean binary cross-entropy plus lam * mean squared coefficient."""
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise ValueError("empty batch")
    probs, _, _, _ = forward_batch(model, X_raw)
    p = np.clip(probs, LOG_CLIP, 1.0 - LOG_CLIP)
    data = -np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    return float(data + lam * regularizer(model))


@dataclass
class GradientSet:
    """Per-layer coefficient gradients mirroring the model layout."""

    tensors: list[np.ndarray]

    def __post_init__(self) -> None:
        for t in self.tensors:
            if not np.all(np.isfinite(t)):
                raise FloatingPointError("non-finite gradient: training diverged")

    def flat(self) -> np.ndarray:
        return np.concatenate([t.ravel() for t in self.tensors])


def backward(model: KanModel, X_raw, y, lam: float = 0.0) -> GradientSet:
    """Exact gradient of ``bce_loss`` w.r.t. every spline coefficient.

    Chain rule through the layer stack: the BCE/logistic pair contributes
    (p - y)/N at the output scalar; each layer maps its incoming delta to
    coefficient gradients (delta x basis) and to the previous layer's
    delta (delta x coef x basis'), zeroed where inputs were clamped.
    """
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise ValueError("empty batch")
    probs, activations, _, caches = forward_batch(model, X_raw, with_grad=True)
    n = len(y)
    delta = ((probs - y) / n)[:, None]  # (N, 1)
    total = model.coefficient_count()
    grads: list[np.ndarray] = [None] * len(model.layers)
    for idx in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[idx]
        cache = caches[idx]
        g = np.einsum("no,nim->iom", delta, cache["basis"])
        g += (2.0 * lam / total) * layer.coef
        grads[idx] = g
        if idx > 0:
            dphi = np.einsum("no,iom,nim->ni", delta, layer.coef, cache["dbasis"])
            delta = dphi * caches[idx]["mask"]
    return GradientSet(grads)


# ---------------------------------------------------------------------------
# Serialization: versioned JSON with explicit coefficient ordering
# (layer-major, then input index, then output index, then basis index)
# and a sha256 content checksum.
# ---------------------------------------------------------------------------

def _payload(model: KanModel) -> dict:
    first = model.layers[0].kv
    return {
        "format_version": FORMAT_VERSION,
        "scenario_id": model.scenario_id,
        "feature_names": list(model.feature_names),
        "scaler": {
            "mins": model.scaler.mins.tolist(),
            "maxs": model.scaler.maxs.tolist(),
        },
        "spline": {"grid": first.grid_size, "k": first.order_k},
        "layers": [
            {
                "d_in": l.d_in,
                "d_out": l.d_out,
                "knots": l.kv.knots.tolist(),
                "coefficients": l.coef.ravel().tolist(),
            }
            for l in model.layers
        ],
        "threshold_tau": model.threshold_tau,
    }


def _checksum(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def save_model(model: KanModel, path: str | Path) -> None:
    payload = _payload(model)
    payload["checksum"] = _checksum({k: v for k, v in payload.items()})
    Path(path).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> KanModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ValueError(f"malformed model file {path}: {exc}") from exc
    if not isinstance(payload, dict) or "format_version" not in payload:
        raise ValueError(f"malformed model file {path}: missing format_version")
    if payload["format_version"] != FORMAT_VERSION:
        raise ValueError(
            f"model format version {payload['format_version']} unsupported "
            f"(expected {FORMAT_VERSION})"
        )
    stored = payload.pop("checksum", None)
    if stored is None or stored != _checksum(payload):
        raise ValueError(f"checksum failure: model file {path} corrupted")
    spline = payload["spline"]
    layers = []
    for spec in payload["layers"]:
        kv = KnotVector(
            knots=np.array(spec["knots"]),
            order_k=spline["k"],
            grid_size=spline["grid"],
        )
        coef = np.array(spec["coefficients"]).reshape(
            spec["d_in"], spec["d_out"], kv.n_basis
        )
        layers.append(KanLayer(kv, coef))
    names = payload["feature_names"]
    if names and len(names) != layers[0].d_in:
        raise ValueError(
            f"schema mismatch: {len(names)} feature names vs layer-0 width "
            f"{layers[0].d_in}"
        )
    scaler = Scaler(
        np.array(payload["scaler"]["mins"]), np.array(payload["scaler"]["maxs"])
    )
    return KanModel(
        layers=layers,
        scaler=scaler,
        threshold_tau=payload["threshold_tau"],
        scenario_id=payload["scenario_id"],
        feature_names=names,
    )


def model_checksum(model: KanModel) -> str:
    return _checksum(_payload(model))
