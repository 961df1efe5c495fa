"""Action prediction: feature encoding, a from-scratch LSTM trained with
backpropagation through time, and a history-free logistic baseline.

Each game is one training sequence; the model emits a go-probability per
round.  Round-t features combine the shown review's oracle distribution
with the DM's own history strictly before t, so everything is available
at prediction time and nothing leaks the current round's quality.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .dataset import InteractionDataset
from .game_core import GameConfig, GameRecord
from .sentiment import ScoreDistribution

EXPERT_FEATURE_ORDER = (
    "greedy",
    "average",
    "honest",
    "ambiguous",
    "choice_adaptive",
    "points_adaptive",
)

FEATURE_NAMES = (
    "oracle_expected_score",
    "oracle_go_mass",
    "round_frac",
    "game_offset",
    "prev_action",
    "prev_payoff",
    "points_frac",
) + tuple(f"expert_{name}" for name in EXPERT_FEATURE_ORDER)

FEATURE_DIM = len(FEATURE_NAMES)

# Indices of the review-only features; the history-free baseline sees
# nothing else.
REVIEW_FEATURE_SLICE = slice(0, 2)

OracleTable = Mapping[tuple[str, int], ScoreDistribution]


class PredictorError(RuntimeError):
    pass


class TrainingDiverged(PredictorError):
    """Loss became non-finite during training."""


def encode_game(
    game: GameRecord, oracle_table: OracleTable, config: GameConfig
) -> tuple[np.ndarray, np.ndarray]:
    """(features, labels) for one game: (T, FEATURE_DIM) and (T,)."""
    T = len(game.rounds)
    tau = config.quality_threshold_tau
    expert_onehot = np.zeros(len(EXPERT_FEATURE_ORDER))
    try:
        expert_onehot[EXPERT_FEATURE_ORDER.index(game.expert_strategy)] = 1.0
    except ValueError as exc:
        raise PredictorError(f"unknown expert strategy {game.expert_strategy!r}") from exc

    X = np.zeros((T, FEATURE_DIM))
    y = np.zeros(T)
    points = 0
    prev_action = 0
    prev_payoff = 0
    for t, record in enumerate(game.rounds, start=1):
        key = (record.hotel_id, record.shown_review_index)
        if key not in oracle_table:
            raise PredictorError(f"oracle table has no entry for review {key}")
        dist = oracle_table[key]
        X[t - 1, :7] = (
            dist.expected_score(),
            dist.mass_at_or_above(tau),
            t / config.rounds_T,
            game.game_index - 1,
            prev_action,
            prev_payoff,
            points / config.rounds_T,
        )
        X[t - 1, 7:] = expert_onehot
        y[t - 1] = record.dm_action_a
        points += record.dm_payoff_v
        prev_action = record.dm_action_a
        prev_payoff = record.dm_payoff_v
    return X, y


def encode_dataset(
    dataset: InteractionDataset, oracle_table: OracleTable, config: GameConfig
) -> tuple[np.ndarray, np.ndarray, list[tuple[str, str]]]:
    """Stacked per-game sequences plus the (dm_id, expert) tag of each."""
    if not dataset.games:
        raise PredictorError("dataset is empty")
    xs, ys, tags = [], [], []
    for game in dataset.games:
        X, y = encode_game(game, oracle_table, config)
        xs.append(X)
        ys.append(y)
        tags.append((game.dm_id, game.expert_strategy))
    return np.stack(xs), np.stack(ys), tags


# --- LSTM ---------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 4e-4
    epochs: int = 20
    batch_size: int = 32
    seed: int = 0
    hidden_dim: int = 64
    n_layers: int = 2

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class LstmModel:
    """Input projection -> stacked LSTM layers -> sigmoid head.

    Parameter arrays (gate row order i, f, g, o):
      w_in (P, D), b_in (P,), and per layer l: wx{l} (4H, in), wh{l} (4H, H),
      b{l} (4H,); head w_out (H,), b_out (1,).  P equals the hidden width.
    """

    input_dim: int
    hidden_dim: int
    n_layers: int
    params: dict[str, np.ndarray]

    def param_names(self) -> list[str]:
        names = ["w_in", "b_in"]
        for layer in range(self.n_layers):
            names += [f"wx{layer}", f"wh{layer}", f"b{layer}"]
        return names + ["w_out", "b_out"]


def init_lstm(
    input_dim: int,
    hidden_dim: int = 64,
    n_layers: int = 2,
    rng: Optional[np.random.Generator] = None,
) -> LstmModel:
    rng = rng or np.random.default_rng()
    k = 1.0 / np.sqrt(hidden_dim)
    H = hidden_dim

    def u(*shape):
        return rng.uniform(-k, k, size=shape)

    params: dict[str, np.ndarray] = {"w_in": u(H, input_dim), "b_in": u(H)}
    for layer in range(n_layers):
        params[f"wx{layer}"] = u(4 * H, H)
        params[f"wh{layer}"] = u(4 * H, H)
        b = u(4 * H)
        b[H : 2 * H] += 1.0  # forget-gate bias starts open
        params[f"b{layer}"] = b
    params["w_out"] = u(H)
    params["b_out"] = u(1)
    return LstmModel(input_dim, hidden_dim, n_layers, params)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _lstm_forward_full(model: LstmModel, x: np.ndarray):
    """Forward pass keeping every intermediate needed for backprop.

    x is (B, T, D); returns (probs (B, T), cache).
    """
    B, T, D = x.shape
    H = model.hidden_dim
    p = model.params
    proj = x @ p["w_in"].T + p["b_in"]  # (B, T, H)

    layer_caches = []
    layer_input = proj
    for layer in range(model.n_layers):
        wx, wh, b = p[f"wx{layer}"], p[f"wh{layer}"], p[f"b{layer}"]
        h = np.zeros((B, H))
        c = np.zeros((B, H))
        gates_i = np.zeros((B, T, H))
        gates_f = np.zeros((B, T, H))
        gates_g = np.zeros((B, T, H))
        gates_o = np.zeros((B, T, H))
        cells = np.zeros((B, T, H))
        tanh_cells = np.zeros((B, T, H))
        hs = np.zeros((B, T, H))
        for t in range(T):
            z = layer_input[:, t] @ wx.T + h @ wh.T + b
            gi = _sigmoid(z[:, :H])
            gf = _sigmoid(z[:, H : 2 * H])
            gg = np.tanh(z[:, 2 * H : 3 * H])
            go = _sigmoid(z[:, 3 * H :])
            c = gf * c + gi * gg
            tc = np.tanh(c)
            h = go * tc
            gates_i[:, t] = gi
            gates_f[:, t] = gf
            gates_g[:, t] = gg
            gates_o[:, t] = go
            cells[:, t] = c
            tanh_cells[:, t] = tc
            hs[:, t] = h
        layer_caches.append(
            {
                "input": layer_input,
                "i": gates_i,
                "f": gates_f,
                "g": gates_g,
                "o": gates_o,
                "c": cells,
                "tc": tanh_cells,
                "h": hs,
            }
        )
        layer_input = hs

    logits = layer_input @ p["w_out"] + p["b_out"][0]  # (B, T)
    probs = _sigmoid(logits)
    cache = {"x": x, "proj": proj, "layers": layer_caches, "probs": probs}
    return probs, cache


def lstm_forward(model: LstmModel, x: np.ndarray) -> np.ndarray:
    """Per-round go probabilities for sequences x of shape (B, T, D) (a
    single (T, D) sequence is also accepted)."""
    single = x.ndim == 2
    if single:
        x = x[None]
    if x.shape[2] != model.input_dim:
        raise PredictorError(
            f"input feature dim {x.shape[2]} != model input dim {model.input_dim}"
        )
    probs, _ = _lstm_forward_full(model, x)
    return probs[0] if single else probs


def bce_loss(probs: np.ndarray, y: np.ndarray) -> float:
    p = np.clip(probs, 1e-12, 1.0 - 1e-12)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def lstm_loss_and_gradient(
    model: LstmModel, x: np.ndarray, y: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean binary cross-entropy over all rounds in the batch and its exact
    gradient with respect to every parameter."""
    if x.ndim != 3:
        raise PredictorError("batch must be (B, T, D)")
    B, T, _ = x.shape
    H = model.hidden_dim
    p = model.params
    probs, cache = _lstm_forward_full(model, x)
    loss = bce_loss(probs, y)

    grads = {name: np.zeros_like(p[name]) for name in model.param_names()}
    dlogits = (probs - y) / (B * T)  # (B, T)

    top_h = cache["layers"][-1]["h"]
    grads["w_out"] = np.einsum("bt,bth->h", dlogits, top_h)
    grads["b_out"] = np.array([dlogits.sum()])
    d_h_seq = dlogits[:, :, None] * p["w_out"]  # (B, T, H)

    for layer in reversed(range(model.n_layers)):
        lc = cache["layers"][layer]
        wx, wh = p[f"wx{layer}"], p[f"wh{layer}"]
        d_input = np.zeros_like(lc["input"])
        dh_next = np.zeros((B, H))
        dc_next = np.zeros((B, H))
        dwx = np.zeros_like(wx)
        dwh = np.zeros_like(wh)
        db = np.zeros(4 * H)
        for t in reversed(range(T)):
            gi, gf, gg, go = lc["i"][:, t], lc["f"][:, t], lc["g"][:, t], lc["o"][:, t]
            tc = lc["tc"][:, t]
            c_prev = lc["c"][:, t - 1] if t > 0 else np.zeros((B, H))
            h_prev = lc["h"][:, t - 1] if t > 0 else np.zeros((B, H))

            dh = d_h_seq[:, t] + dh_next
            do = dh * tc
            dc = dc_next + dh * go * (1.0 - tc**2)
            di = dc * gg
            df = dc * c_prev
            dg = dc * gi
            dc_next = dc * gf

            dz = np.concatenate(
                [
                    di * gi * (1.0 - gi),
                    df * gf * (1.0 - gf),
                    dg * (1.0 - gg**2),
                    do * go * (1.0 - go),
                ],
                axis=1,
            )  # (B, 4H)
            dwx += dz.T @ lc["input"][:, t]
            dwh += dz.T @ h_prev
            db += dz.sum(axis=0)
            d_input[:, t] = dz @ wx
            dh_next = dz @ wh
        grads[f"wx{layer}"] = dwx
        grads[f"wh{layer}"] = dwh
        grads[f"b{layer}"] = db
        d_h_seq = d_input

    # d_h_seq is now the gradient wrt the projection output
    grads["w_in"] = np.einsum("bth,btd->hd", d_h_seq, cache["x"])
    grads["b_in"] = d_h_seq.sum(axis=(0, 1))
    return loss, grads


# --- Adam ---------------------------------------------------------------


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0


def adam_init(params: dict[str, np.ndarray]) -> AdamState:
    return AdamState(
        m={k: np.zeros_like(a) for k, a in params.items()},
        v={k: np.zeros_like(a) for k, a in params.items()},
    )


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    state.step += 1
    t = state.step
    for name, g in grads.items():
        state.m[name] = beta1 * state.m[name] + (1.0 - beta1) * g
        state.v[name] = beta2 * state.v[name] + (1.0 - beta2) * g * g
        m_hat = state.m[name] / (1.0 - beta1**t)
        v_hat = state.v[name] / (1.0 - beta2**t)
        params[name] -= lr * m_hat / (np.sqrt(v_hat) + eps)


def train_lstm(
    X: np.ndarray, y: np.ndarray, config: TrainConfig
) -> tuple[LstmModel, list[float]]:
    """Train on sequences X (N, T, D) with labels y (N, T); returns the
    model and the per-epoch mean loss curve.  Deterministic given the data
    order and seed."""
    if X.ndim != 3 or len(X) == 0:
        raise PredictorError("training data must be non-empty (N, T, D)")
    rng = np.random.default_rng(config.seed)
    model = init_lstm(X.shape[2], config.hidden_dim, config.n_layers, rng)
    state = adam_init(model.params)
    curve: list[float] = []
    n = len(X)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, grads = lstm_loss_and_gradient(model, X[idx], y[idx])
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch} batch {start // config.batch_size}"
                )
            adam_step(model.params, grads, state, config.learning_rate)
            losses.append(loss)
        curve.append(float(np.mean(losses)))
    return model, curve


# --- history-free logistic baseline ---------------------------------------


@dataclass
class BaselineModel:
    """Logistic model over the current round's review features only."""

    weights: np.ndarray  # (n_features + 1,), last entry is the bias

    @property
    def n_features(self) -> int:
        return len(self.weights) - 1


def baseline_features(X: np.ndarray) -> np.ndarray:
    """Review-only feature matrix from encoded sequences (N, T, D)."""
    flat = X.reshape(-1, X.shape[-1]) if X.ndim == 3 else X
    return flat[:, REVIEW_FEATURE_SLICE]


def baseline_predict(model: BaselineModel, features: np.ndarray) -> np.ndarray:
    return _sigmoid(features @ model.weights[:-1] + model.weights[-1])


def train_baseline(
    features: np.ndarray, y: np.ndarray, n_iters: int = 2000, lr: float = 0.05
) -> BaselineModel:
    """Full-batch Adam on the convex logistic loss; zero init, so the fit
    is deterministic with no seed."""
    n, d = features.shape
    params = {"w": np.zeros(d), "b": np.zeros(1)}
    state = adam_init(params)
    labels = y.reshape(-1)
    for _ in range(n_iters):
        p = _sigmoid(features @ params["w"] + params["b"][0])
        err = (p - labels) / n
        grads = {"w": features.T @ err, "b": np.array([err.sum()])}
        adam_step(params, grads, state, lr)
    return BaselineModel(np.concatenate([params["w"], params["b"]]))


# --- high-level train / predict -------------------------------------------


def train_on_dataset(
    data: InteractionDataset,
    oracle_table: OracleTable,
    game_config: GameConfig,
    train_config: TrainConfig,
    kind: str = "lstm",
):
    """Train a predictor of the requested kind on an interaction dataset."""
    X, y, _ = encode_dataset(data, oracle_table, game_config)
    if kind == "lstm":
        model, _ = train_lstm(X, y, train_config)
        return model
    if kind == "baseline":
        return train_baseline(baseline_features(X), y.reshape(-1))
    raise PredictorError(f"unknown model kind {kind!r}")


def predict_dataset(
    model,
    data: InteractionDataset,
    oracle_table: OracleTable,
    game_config: GameConfig,
) -> tuple[np.ndarray, np.ndarray, list[tuple[str, str]]]:
    """Flat per-decision (probabilities, truths, (dm_id, expert) tags)."""
    X, y, game_tags = encode_dataset(data, oracle_table, game_config)
    if isinstance(model, LstmModel):
        probs = lstm_forward(model, X)
    elif isinstance(model, BaselineModel):
        probs = baseline_predict(model, baseline_features(X)).reshape(y.shape)
    else:
        raise PredictorError(f"cannot predict with {type(model).__name__}")
    T = y.shape[1]
    tags = [tag for tag in game_tags for _ in range(T)]
    return probs.reshape(-1), y.reshape(-1), tags


# --- serialization ----------------------------------------------------------

MODEL_FORMAT = "persuasim.model.v1"


def save_model(model, path: str) -> None:
    """Versioned hybrid format: one JSON header line with shapes, then the
    raw float64 little-endian array bytes in header order."""
    if isinstance(model, LstmModel):
        names = model.param_names()
        header = {
            "format": MODEL_FORMAT,
            "kind": "lstm",
            "input_dim": model.input_dim,
            "hidden_dim": model.hidden_dim,
            "n_layers": model.n_layers,
            "arrays": [{"name": n, "shape": list(model.params[n].shape)} for n in names],
        }
        arrays = [model.params[n] for n in names]
    elif isinstance(model, BaselineModel):
        header = {
            "format": MODEL_FORMAT,
            "kind": "baseline",
            "arrays": [{"name": "weights", "shape": list(model.weights.shape)}],
        }
        arrays = [model.weights]
    else:
        raise PredictorError(f"cannot save {type(model).__name__}")
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for arr in arrays:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path: str):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        if header.get("format") != MODEL_FORMAT:
            raise PredictorError(f"{path}: not a {MODEL_FORMAT} file")
        arrays: dict[str, np.ndarray] = {}
        for spec in header["arrays"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise PredictorError(f"{path}: truncated array {spec['name']}")
            arrays[spec["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
    if header["kind"] == "lstm":
        return LstmModel(
            input_dim=header["input_dim"],
            hidden_dim=header["hidden_dim"],
            n_layers=header["n_layers"],
            params=arrays,
        )
    if header["kind"] == "baseline":
        return BaselineModel(arrays["weights"])
    raise PredictorError(f"{path}: unknown model kind {header['kind']!r}")
