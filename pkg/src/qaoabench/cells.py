"""Recurrent optimizer cells: a QLSTM built from six VQC gates and a
classical LSTM baseline, plus the residual parameter-update step.

Both cells consume x = [theta (2p entries); normalized cost (1 entry)] with
hidden size 2p, and emit a bounded update direction y in [-1, 1]^{2p} which
the residual step scales by alpha.  The QLSTM's four gate circuits act on a
wide register of 1 + 4p qubits (hidden state concatenated with the input);
the two readout circuits act on a narrow 2p-qubit register.

Backward passes are exact (adjoint through every circuit) and return
gradients for the trainable parameters and for (h_prev, c_prev, x), which is
what backpropagation through an unrolled episode needs.  Training operates
on the flat vector from ``to_vector``, where alpha is carried as log(alpha)
so unconstrained updates keep every entry positive.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .problems import IsingInstance
from .vqc import VqcConfig, VqcParams, vqc_backward, vqc_forward

CHECKPOINT_VERSION = 1
DEFAULT_ALPHA = np.pi / 2
DEFAULT_VQC_LAYERS = 2


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


@dataclass
class CellState:
    """Hidden and cell vectors, both of length 2p."""

    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden_size: int) -> "CellState":
        return cls(np.zeros(hidden_size), np.zeros(hidden_size))


def lstm_gate_core(raw_f, raw_i, raw_c, raw_o, c_prev):
    """Shared gate composition: sigmoid/tanh nonlinearities and the cell update.

    Returns (f, i, c_tilde, c_new, o).  Used by both cells and by test
    doubles that swap the gate circuits for identity maps.
    """
    f = sigmoid(raw_f)
    i = sigmoid(raw_i)
    c_tilde = np.tanh(raw_c)
    c_new = f * c_prev + i * c_tilde
    o = sigmoid(raw_o)
    return f, i, c_tilde, c_new, o


@dataclass
class QlstmWeights:
    """Parameters of the six gate circuits plus the update-scale vector."""

    p: int
    vqc_layers: int
    gate_params: list[VqcParams]  # four wide gates, then two narrow readouts
    alpha: np.ndarray
    seed: int | None = None

    kind = "qlstm"

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float)
        if self.alpha.shape != (self.hidden_size,):
            raise ValueError(f"alpha must have length {self.hidden_size}")
        if np.any(self.alpha <= 0):
            raise ValueError("alpha entries must be positive")
        if len(self.gate_params) != 6:
            raise ValueError("expected six gate-circuit parameter sets")
        for k, params in enumerate(self.gate_params):
            cfg = self.wide_config if k < 4 else self.narrow_config
            want = (self.vqc_layers, cfg.num_qubits, 3)
            if params.angles.shape != want:
                raise ValueError(f"gate {k + 1} angles have shape {params.angles.shape}, want {want}")

    @property
    def input_size(self) -> int:
        return 1 + 2 * self.p

    @property
    def hidden_size(self) -> int:
        return 2 * self.p

    @property
    def wide_config(self) -> VqcConfig:
        return VqcConfig(self.input_size + self.hidden_size, self.vqc_layers, self.hidden_size)

    @property
    def narrow_config(self) -> VqcConfig:
        return VqcConfig(self.hidden_size, self.vqc_layers, self.hidden_size)

    @classmethod
    def init(cls, p: int, seed: int, vqc_layers: int = DEFAULT_VQC_LAYERS) -> "QlstmWeights":
        rng = np.random.default_rng(seed)
        wide = VqcConfig(1 + 4 * p, vqc_layers, 2 * p)
        narrow = VqcConfig(2 * p, vqc_layers, 2 * p)
        gate_params = [VqcParams.init(wide, rng) for _ in range(4)]
        gate_params += [VqcParams.init(narrow, rng) for _ in range(2)]
        return cls(p, vqc_layers, gate_params, np.full(2 * p, DEFAULT_ALPHA), seed=seed)

    def cell_forward(self, state: CellState, x: np.ndarray):
        """One cell step; returns (new_state, y_out, cache)."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.input_size,):
            raise ValueError(f"cell input has shape {x.shape}, expected ({self.input_size},)")
        wide, narrow = self.wide_config, self.narrow_config
        v = np.concatenate([state.h, x])
        raws = [vqc_forward(wide, self.gate_params[k], v) for k in range(4)]
        f, i, c_tilde, c_new, o = lstm_gate_core(*raws, state.c)
        tc = np.tanh(c_new)
        u = o * tc
        h_new = vqc_forward(narrow, self.gate_params[4], u)
        y_out = vqc_forward(narrow, self.gate_params[5], u)
        cache = {
            "v": v, "raws": raws, "f": f, "i": i, "c_tilde": c_tilde,
            "c_prev": state.c, "c_new": c_new, "tc": tc, "o": o, "u": u,
        }
        return CellState(h_new, c_new), y_out, cache

    def cell_backward(self, cache, grad_h, grad_c, grad_y):
        """Reverse one cell step.

        Returns (flat gradient over the six circuits' angles, grad_h_prev,
        grad_c_prev, grad_x).
        """
        wide, narrow = self.wide_config, self.narrow_config
        u, o, tc = cache["u"], cache["o"], cache["tc"]
        gp6, gu6 = vqc_backward(narrow, self.gate_params[5], u, grad_y)
        gp5, gu5 = vqc_backward(narrow, self.gate_params[4], u, grad_h)
        gu = gu5 + gu6
        go = gu * tc
        gc_total = grad_c + gu * o * (1.0 - tc * tc)
        f, i, c_tilde = cache["f"], cache["i"], cache["c_tilde"]
        gf = gc_total * cache["c_prev"]
        gi = gc_total * c_tilde
        gct = gc_total * i
        grad_c_prev = gc_total * f
        graws = [
            gf * f * (1.0 - f),
            gi * i * (1.0 - i),
            gct * (1.0 - c_tilde * c_tilde),
            go * o * (1.0 - o),
        ]
        v = cache["v"]
        grad_v = np.zeros_like(v)
        gate_grads = []
        for k in range(4):
            gp, gv = vqc_backward(wide, self.gate_params[k], v, graws[k])
            gate_grads.append(gp.ravel())
            grad_v += gv
        gate_grads += [gp5.ravel(), gp6.ravel()]
        grad_h_prev = grad_v[: self.hidden_size]
        grad_x = grad_v[self.hidden_size :]
        return np.concatenate(gate_grads), grad_h_prev, grad_c_prev, grad_x

    def num_cell_params(self) -> int:
        return sum(p.angles.size for p in self.gate_params)

    def to_vector(self) -> np.ndarray:
        """Flat trainable vector: six angle blocks then log(alpha)."""
        blocks = [p.angles.ravel() for p in self.gate_params]
        blocks.append(np.log(self.alpha))
        return np.concatenate(blocks)

    def with_vector(self, vec: np.ndarray) -> "QlstmWeights":
        vec = np.asarray(vec, dtype=float)
        params = []
        pos = 0
        for k in range(6):
            shape = self.gate_params[k].angles.shape
            size = self.gate_params[k].angles.size
            params.append(VqcParams(vec[pos : pos + size].reshape(shape).copy()))
            pos += size
        alpha = np.exp(vec[pos : pos + self.hidden_size])
        return QlstmWeights(self.p, self.vqc_layers, params, alpha, seed=self.seed)


@dataclass
class LstmWeights:
    """Standard LSTM gate matrices over [h, x], an affine tanh output head,
    and the same update-scale vector as the quantum cell."""

    p: int
    w_f: np.ndarray
    w_i: np.ndarray
    w_c: np.ndarray
    w_o: np.ndarray
    b_f: np.ndarray
    b_i: np.ndarray
    b_c: np.ndarray
    b_o: np.ndarray
    w_y: np.ndarray
    b_y: np.ndarray
    alpha: np.ndarray
    seed: int | None = None

    kind = "lstm"

    def __post_init__(self):
        hid, inp = self.hidden_size, self.input_size
        for name in ("w_f", "w_i", "w_c", "w_o"):
            if getattr(self, name).shape != (hid, hid + inp):
                raise ValueError(f"{name} must have shape ({hid}, {hid + inp})")
        for name in ("b_f", "b_i", "b_c", "b_o"):
            if getattr(self, name).shape != (hid,):
                raise ValueError(f"{name} must have length {hid}")
        if self.w_y.shape != (2 * self.p, hid):
            raise ValueError(f"w_y must have shape ({2 * self.p}, {hid})")
        if self.b_y.shape != (2 * self.p,):
            raise ValueError(f"b_y must have length {2 * self.p}")
        self.alpha = np.asarray(self.alpha, dtype=float)
        if np.any(self.alpha <= 0):
            raise ValueError("alpha entries must be positive")

    @property
    def input_size(self) -> int:
        return 1 + 2 * self.p

    @property
    def hidden_size(self) -> int:
        return 2 * self.p

    @classmethod
    def init(cls, p: int, seed: int, scale: float = 0.1) -> "LstmWeights":
        # biases are drawn too: the episode input at step 0 is all zeros, and a
        # zero-bias cell would emit exactly zero forever (a stuck stationary
        # point of the meta-objective)
        rng = np.random.default_rng(seed)
        hid = 2 * p
        dim = hid + 1 + 2 * p
        mats = [rng.uniform(-scale, scale, size=(hid, dim)) for _ in range(4)]
        biases = [rng.uniform(-scale, scale, size=hid) for _ in range(4)]
        w_y = rng.uniform(-scale, scale, size=(2 * p, hid))
        b_y = rng.uniform(-scale, scale, size=2 * p)
        return cls(
            p, *mats, *biases,
            w_y, b_y, np.full(2 * p, DEFAULT_ALPHA), seed=seed,
        )

    def cell_forward(self, state: CellState, x: np.ndarray):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.input_size,):
            raise ValueError(f"cell input has shape {x.shape}, expected ({self.input_size},)")
        v = np.concatenate([state.h, x])
        raws = [w @ v + b for w, b in (
            (self.w_f, self.b_f), (self.w_i, self.b_i),
            (self.w_c, self.b_c), (self.w_o, self.b_o),
        )]
        f, i, c_tilde, c_new, o = lstm_gate_core(*raws, state.c)
        tc = np.tanh(c_new)
        h_new = o * tc
        y_pre = self.w_y @ h_new + self.b_y
        y_out = np.tanh(y_pre)
        cache = {
            "v": v, "f": f, "i": i, "c_tilde": c_tilde, "c_prev": state.c,
            "c_new": c_new, "tc": tc, "o": o, "h_new": h_new, "y_out": y_out,
        }
        return CellState(h_new, c_new), y_out, cache

    def cell_backward(self, cache, grad_h, grad_c, grad_y):
        v, o, tc = cache["v"], cache["o"], cache["tc"]
        y_out = cache["y_out"]
        gy_pre = grad_y * (1.0 - y_out * y_out)
        g_wy = np.outer(gy_pre, cache["h_new"])
        g_by = gy_pre
        gh_total = grad_h + self.w_y.T @ gy_pre
        go = gh_total * tc
        gc_total = grad_c + gh_total * o * (1.0 - tc * tc)
        f, i, c_tilde = cache["f"], cache["i"], cache["c_tilde"]
        gf = gc_total * cache["c_prev"]
        gi = gc_total * c_tilde
        gct = gc_total * i
        grad_c_prev = gc_total * f
        graws = [
            gf * f * (1.0 - f),
            gi * i * (1.0 - i),
            gct * (1.0 - c_tilde * c_tilde),
            go * o * (1.0 - o),
        ]
        grad_v = np.zeros_like(v)
        blocks = []
        for graw, w in zip(graws, (self.w_f, self.w_i, self.w_c, self.w_o)):
            blocks.append(np.outer(graw, v).ravel())
            grad_v += w.T @ graw
        blocks += [g.ravel() for g in graws]        # bias gradients
        blocks += [g_wy.ravel(), g_by.ravel()]
        grad_h_prev = grad_v[: self.hidden_size]
        grad_x = grad_v[self.hidden_size :]
        return np.concatenate(blocks), grad_h_prev, grad_c_prev, grad_x

    def num_cell_params(self) -> int:
        return sum(
            m.size
            for m in (self.w_f, self.w_i, self.w_c, self.w_o,
                      self.b_f, self.b_i, self.b_c, self.b_o, self.w_y, self.b_y)
        )

    def to_vector(self) -> np.ndarray:
        blocks = [
            self.w_f.ravel(), self.w_i.ravel(), self.w_c.ravel(), self.w_o.ravel(),
            self.b_f, self.b_i, self.b_c, self.b_o,
            self.w_y.ravel(), self.b_y, np.log(self.alpha),
        ]
        return np.concatenate(blocks)

    def with_vector(self, vec: np.ndarray) -> "LstmWeights":
        vec = np.asarray(vec, dtype=float)
        hid, inp = self.hidden_size, self.input_size
        dim = hid + inp
        pos = 0

        def take(shape):
            nonlocal pos
            size = int(np.prod(shape))
            block = vec[pos : pos + size].reshape(shape).copy()
            pos += size
            return block

        mats = [take((hid, dim)) for _ in range(4)]
        biases = [take((hid,)) for _ in range(4)]
        w_y = take((2 * self.p, hid))
        b_y = take((2 * self.p,))
        alpha = np.exp(take((hid,)))
        return LstmWeights(self.p, *mats, *biases, w_y, b_y, alpha, seed=self.seed)


def qlstm_cell_forward(w: QlstmWeights, state: CellState, x: np.ndarray):
    """One QLSTM step; returns (new_state, y_out)."""
    new_state, y_out, _cache = w.cell_forward(state, x)
    return new_state, y_out


def lstm_cell_forward(w: LstmWeights, state: CellState, x: np.ndarray):
    """One classical LSTM step; returns (new_state, y_out)."""
    new_state, y_out, _cache = w.cell_forward(state, x)
    return new_state, y_out


def propose_params(theta: np.ndarray, y_out: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Residual update theta + alpha * y_out."""
    theta = np.asarray(theta, dtype=float)
    y_out = np.asarray(y_out, dtype=float)
    if theta.shape != y_out.shape or theta.shape != np.shape(alpha):
        raise ValueError("theta, y_out and alpha must share one shape")
    return theta + np.asarray(alpha) * y_out


def normalize_cost(raw_cost: float, instance: IsingInstance) -> float:
    """Scale a raw <H_C> by sum|J| so the cell input lives in [-1, 1]."""
    norm = instance.normalizer
    if norm <= 0:
        raise ValueError("instance has zero coupling weight; cost cannot be normalized")
    return raw_cost / norm


def save_weights(weights, path, meta_iter: int | None = None, adam_state: dict | None = None):
    """Write a JSON checkpoint; float round-trip is bit-exact."""
    data = {
        "version": CHECKPOINT_VERSION,
        "kind": weights.kind,
        "p": weights.p,
        "alpha": weights.alpha.tolist(),
        "seed": weights.seed,
    }
    if weights.kind == "qlstm":
        data["vqc_layers"] = weights.vqc_layers
        data["vqc_params"] = [params.angles.tolist() for params in weights.gate_params]
    else:
        data["lstm"] = {
            name: getattr(weights, name).tolist()
            for name in ("w_f", "w_i", "w_c", "w_o", "b_f", "b_i", "b_c", "b_o", "w_y", "b_y")
        }
    if meta_iter is not None:
        data["meta_iter"] = meta_iter
    if adam_state is not None:
        data["adam_state"] = {
            "m": np.asarray(adam_state["m"]).tolist(),
            "v": np.asarray(adam_state["v"]).tolist(),
            "t": int(adam_state["t"]),
        }
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def load_weights(path):
    """Read a checkpoint; returns (weights, extras) with resume bookkeeping."""
    data = json.loads(Path(path).read_text())
    if data.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {data.get('version')}")
    p = int(data["p"])
    alpha = np.asarray(data["alpha"], dtype=float)
    if data["kind"] == "qlstm":
        gate_params = [VqcParams(np.asarray(a, dtype=float)) for a in data["vqc_params"]]
        weights = QlstmWeights(p, int(data["vqc_layers"]), gate_params, alpha, seed=data.get("seed"))
    elif data["kind"] == "lstm":
        blob = data["lstm"]
        weights = LstmWeights(
            p,
            *[np.asarray(blob[k], dtype=float) for k in ("w_f", "w_i", "w_c", "w_o")],
            *[np.asarray(blob[k], dtype=float) for k in ("b_f", "b_i", "b_c", "b_o")],
            np.asarray(blob["w_y"], dtype=float),
            np.asarray(blob["b_y"], dtype=float),
            alpha,
            seed=data.get("seed"),
        )
    else:
        raise ValueError(f"unknown checkpoint kind {data.get('kind')!r}")
    extras = {
        "meta_iter": data.get("meta_iter"),
        "adam_state": (
            {
                "m": np.asarray(data["adam_state"]["m"], dtype=float),
                "v": np.asarray(data["adam_state"]["v"], dtype=float),
                "t": int(data["adam_state"]["t"]),
            }
            if "adam_state" in data
            else None
        ),
    }
    return weights, extras
