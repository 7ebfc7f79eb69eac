"""BNN model definitions, JSON persistence, random generation and input samples."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

PathLike = Union[str, Path]


class ModelError(ValueError):
    """A model or input file is malformed or violates an invariant."""


@dataclass(frozen=True)
class InternalBlock:
    """LIN -> BN -> BIN block.

    ``weights[j]`` is the ±1 row feeding output neuron ``j``.
    """

    weights: Tuple[Tuple[int, ...], ...]
    bias: Tuple[float, ...]
    bn_alpha: Tuple[float, ...]
    bn_gamma: Tuple[float, ...]
    bn_mu: Tuple[float, ...]
    bn_sigma: Tuple[float, ...]

    @property
    def input_width(self) -> int:
        return len(self.weights[0])

    @property
    def output_width(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class OutputBlock:
    """LIN -> ARGMAX block; ``weights[c]`` is the row scoring class ``c``."""

    weights: Tuple[Tuple[int, ...], ...]
    bias: Tuple[float, ...]

    @property
    def input_width(self) -> int:
        return len(self.weights[0])

    @property
    def num_classes(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class BnnModel:
    blocks: Tuple[InternalBlock, ...]
    output: OutputBlock

    def __post_init__(self):
        validate(self)

    @property
    def depth(self) -> int:
        return len(self.blocks)

    @property
    def input_width(self) -> int:
        return self.blocks[0].input_width

    @property
    def num_classes(self) -> int:
        return self.output.num_classes

    @property
    def widths(self) -> List[int]:
        """``[n_1, ..., n_{d+1}]``: the input width of every block."""
        return [b.input_width for b in self.blocks] + [self.output.input_width]

    @property
    def arch(self) -> str:
        return ":".join(str(w) for w in self.widths + [self.num_classes])


@dataclass(frozen=True)
class InputSample:
    """A binarized input; bit 1 stands for +1 and bit 0 for -1."""

    bits: Tuple[int, ...]

    def __len__(self):
        return len(self.bits)

    @classmethod
    def from_string(cls, text: str, width: int = None) -> "InputSample":
        bits = []
        pos = 0
        for ch in text:
            if ch.isspace():
                continue
            pos += 1
            if ch not in "01":
                raise ModelError(f"illegal character {ch!r} at position {pos}")
            bits.append(int(ch))
        if width is not None and len(bits) != width:
            raise ModelError(f"input has length {len(bits)}, expected {width}")
        return cls(tuple(bits))

    def __str__(self):
        return "".join(map(str, self.bits))


# ----------------------------------------------------------------------
# validation


def _check_weights(rows, where: str) -> None:
    if not rows:
        raise ModelError(f"{where}: weights must have at least one row")
    width = len(rows[0])
    if width == 0:
        raise ModelError(f"{where}: weight rows must be non-empty")
    for r, row in enumerate(rows):
        if len(row) != width:
            raise ModelError(
                f"{where}, row {r}: has {len(row)} entries, expected {width}"
            )
        for c, w in enumerate(row):
            if w not in (1, -1) or isinstance(w, bool):
                raise ModelError(f"{where}, row {r}, column {c}: weight {w!r} is not +1/-1")


def _check_vector(vec, length: int, name: str, where: str) -> None:
    if len(vec) != length:
        raise ModelError(f"{where}: {name} has length {len(vec)}, expected {length}")
    for i, x in enumerate(vec):
        if not math.isfinite(x):
            raise ModelError(f"{where}: {name}[{i}] is not finite")


def validate(model: BnnModel) -> None:
    if not model.blocks:
        raise ModelError("a model needs at least one internal block")
    prev = None
    for i, blk in enumerate(model.blocks):
        where = f"block {i}"
        _check_weights(blk.weights, where)
        n = blk.output_width
        for name in ("bias", "bn_alpha", "bn_gamma", "bn_mu", "bn_sigma"):
            _check_vector(getattr(blk, name), n, name, where)
        for j, (a, s) in enumerate(zip(blk.bn_alpha, blk.bn_sigma)):
            if a != 0 and s <= 0:
                raise ModelError(f"{where}: bn_sigma[{j}] = {s} must be positive")
        if prev is not None and blk.input_width != prev:
            raise ModelError(
                f"{where}: input width {blk.input_width} does not match "
                f"previous output width {prev}"
            )
        prev = n
    out = model.output
    where = f"block {len(model.blocks)} (output)"
    _check_weights(out.weights, where)
    if out.num_classes < 2:
        raise ModelError(f"{where}: needs at least 2 classes")
    _check_vector(out.bias, out.num_classes, "bias", where)
    if out.input_width != prev:
        raise ModelError(
            f"{where}: input width {out.input_width} does not match "
            f"previous output width {prev}"
        )


# ----------------------------------------------------------------------
# persistence


def _floats(obj, key: str, where: str) -> Tuple[float, ...]:
    if key not in obj:
        raise ModelError(f"{where}: missing field {key!r}")
    vec = obj[key]
    if not isinstance(vec, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in vec
    ):
        raise ModelError(f"{where}: field {key!r} must be an array of numbers")
    return tuple(float(x) for x in vec)


def _weights(obj, where: str) -> Tuple[Tuple[int, ...], ...]:
    rows = obj.get("weights")
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ModelError(f"{where}: field 'weights' must be an array of arrays")
    for r, row in enumerate(rows):
        for c, w in enumerate(row):
            if isinstance(w, bool) or not isinstance(w, (int, float)) or w not in (1, -1):
                raise ModelError(f"{where}, row {r}, column {c}: weight {w!r} is not +1/-1")
    return tuple(tuple(int(w) for w in row) for row in rows)


def model_from_dict(doc) -> BnnModel:
    if not isinstance(doc, dict) or not isinstance(doc.get("blocks"), list):
        raise ModelError("top-level object must carry a 'blocks' array")
    raw = doc["blocks"]
    if len(raw) < 2:
        raise ModelError("need at least one internal block and one output block")
    blocks = []
    for i, obj in enumerate(raw[:-1]):
        where = f"block {i}"
        if not isinstance(obj, dict) or obj.get("type") != "internal":
            raise ModelError(f"{where}: expected type 'internal'")
        blocks.append(
            InternalBlock(
                weights=_weights(obj, where),
                bias=_floats(obj, "bias", where),
                bn_alpha=_floats(obj, "bn_alpha", where),
                bn_gamma=_floats(obj, "bn_gamma", where),
                bn_mu=_floats(obj, "bn_mu", where),
                bn_sigma=_floats(obj, "bn_sigma", where),
            )
        )
    obj = raw[-1]
    where = f"block {len(raw) - 1} (output)"
    if not isinstance(obj, dict) or obj.get("type") != "output":
        raise ModelError(f"{where}: expected type 'output'")
    output = OutputBlock(weights=_weights(obj, where), bias=_floats(obj, "bias", where))
    return BnnModel(tuple(blocks), output)


def model_to_dict(model: BnnModel) -> dict:
    blocks = []
    for blk in model.blocks:
        blocks.append({
            "type": "internal",
            "weights": [list(r) for r in blk.weights],
            "bias": list(blk.bias),
            "bn_alpha": list(blk.bn_alpha),
            "bn_gamma": list(blk.bn_gamma),
            "bn_mu": list(blk.bn_mu),
            "bn_sigma": list(blk.bn_sigma),
        })
    blocks.append({
        "type": "output",
        "weights": [list(r) for r in model.output.weights],
        "bias": list(model.output.bias),
    })
    return {"blocks": blocks}


def load_model(path: PathLike) -> BnnModel:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return model_from_dict(doc)


def save_model(model: BnnModel, path: PathLike) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n")


def load_input(path: PathLike, width: int = None) -> InputSample:
    return InputSample.from_string(Path(path).read_text(), width)


# ----------------------------------------------------------------------
# random models


def parse_arch(arch: Union[str, Sequence[int]]) -> List[int]:
    """``"9:20:10"`` -> ``[9, 20, 10]``; the last entry is the class count."""
    if isinstance(arch, str):
        try:
            widths = [int(p) for p in arch.split(":")]
        except ValueError:
            raise ModelError(f"invalid architecture {arch!r}") from None
    else:
        widths = [int(w) for w in arch]
    if len(widths) < 3:
        raise ModelError(f"architecture {arch!r} needs at least input:hidden:classes")
    if any(w < 1 for w in widths):
        raise ModelError(f"architecture {arch!r} has a non-positive width")
    if widths[-1] < 2:
        raise ModelError(f"architecture {arch!r} needs at least 2 classes")
    return widths


def generate_random(arch: Union[str, Sequence[int]], seed: int,
                    zero_alpha_prob: float = 0.05) -> BnnModel:
    """Random model with uniform ±1 weights.

    Bias, gamma and mu are drawn from [-2, 2], sigma from [0.5, 2] and
    alpha from [-2, 2] with ``zero_alpha_prob`` of being exactly 0.
    """
    widths = parse_arch(arch)
    rng = np.random.default_rng(seed)

    def signs(rows, cols):
        return tuple(tuple(int(w) for w in row)
                     for row in rng.choice([-1, 1], size=(rows, cols)))

    def reals(n, lo, hi):
        return tuple(float(x) for x in rng.uniform(lo, hi, size=n))

    blocks = []
    for n_in, n_out in zip(widths[:-2], widths[1:-1]):
        alpha = rng.uniform(-2.0, 2.0, size=n_out)
        alpha[rng.random(n_out) < zero_alpha_prob] = 0.0
        blocks.append(
            InternalBlock(
                weights=signs(n_out, n_in),
                bias=reals(n_out, -2.0, 2.0),
                bn_alpha=tuple(float(a) for a in alpha),
                bn_gamma=reals(n_out, -2.0, 2.0),
                bn_mu=reals(n_out, -2.0, 2.0),
                bn_sigma=reals(n_out, 0.5, 2.0),
            )
        )
    s = widths[-1]
    output = OutputBlock(weights=signs(s, widths[-2]), bias=reals(s, -2.0, 2.0))
    return BnnModel(tuple(blocks), output)
