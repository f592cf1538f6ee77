"""Plain-text checkpoints of network parameters and optional Adam state.

Layout::

    POROPINN-CKPT v1
    spec <input_dim> <hidden_layers> <hidden_units> <output_dim>
    layer <i> <rows> <cols>
    <rows lines of weights, row-major>
    <one line of biases>
    ...
    adam <step_count>          (or "adam none")
    moment1 <i> / moment2 <i>  blocks laid out like "layer"
    end

Numbers are written with 17 significant digits so reading them back is exact.
"""

import os

import numpy as np

from . import net
from .errors import CheckpointError
from .training import AdamState

MAGIC = "POROPINN-CKPT"
VERSION = 1


def _fmt(values):
    return " ".join(format(float(v), ".17g") for v in np.ravel(values))


def _write_block(lines, tag, i, w, b):
    rows, cols = w.shape
    lines.append(f"{tag} {i} {rows} {cols}")
    lines.extend(_fmt(row) for row in w)
    lines.append(_fmt(b))


def save_checkpoint(params, state, path):
    s = params.spec
    lines = [f"{MAGIC} v{VERSION}", f"spec {s.input_dim} {s.hidden_layers} {s.hidden_units} {s.output_dim}"]
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        _write_block(lines, "layer", i, w, b)
    if state is None:
        lines.append("adam none")
    else:
        lines.append(f"adam {state.step_count}")
        for tag, moment in (("moment1", state.first_moment), ("moment2", state.second_moment)):
            for i, (w, b) in enumerate(zip(moment.weights, moment.biases)):
                _write_block(lines, tag, i, w, b)
    lines.append("end")
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


class _Reader:
    def __init__(self, path, text):
        self.path = path
        self.lines = text.split("\n")
        if self.lines and self.lines[-1] == "":
            self.lines.pop()
        self.pos = 0

    def error(self, msg, lineno=None):
        lineno = self.pos if lineno is None else lineno
        return CheckpointError(f"{self.path}: line {lineno}: {msg}")

    def next(self, what):
        if self.pos >= len(self.lines):
            raise self.error(f"unexpected end of file, expected {what}", self.pos + 1)
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def header(self, tag, n_ints, what):
        parts = self.next(what).split()
        if len(parts) != n_ints + 1 or parts[0] != tag:
            raise self.error(f"expected '{what}'")
        try:
            return [int(p) for p in parts[1:]]
        except ValueError:
            raise self.error(f"non-integer field in '{what}'") from None

    def numbers(self, count, what):
        parts = self.next(what).split()
        if len(parts) != count:
            raise self.error(f"expected {count} numbers for {what}, found {len(parts)}")
        try:
            vals = np.array([float(p) for p in parts])
        except ValueError:
            raise self.error(f"malformed number in {what}") from None
        if not np.all(np.isfinite(vals)):
            raise self.error(f"non-finite value in {what}")
        return vals


def _read_block(r, tag, i, shape):
    idx, rows, cols = r.header(tag, 3, f"{tag} {i} <rows> <cols>")
    if idx != i or (rows, cols) != shape:
        raise CheckpointError(
            f"{r.path}: line {r.pos}: {tag} {idx} has shape ({rows}, {cols}), expected {tag} {i} {shape}"
        )
    w = np.stack([r.numbers(cols, f"{tag} {i} row {k}") for k in range(rows)])
    b = r.numbers(rows, f"{tag} {i} bias")
    return w, b


def load_checkpoint(path):
    """Read a checkpoint; returns (params, state) where state may be None."""
    with open(path) as fh:
        r = _Reader(path, fh.read())
    first = r.next("header").split()
    if len(first) != 2 or first[0] != MAGIC or not first[1].startswith("v"):
        raise r.error(f"not a {MAGIC} file")
    try:
        version = int(first[1][1:])
    except ValueError:
        raise r.error(f"malformed version {first[1]!r}") from None
    if version != VERSION:
        raise r.error(f"unsupported checkpoint version {version} (this reader handles v{VERSION})")

    dims = r.header("spec", 4, "spec <input_dim> <hidden_layers> <hidden_units> <output_dim>")
    try:
        spec = net.LayerSpec(*dims)
    except ValueError as exc:
        raise r.error(str(exc)) from None
    shapes = spec.layer_shapes
    weights, biases = [], []
    for i, shape in enumerate(shapes):
        w, b = _read_block(r, "layer", i, shape)
        weights.append(w)
        biases.append(b)
    params = net.MlpParams(spec, weights, biases)

    parts = r.next("adam section").split()
    if len(parts) != 2 or parts[0] != "adam":
        raise r.error("expected 'adam <step_count>' or 'adam none'")
    state = None
    if parts[1] != "none":
        try:
            step = int(parts[1])
        except ValueError:
            raise r.error("malformed adam step count") from None
        moments = []
        for tag in ("moment1", "moment2"):
            ws, bs = [], []
            for i, shape in enumerate(shapes):
                w, b = _read_block(r, tag, i, shape)
                ws.append(w)
                bs.append(b)
            moments.append(net.ParamGradient(tuple(ws), tuple(bs)))
        if any(np.any(v < 0) for _, v in moments[1].blocks()):
            raise r.error("second moment has negative entries")
        state = AdamState(moments[0], moments[1], step)
    if r.next("'end'").strip() != "end":
        raise r.error("expected 'end'")
    if r.pos != len(r.lines):
        raise r.error("trailing content after 'end'", r.pos + 1)
    return params, state
