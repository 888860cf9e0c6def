"""Plain-text persistence for trained models.

One ``key = value`` pair per line. Arrays are written as space-separated
``repr`` floats (round-trip exact) with the shape stored under ``<key>.shape``.
Lines starting with ``#`` are ignored.

MLP keys: ``kind = mlp``, ``hidden_weights``, ``hidden_bias``,
``output_weights``, ``output_bias``.

SVR keys: ``kind = svr``, ``kernel``, ``C``, ``epsilon``, ``gamma``, ``degree``,
``coef0``, ``tolerance``, ``bias``, ``support_vectors``, ``dual_coeffs``.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .mlp import MlpModel
from .svr import SvrConfig, SvrModel


def _fmt_array(a) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(a, dtype=float).ravel())


def _array_lines(key, a):
    a = np.asarray(a, dtype=float)
    return [f"{key}.shape = {' '.join(str(d) for d in a.shape)}", f"{key} = {_fmt_array(a)}"]


def dumps(model) -> str:
    if isinstance(model, MlpModel):
        lines = ["kind = mlp"]
        lines += _array_lines("hidden_weights", model.hidden_weights)
        lines += _array_lines("hidden_bias", model.hidden_bias)
        lines += _array_lines("output_weights", model.output_weights)
        lines.append(f"output_bias = {float(model.output_bias)!r}")
    elif isinstance(model, SvrModel):
        c = model.config
        lines = [
            "kind = svr",
            f"kernel = {c.kernel}",
            f"C = {float(c.C)!r}",
            f"epsilon = {float(c.epsilon)!r}",
            f"gamma = {float(c.gamma)!r}",
            f"degree = {c.degree}",
            f"coef0 = {float(c.coef0)!r}",
            f"tolerance = {float(c.tolerance)!r}",
            f"bias = {float(model.bias)!r}",
        ]
        lines += _array_lines("support_vectors", model.support_vectors)
        lines += _array_lines("dual_coeffs", model.dual_coeffs)
    else:
        raise TypeError(f"cannot serialise {type(model).__name__}")
    return "\n".join(lines) + "\n"


def _parse(text: str) -> dict:
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _array(kv, key) -> np.ndarray:
    shape = tuple(int(d) for d in kv[f"{key}.shape"].split())
    data = np.array([float(v) for v in kv[key].split()], dtype=float)
    return data.reshape(shape)


def loads(text: str):
    kv = _parse(text)
    kind = kv.get("kind")
    if kind == "mlp":
        return MlpModel(
            _array(kv, "hidden_weights"),
            _array(kv, "hidden_bias"),
            _array(kv, "output_weights"),
            float(kv["output_bias"]),
        )
    if kind == "svr":
        cfg = SvrConfig(
            C=float(kv["C"]),
            epsilon=float(kv["epsilon"]),
            kernel=kv["kernel"],
            gamma=float(kv["gamma"]),
            degree=int(kv["degree"]),
            coef0=float(kv["coef0"]),
            tolerance=float(kv["tolerance"]),
        )
        sv = _array(kv, "support_vectors")
        return SvrModel(sv, _array(kv, "dual_coeffs"), float(kv["bias"]), cfg)
    raise ValueError(f"unknown model kind {kind!r}")


def save(model, path) -> None:
    Path(path).write_text(dumps(model))


def load(path):
    return loads(Path(path).read_text())
