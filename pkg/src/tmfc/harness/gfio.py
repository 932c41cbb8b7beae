"""Persistence: sweep exports (CSV/JSON) and the Green-function container.

The GF container is a text header followed by a raw binary payload.  The
header starts with the format line ``TMFC-GF 1`` and lists one
``key = value`` entry per line (metadata entries carry a ``meta.``
prefix), ending with a lone ``end`` line.  The payload holds the time
axes (or nothing, for basis-form functions) followed by the stored
blocks, each as row-major complex samples written as pairs of 64-bit
floats (real, imaginary).
"""

import csv
import io
import json
from typing import List, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError, DataError
from ..gf_numeric import BasisSpec, DeltaLine, GreenFunction
from .sweep import SweepResult

FORMAT_LINE = "TMFC-GF 1"
_BLOCK_ORDER = ("g_rr", "g_rs", "g_sr", "g_ss")
_BASIS_KEYS = ("basis_out_r", "basis_out_s", "basis_in_r", "basis_in_s")


# ---------------------------------------------------------------------------
# sweep exports


def _param_columns(records: List[dict]) -> List[str]:
    cols = ["gamma_bar", "tau_p", "beta_r", "beta_s", "beta_p", "L"]
    return [c for c in cols if any(c in r for r in records)] or cols


def export_csv(result: SweepResult, path: str) -> None:
    """One row per sweep point: parameters, rho_1..N, ce_1..N, selectivity,
    separability, error tag.  Floats carry 12 significant digits.  An empty
    result writes the header row only."""
    n = result.spec.n_report
    params = _param_columns(result.records)
    header = params + [f"rho_{i + 1}" for i in range(n)] \
        + [f"ce_{i + 1}" for i in range(n)] \
        + ["selectivity", "separability", "error"]

    def fmt(x) -> str:
        if isinstance(x, str):
            return x
        return "%.12g" % float(x)

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for rec in result.records:
            rho = list(rec.get("rho", []))
            ce = list(rec.get("ce", []))
            rho += [float("nan")] * (n - len(rho))
            ce += [float("nan")] * (n - len(ce))
            row = [fmt(rec.get(c, float("nan"))) for c in params]
            row += [fmt(v) for v in rho]
            row += [fmt(v) for v in ce]
            row += [fmt(rec.get("selectivity", float("nan"))),
                    fmt(rec.get("separability", float("nan"))),
                    rec.get("error", "")]
            writer.writerow(row)


def export_json(result: SweepResult, path: str) -> None:
    """Full structured result: spec echo, records (modes included when they
    were requested), and provenance.  Records serialize identically between
    runs; only the provenance carries timestamps."""
    payload = {
        "spec": {
            "engine": result.spec.engine,
            "axes": [[name, list(values)] for name, values in result.spec.axes],
            "n_report": result.spec.n_report,
            "base": {
                "beta_r": result.spec.params.beta_r,
                "beta_s": result.spec.params.beta_s,
                "beta_p": result.spec.params.beta_p,
                "L": result.spec.params.L,
                "gamma_re": complex(result.spec.params.gamma).real,
                "gamma_im": complex(result.spec.params.gamma).imag,
                "pump_shape": result.spec.pump.shape,
                "tau_p": result.spec.pump.tau_p,
                "pump_center": result.spec.pump.center,
            },
        },
        "records": result.records,
        "provenance": result.provenance,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, allow_nan=True)
        fh.write("\n")


def import_json(path: str) -> dict:
    """Inverse of :func:`export_json` (returns the payload dictionary)."""
    with open(path) as fh:
        return json.load(fh)


def export_result(result: SweepResult, fmt: str, path: str) -> None:
    if fmt == "csv":
        export_csv(result, path)
    elif fmt == "json":
        export_json(result, path)
    else:
        raise ConfigurationError(f"unknown export format {fmt!r}")


# ---------------------------------------------------------------------------
# GF container


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(repr(float(x)) for x in np.asarray(v).ravel()) + "]"
    return str(v)


def save_gf(gf: GreenFunction, path: str) -> None:
    """Write a Green function to the versioned container format."""
    blocks = [name for name in _BLOCK_ORDER if getattr(gf, name) is not None]
    lines = [FORMAT_LINE, f"form = {gf.form}", "blocks = " + ",".join(blocks)]
    payload: List[np.ndarray] = []
    if gf.form == "grid":
        lines.append(f"n_out = {gf.t_out.size}")
        lines.append(f"n_in = {gf.t_in.size}")
        payload.append(np.asarray(gf.t_out, dtype=float))
        payload.append(np.asarray(gf.t_in, dtype=float))
        for name, delta in (("delta_rr", gf.delta_rr), ("delta_ss", gf.delta_ss)):
            if delta is not None:
                w = complex(delta.weight)
                lines.append(
                    f"{name} = %.17g %.17g %.17g" % (delta.delay, w.real, w.imag))
    else:
        for key in _BASIS_KEYS:
            spec = getattr(gf, key)
            lines.append(
                f"{key} = {spec.n} %.17g %.17g" % (spec.width, spec.center))
    for name in blocks:
        block = np.asarray(getattr(gf, name), dtype=complex)
        lines.append(f"shape_{name} = {block.shape[0]} {block.shape[1]}")
        payload.append(block)
    for key in sorted(gf.metadata):
        lines.append(f"meta.{key} = {_fmt_value(gf.metadata[key])}")
    lines.append("end")
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("utf-8"))
        for arr in payload:
            if np.iscomplexobj(arr):
                fh.write(np.ascontiguousarray(arr, dtype=np.complex128).tobytes())
            else:
                fh.write(np.ascontiguousarray(arr, dtype=np.float64).tobytes())


def _parse_meta(raw: str):
    if raw == "true":
        return True
    if raw == "false":
        return False
    if raw.startswith("[") and raw.endswith("]"):
        inner = raw[1:-1].strip()
        values = [float(x) for x in inner.split(",")] if inner else []
        return np.asarray(values, dtype=float)
    try:
        as_int = int(raw)
        return as_int
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def load_gf(path: str) -> GreenFunction:
    """Read a container written by :func:`save_gf`."""
    with open(path, "rb") as fh:
        data = fh.read()
    nl = data.find(b"\n")
    if nl < 0 or data[:nl].decode("utf-8", "replace") != FORMAT_LINE:
        raise DataError(f"{path}: not a TMFC-GF 1 container")
    header: List[str] = []
    pos = nl + 1
    while True:
        nl = data.find(b"\n", pos)
        if nl < 0:
            raise DataError(f"{path}: truncated container header")
        line = data[pos:nl].decode("utf-8")
        pos = nl + 1
        if line == "end":
            break
        header.append(line)
    fields = {}
    for line in header:
        key, sep, value = line.partition(" = ")
        if not sep:
            raise DataError(f"{path}: malformed header line {line!r}")
        fields[key] = value

    form = fields.pop("form")
    blocks = [b for b in fields.pop("blocks").split(",") if b]
    metadata = {}
    shapes = {}
    kwargs: dict = {}
    for key, value in fields.items():
        if key.startswith("meta."):
            metadata[key[len("meta."):]] = _parse_meta(value)
        elif key.startswith("shape_"):
            rows, cols = value.split()
            shapes[key[len("shape_"):]] = (int(rows), int(cols))
        elif key in ("delta_rr", "delta_ss"):
            delay, wre, wim = (float(x) for x in value.split())
            weight = complex(wre, wim)
            kwargs[key] = DeltaLine(delay, weight.real if wim == 0 else weight)
        elif key in _BASIS_KEYS:
            n_str, width, center = value.split()
            kwargs[key] = BasisSpec(int(n_str), float(width), float(center))
        elif key in ("n_out", "n_in"):
            shapes[key] = int(value)
        else:
            raise DataError(f"{path}: unknown header key {key!r}")

    def take(count: int, dtype) -> np.ndarray:
        nonlocal pos
        nbytes = count * np.dtype(dtype).itemsize
        chunk = data[pos:pos + nbytes]
        if len(chunk) != nbytes:
            raise DataError(f"{path}: truncated container payload")
        pos += nbytes
        return np.frombuffer(chunk, dtype=dtype).copy()

    if form == "grid":
        n_out = shapes.pop("n_out")
        n_in = shapes.pop("n_in")
        kwargs["t_out"] = take(n_out, np.float64)
        kwargs["t_in"] = take(n_in, np.float64)
    for name in blocks:
        rows, cols = shapes[name]
        kwargs[name] = take(rows * cols, np.complex128).reshape(rows, cols)
    return GreenFunction(form=form, metadata=metadata, **kwargs)
