"""Parameter sweeps over conversion configurations.

A sweep point is one (params, pump) configuration evaluated end to end:
build the Green function with the requested engine, decompose it, record
the leading Schmidt data.  Axes iterate in row-major order of their
declaration.  Points are independent, so a process pool may compute them
out of order; records are always gathered back by point index, keeping
every downstream artifact order-deterministic.
"""

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ConfigurationError, RegimeError, TmfcError
from ..model import (
    EPS_BETA,
    PumpSpec,
    RegimeParams,
    TemporalGrid,
    conversion_support,
)
from ..gf_analytic import default_ssvm_grids, sample_low_ce, ssvm_gf
from ..gf_numeric import assemble_gf
from ..schmidt import decompose, shape_fidelity

AXIS_NAMES = ("gamma_bar", "tau_p", "beta_p", "beta_r", "beta_rs_L")
ENGINES = ("numeric", "analytic-ssvm", "low-ce")


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: base configuration, axes, engine, and requested outputs.

    Axis names:
        gamma_bar   dimensionless coupling gamma / beta_rs
        tau_p       pump width
        beta_p      pump slowness
        beta_r      r-channel slowness
        beta_rs_L   total walk-off; realized by scaling L at fixed betas

    The base ``gamma_bar`` is preserved when a beta axis changes the
    walk-off (the coupling gamma is recomputed), matching how the studies
    treat it as the control parameter.
    """

    params: RegimeParams
    pump: PumpSpec
    axes: Tuple[Tuple[str, Tuple[float, ...]], ...] = ()
    engine: str = "numeric"
    n_report: int = 10
    want_modes: bool = False
    want_fidelity: bool = False
    grid: Optional[TemporalGrid] = None
    basis: Optional[Dict[str, float]] = None
    low_ce_n: int = 1024
    low_ce_margin: float = 5.0

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ConfigurationError(
                f"unknown engine {self.engine!r}; expected one of {ENGINES}")
        if int(self.n_report) < 1:
            raise ConfigurationError("n_report must be at least 1")
        object.__setattr__(self, "n_report", int(self.n_report))
        norm = []
        for entry in self.axes:
            name, values = entry
            if name not in AXIS_NAMES:
                raise ConfigurationError(
                    f"unknown sweep axis {name!r}; expected one of {AXIS_NAMES}")
            vals = tuple(float(v) for v in values)
            if not vals:
                raise ConfigurationError(f"axis {name!r} has no values")
            if not all(math.isfinite(v) for v in vals):
                raise ConfigurationError(f"axis {name!r} has non-finite values")
            norm.append((name, vals))
        object.__setattr__(self, "axes", tuple(norm))
        if self.basis is not None:
            object.__setattr__(self, "basis", dict(self.basis))

    def points(self) -> List[Dict[str, float]]:
        """Axis value combinations in row-major order of declaration."""
        names = [name for name, _ in self.axes]
        grids = [values for _, values in self.axes]
        return [dict(zip(names, combo)) for combo in itertools.product(*grids)]

    def point_config(self, values: Dict[str, float]) -> Tuple[RegimeParams, PumpSpec]:
        """Apply one axis-value combination to the base configuration.

        Betas first, then the walk-off length, then the pump width, then
        the coupling; ``gamma_bar`` (base or swept) is realized last so it
        survives beta changes.
        """
        params = self.params
        pump = self.pump
        if "beta_r" in values:
            params = replace(params, beta_r=values["beta_r"])
        if "beta_p" in values:
            params = replace(params, beta_p=values["beta_p"])
        if "beta_rs_L" in values:
            if abs(params.beta_rs) <= EPS_BETA:
                raise RegimeError("beta_rs_L axis needs beta_r != beta_s")
            params = replace(params, L=values["beta_rs_L"] / params.beta_rs)
        if "tau_p" in values:
            pump = replace(pump, tau_p=values["tau_p"])
        if "gamma_bar" in values:
            params = params.with_gamma_bar(values["gamma_bar"])
        elif abs(params.beta_rs) > EPS_BETA and params is not self.params:
            params = params.with_gamma_bar(
                complex(self.params.gamma_bar).real
                if complex(self.params.gamma_bar).imag == 0
                else self.params.gamma_bar)
        return params, pump


@dataclass
class SweepResult:
    """Ordered per-point records plus run provenance.

    ``records`` hold only plain scalars/lists so exports serialize them
    directly; timestamps and wall time live in ``provenance`` to keep the
    records byte-deterministic between runs.
    """

    spec: SweepSpec
    records: List[dict] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)


def _gf_for_point(spec: SweepSpec, params: RegimeParams, pump: PumpSpec):
    if spec.engine == "numeric":
        kwargs = dict(spec.basis or {})
        return assemble_gf(params, pump, grid=spec.grid, **kwargs)
    if spec.engine == "analytic-ssvm":
        if abs(params.beta_sp) > EPS_BETA:
            raise RegimeError(
                "analytic-ssvm engine requires the s channel matched to the "
                f"pump (beta_sp = {params.beta_sp:g})")
        t_out, t_in = default_ssvm_grids(params, pump)
        return ssvm_gf(params, pump, t_out, t_in)
    (o_lo, o_hi), (i_lo, i_hi) = conversion_support(
        params, pump, margin=spec.low_ce_margin)
    t_out = np.linspace(o_lo, o_hi, spec.low_ce_n)
    t_in = np.linspace(i_lo, i_hi, spec.low_ce_n)
    return sample_low_ce(params, pump, t_out, t_in)


def evaluate_point(spec: SweepSpec, index: int, values: Dict[str, float]) -> dict:
    """Evaluate one sweep point; failures are captured in the record."""
    record = {"index": index}
    record.update({name: float(v) for name, v in values.items()})
    try:
        params, pump = spec.point_config(values)
        record.update({
            "gamma_bar": _real_if_real(params.gamma_bar)
            if abs(params.beta_rs) > EPS_BETA else float("nan"),
            "tau_p": pump.tau_p,
            "beta_r": params.beta_r,
            "beta_s": params.beta_s,
            "beta_p": params.beta_p,
            "L": params.L,
        })
        gf = _gf_for_point(spec, params, pump)
        res = decompose(gf, n_report=spec.n_report,
                        want_modes=spec.want_modes or spec.want_fidelity)
        n = spec.n_report
        record["rho"] = [float(x) for x in res.rho[:n]]
        record["ce"] = [float(x) for x in res.ce[:n]]
        record["selectivity"] = float(res.selectivity)
        record["separability"] = float(res.separability)
        record["error"] = ""
        if spec.want_fidelity:
            pairs = min(3, len(res.rho))
            record["fidelity"] = [
                float(shape_fidelity(res.modes_in_s[k], res.modes_out_r[k],
                                     res.dt_in, res.dt_out))
                for k in range(pairs)
            ]
        if spec.want_modes:
            record["modes"] = {
                "t_in": [float(x) for x in res.t_in],
                "t_out": [float(x) for x in res.t_out],
                "in_s": _mode_lists(res.modes_in_s),
                "out_r": _mode_lists(res.modes_out_r),
            }
    except (TmfcError, np.linalg.LinAlgError) as exc:
        record.setdefault("gamma_bar", float("nan"))
        record["rho"] = []
        record["ce"] = []
        record["selectivity"] = float("nan")
        record["separability"] = float("nan")
        record["error"] = f"{type(exc).__name__}: {exc}"
    return record


def _real_if_real(x) -> float:
    x = complex(x)
    return x.real if x.imag == 0 else abs(x)


def _mode_lists(modes) -> List[List[List[float]]]:
    out = []
    for m in modes:
        m = np.asarray(m)
        out.append([[float(v.real), float(v.imag)] for v in m])
    return out


def _evaluate_star(args) -> dict:
    return evaluate_point(*args)


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Run every sweep point and gather records in point order.

    ``workers > 1`` fans the points over a process pool; the pool's map
    preserves submission order, so the result is identical to the serial
    run.  Per-point failures are recorded in-row and do not stop the sweep.
    """
    if int(workers) < 1:
        raise ConfigurationError("workers must be a positive integer")
    points = spec.points()
    t0 = time.time()
    jobs = [(spec, i, values) for i, values in enumerate(points)]
    if workers == 1 or len(points) <= 1:
        records = [evaluate_point(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=int(workers)) as pool:
            records = list(pool.map(_evaluate_star, jobs))
    from .. import __version__

    provenance = {
        "engine": spec.engine,
        "version": __version__,
        "n_points": len(points),
        "workers": int(workers),
        "wall_time_s": time.time() - t0,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
    }
    if spec.grid is not None:
        provenance["grid"] = {
            "t_min": spec.grid.t_min, "t_max": spec.grid.t_max,
            "n_t": spec.grid.n_t, "n_z": spec.grid.n_z,
        }
    if spec.basis:
        provenance["basis"] = dict(spec.basis)
    if spec.engine == "low-ce":
        provenance["low_ce"] = {"n": spec.low_ce_n, "margin": spec.low_ce_margin}
    return SweepResult(spec=spec, records=records, provenance=provenance)
