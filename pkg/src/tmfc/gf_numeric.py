"""Green-function container and its numeric assembly from propagations.

A Green function maps the pair of input envelopes at z=0 to the pair of
output envelopes at z=L through four blocks::

    a_r(L) = G_rr a_r(0) + G_rs a_s(0)
    a_s(L) = G_sr a_r(0) + G_ss a_s(0)

Two representations are supported:

``basis``
    Coefficient matrices between orthonormal Hermite-Gaussian test bases,
    one basis per (channel, side).  This is the form produced by
    :func:`assemble_gf`: each input basis function is propagated through the
    medium and the outputs are projected onto delay-centered output bases.

``grid``
    Direct kernel samples ``G(t_out, t_in)`` on (possibly rectangular) time
    grids, as produced by the closed-form samplers.  The transmitted-delta
    parts of the rr/ss blocks of the exact kernels are kept symbolically as
    :class:`DeltaLine` descriptors and are never sampled as finite values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import (
    ConfigurationError,
    CoverageError,
    DataError,
    TruncationError,
)
from .model import (
    EPS_BETA,
    FieldState,
    PumpSpec,
    RegimeParams,
    TemporalGrid,
    hermite_gauss_basis,
    interaction_support,
)
from .solver import Propagator

_BLOCKS = ("rr", "rs", "sr", "ss")


@dataclass(frozen=True)
class DeltaLine:
    """Symbolic term ``weight * delta(t_in - (t_out - delay))``.

    Represents the unconverted, purely delayed part of a diagonal block.
    Consumers apply it as a time shift of the input function.
    """

    delay: float
    weight: complex = 1.0


@dataclass(frozen=True)
class BasisSpec:
    """Hermite-Gaussian test basis: ``n`` modes of a given width and center."""

    n: int
    width: float
    center: float

    def sample(self, t: np.ndarray, check_resolution: bool = True) -> np.ndarray:
        return hermite_gauss_basis(self.n, t, self.width, self.center,
                                   check_resolution=check_resolution)

    def extent(self, sigmas: float = 4.0) -> Tuple[float, float]:
        """Interval containing the basis support (classical turning points
        of the highest mode plus ``sigmas`` widths of Gaussian tail)."""
        half = self.width * (math.sqrt(2.0 * self.n + 1.0) + sigmas)
        return self.center - half, self.center + half


@dataclass(frozen=True)
class GreenFunction:
    """Four-block Green function in basis-coefficient or grid-sampled form."""

    form: str
    g_rr: Optional[np.ndarray] = None
    g_rs: Optional[np.ndarray] = None
    g_sr: Optional[np.ndarray] = None
    g_ss: Optional[np.ndarray] = None
    # grid form
    t_out: Optional[np.ndarray] = None
    t_in: Optional[np.ndarray] = None
    delta_rr: Optional[DeltaLine] = None
    delta_ss: Optional[DeltaLine] = None
    # basis form
    basis_in_r: Optional[BasisSpec] = None
    basis_in_s: Optional[BasisSpec] = None
    basis_out_r: Optional[BasisSpec] = None
    basis_out_s: Optional[BasisSpec] = None
    grid: Optional[TemporalGrid] = None
    metadata: Dict = field(default_factory=dict)

    def __post_init__(self):
        if self.form not in ("basis", "grid"):
            raise ConfigurationError("form must be 'basis' or 'grid'")
        if all(getattr(self, f"g_{b}") is None for b in _BLOCKS):
            raise ConfigurationError("at least one block must be present")
        for b in _BLOCKS:
            m = getattr(self, f"g_{b}")
            if m is None:
                continue
            m = np.asarray(m, dtype=complex)
            if m.ndim != 2:
                raise DataError(f"block {b} must be a 2-D array")
            if not np.all(np.isfinite(m.view(float))):
                raise DataError(f"block {b} contains non-finite entries")
            m = m.copy()
            m.setflags(write=False)
            object.__setattr__(self, f"g_{b}", m)
        if self.form == "grid":
            if self.t_out is None or self.t_in is None:
                raise ConfigurationError("grid form requires t_out and t_in axes")
            for name in ("t_out", "t_in"):
                ax = np.asarray(getattr(self, name), dtype=float).copy()
                ax.setflags(write=False)
                object.__setattr__(self, name, ax)
            for b in _BLOCKS:
                m = getattr(self, f"g_{b}")
                if m is not None and m.shape != (self.t_out.size, self.t_in.size):
                    raise DataError(f"block {b} shape does not match the time axes")
        else:
            for b in _BLOCKS:
                m = getattr(self, f"g_{b}")
                if m is None:
                    continue
                bo = self.basis_out_r if b[0] == "r" else self.basis_out_s
                bi = self.basis_in_r if b[1] == "r" else self.basis_in_s
                if bo is None or bi is None:
                    raise ConfigurationError(f"basis form requires basis specs for block {b}")
                if m.shape != (bo.n, bi.n):
                    raise DataError(f"block {b} shape does not match its basis sizes")

    @property
    def dt_out(self) -> float:
        return float(self.t_out[1] - self.t_out[0])

    @property
    def dt_in(self) -> float:
        return float(self.t_in[1] - self.t_in[0])

    def block(self, name: str) -> Optional[np.ndarray]:
        if name not in _BLOCKS:
            raise ConfigurationError(f"unknown block {name!r}")
        return getattr(self, f"g_{name}")


def _spectral_shift(v: np.ndarray, delay: float, dt: float) -> np.ndarray:
    """Evaluate ``v(t - delay)`` for a sampled band-limited function."""
    if delay == 0.0:
        return v.astype(complex)
    omega = 2.0 * math.pi * np.fft.fftfreq(v.size, dt)
    return np.fft.ifft(np.fft.fft(v) * np.exp(-1j * omega * delay))


def apply_block(gf: GreenFunction, name: str, vec: np.ndarray,
                adjoint: bool = False) -> np.ndarray:
    """Apply one block (including any delta part) to an input function.

    For grid form, ``vec`` is sampled on ``t_in`` (``t_out`` when
    ``adjoint``) and the continuous integral is approximated with the grid
    quadrature.  For basis form, ``vec`` holds basis coefficients.
    """
    m = gf.block(name)
    if m is None:
        raise ConfigurationError(f"block {name} is not present")
    vec = np.asarray(vec, dtype=complex)
    if gf.form == "basis":
        return (m.conj().T if adjoint else m) @ vec
    delta = gf.delta_rr if name == "rr" else gf.delta_ss if name == "ss" else None
    if not adjoint:
        out = (m @ vec) * gf.dt_in
        if delta is not None:
            if gf.t_out.size != gf.t_in.size or abs(gf.dt_out - gf.dt_in) > 1e-12 * gf.dt_in:
                raise ConfigurationError("delta part needs matching in/out axes")
            shifted = _spectral_shift(vec, delta.delay + (gf.t_in[0] - gf.t_out[0]), gf.dt_in)
            out = out + delta.weight * shifted
        return out
    out = (m.conj().T @ vec) * gf.dt_out
    if delta is not None:
        if gf.t_out.size != gf.t_in.size or abs(gf.dt_out - gf.dt_in) > 1e-12 * gf.dt_in:
            raise ConfigurationError("delta part needs matching in/out axes")
        shifted = _spectral_shift(vec, -delta.delay + (gf.t_out[0] - gf.t_in[0]), gf.dt_out)
        out = out + np.conj(delta.weight) * shifted
    return out


# ---------------------------------------------------------------------------
# numeric assembly


def default_basis_layout(params: RegimeParams, pump: PumpSpec,
                         n_r: int = 40, n_s: int = 40,
                         width_r: Optional[float] = None,
                         width_s: Optional[float] = None
                         ) -> Dict[str, BasisSpec]:
    """Default test-basis geometry for a conversion problem.

    Input bases sit on the interval where each channel crosses the pump
    (center ``-beta_jp L / 2``); output bases are the same shapes delayed by
    the free transit time ``beta_j L``.  A channel that rides with the pump
    uses the pump width; otherwise the width scales with the interaction
    band, ``beta_rs L / 4``.
    """
    L = params.L
    band_w = abs(params.beta_rs) * L / 4.0
    if width_s is None:
        width_s = pump.tau_p if abs(params.beta_sp) <= EPS_BETA else band_w
    if width_r is None:
        width_r = pump.tau_p if abs(params.beta_rp) <= EPS_BETA else band_w
    if width_r <= 0 or width_s <= 0:
        raise ConfigurationError("basis widths must be positive (is beta_r == beta_s?)")
    c_r_in = pump.center - params.beta_rp * L / 2.0
    c_s_in = pump.center - params.beta_sp * L / 2.0
    return {
        "in_r": BasisSpec(n_r, width_r, c_r_in),
        "in_s": BasisSpec(n_s, width_s, c_s_in),
        "out_r": BasisSpec(n_r, width_r, c_r_in + params.beta_r * L),
        "out_s": BasisSpec(n_s, width_s, c_s_in + params.beta_s * L),
    }


def grid_for_basis(params: RegimeParams, pump: PumpSpec,
                   layout: Dict[str, BasisSpec],
                   n_t: Optional[int] = None,
                   n_z: Optional[int] = None) -> TemporalGrid:
    """Covering grid for an assembly: interaction support plus basis tails,
    sampled finely enough for the pump and the highest basis order."""
    edges = []
    dt_req = pump.tau_p / 8.0
    for spec in layout.values():
        edges.extend(spec.extent())
        # quarter of the Nyquist bound of the highest mode
        dt_req = min(dt_req, 0.25 * math.pi * spec.width
                     / math.sqrt(2.0 * spec.n + 1.0))
    return TemporalGrid.for_interaction(
        params, pump, n_t=n_t, n_z=n_z, dt_max=dt_req, extra=edges,
    )


def assemble_gf(
    params: RegimeParams,
    pump: PumpSpec,
    grid: Optional[TemporalGrid] = None,
    n_r: int = 40,
    n_s: int = 40,
    width_r: Optional[float] = None,
    width_s: Optional[float] = None,
    layout: Optional[Dict[str, BasisSpec]] = None,
    tol_leak: float = 1e-2,
    n_t: Optional[int] = None,
    n_z: Optional[int] = None,
) -> GreenFunction:
    """Assemble the basis-form Green function by propagating test signals.

    Each s-channel input basis function is propagated through the medium and
    projected onto the r/s output bases, giving one column of ``g_rs`` and
    ``g_ss``; r-channel inputs give ``g_rr`` and ``g_sr``.  Projections use
    the grid quadrature against the (real, orthonormal) output bases.

    Parameters default to the layout of :func:`default_basis_layout`.
    ``tol_leak`` bounds the per-column energy not captured by the output
    bases; exceeding it raises a truncation error naming the worst column.
    Column order is fixed, so the result is bit-reproducible for identical
    inputs.
    """
    if layout is None:
        layout = default_basis_layout(params, pump, n_r=n_r, n_s=n_s,
                                      width_r=width_r, width_s=width_s)
    if grid is None:
        grid = grid_for_basis(params, pump, layout, n_t=n_t, n_z=n_z)
    else:
        lo = min(e for spec in layout.values() for e in spec.extent())
        hi = max(e for spec in layout.values() for e in spec.extent())
        if grid.t_min > lo or grid.t_max < hi:
            raise CoverageError(
                f"grid [{grid.t_min}, {grid.t_max}] does not contain the basis "
                f"tails [{lo:.3g}, {hi:.3g}]"
            )
    t = grid.times
    dt = grid.dt
    bases = {k: spec.sample(t) for k, spec in layout.items()}
    prop = Propagator(params, pump, grid)

    n_s_eff = layout["in_s"].n
    n_r_eff = layout["in_r"].n
    g_rs = np.empty((layout["out_r"].n, n_s_eff), dtype=complex)
    g_ss = np.empty((layout["out_s"].n, n_s_eff), dtype=complex)
    g_rr = np.empty((layout["out_r"].n, n_r_eff), dtype=complex)
    g_sr = np.empty((layout["out_s"].n, n_r_eff), dtype=complex)
    leak_s = np.empty(n_s_eff)
    leak_r = np.empty(n_r_eff)

    conv_s = np.empty(n_s_eff)
    trans_s = np.empty(n_s_eff)
    conv_r = np.empty(n_r_eff)
    trans_r = np.empty(n_r_eff)

    zero = np.zeros(grid.n_t, dtype=complex)
    for col in range(n_s_eff):
        out = prop.run(zero, bases["in_s"][col])
        g_rs[:, col] = bases["out_r"] @ out.a_r * dt
        g_ss[:, col] = bases["out_s"] @ out.a_s * dt
        conv_s[col] = dt * np.sum(np.abs(out.a_r) ** 2)
        trans_s[col] = dt * np.sum(np.abs(out.a_s) ** 2)
        total = conv_s[col] + trans_s[col]
        captured = np.sum(np.abs(g_rs[:, col]) ** 2) + np.sum(np.abs(g_ss[:, col]) ** 2)
        leak_s[col] = max(0.0, 1.0 - captured / total)
    for col in range(n_r_eff):
        out = prop.run(bases["in_r"][col], zero)
        g_rr[:, col] = bases["out_r"] @ out.a_r * dt
        g_sr[:, col] = bases["out_s"] @ out.a_s * dt
        conv_r[col] = dt * np.sum(np.abs(out.a_s) ** 2)
        trans_r[col] = dt * np.sum(np.abs(out.a_r) ** 2)
        total = conv_r[col] + trans_r[col]
        captured = np.sum(np.abs(g_rr[:, col]) ** 2) + np.sum(np.abs(g_sr[:, col]) ** 2)
        leak_r[col] = max(0.0, 1.0 - captured / total)

    worst_side, worst_col = max(
        (("s", int(np.argmax(leak_s))), ("r", int(np.argmax(leak_r)))),
        key=lambda sc: leak_s[sc[1]] if sc[0] == "s" else leak_r[sc[1]],
    )
    worst = float(leak_s[worst_col] if worst_side == "s" else leak_r[worst_col])
    if worst > tol_leak:
        raise TruncationError(
            f"basis truncation: {worst_side}-input column {worst_col} leaks "
            f"{worst:.3e} of its energy past the output bases (tol {tol_leak:g}); "
            f"increase the mode count or widths"
        )

    meta = {
        "engine": "numeric",
        "beta_r": params.beta_r, "beta_s": params.beta_s, "beta_p": params.beta_p,
        "L": params.L, "gamma_re": complex(params.gamma).real,
        "gamma_im": complex(params.gamma).imag,
        "pump_shape": pump.shape, "tau_p": pump.tau_p, "pump_center": pump.center,
        "chirped": pump.chirp is not None,
        "n_t": grid.n_t, "n_z": grid.n_z,
        "t_min": grid.t_min, "t_max": grid.t_max,
        "leak_s": leak_s, "leak_r": leak_r,
        # unprojected per-column output energies: these see the full grid,
        # so their sums estimate the Hilbert-Schmidt weights of the blocks
        # without the output-basis truncation of the coefficient matrices
        "conv_energy_s": conv_s, "trans_energy_s": trans_s,
        "conv_energy_r": conv_r, "trans_energy_r": trans_r,
    }
    return GreenFunction(
        form="basis", g_rr=g_rr, g_rs=g_rs, g_sr=g_sr, g_ss=g_ss,
        basis_in_r=layout["in_r"], basis_in_s=layout["in_s"],
        basis_out_r=layout["out_r"], basis_out_s=layout["out_s"],
        grid=grid, metadata=meta,
    )


def leakage_report(gf: GreenFunction) -> Dict:
    """Per-column projection leakage recorded during assembly."""
    if gf.form != "basis" or "leak_s" not in gf.metadata:
        raise ConfigurationError("leakage is only recorded for numerically assembled GFs")
    leak_s = np.asarray(gf.metadata["leak_s"])
    leak_r = np.asarray(gf.metadata["leak_r"])
    if leak_r.size and leak_r.max() > leak_s.max():
        worst = ("r", int(np.argmax(leak_r)), float(leak_r.max()))
    else:
        worst = ("s", int(np.argmax(leak_s)), float(leak_s.max()))
    return {"s": leak_s, "r": leak_r,
            "max": worst[2], "worst_side": worst[0], "worst_column": worst[1]}


def composite_matrix(gf: GreenFunction) -> np.ndarray:
    """Stack the four basis-form blocks into one (r followed by s) matrix."""
    if gf.form != "basis":
        raise ConfigurationError("composite matrix is defined for basis form")
    if any(gf.block(b) is None for b in _BLOCKS):
        raise ConfigurationError("composite matrix needs all four blocks")
    top = np.hstack([gf.g_rr, gf.g_rs])
    bot = np.hstack([gf.g_sr, gf.g_ss])
    return np.vstack([top, bot])


def unitarity_defect(gf: GreenFunction) -> float:
    """Normalized Frobenius deviation ``|U^H U - I|_F / sqrt(N)``."""
    u = composite_matrix(gf)
    n = u.shape[1]
    return float(np.linalg.norm(u.conj().T @ u - np.eye(n)) / math.sqrt(n))


def to_grid_form(gf: GreenFunction, grid: Optional[TemporalGrid] = None) -> GreenFunction:
    """Synthesize a basis-form Green function onto a time grid.

    ``g(t, t') = sum_kl B_out_k(t) c_kl B_in_l(t')`` per block.  The result
    has no delta descriptors: for a numerically assembled operator the
    transmitted part is already inside the coefficients.
    """
    if gf.form != "basis":
        return gf
    if grid is None:
        grid = gf.grid
    if grid is None:
        raise ConfigurationError("no grid available for synthesis")
    t = grid.times
    samples = {
        "in_r": gf.basis_in_r.sample(t), "in_s": gf.basis_in_s.sample(t),
        "out_r": gf.basis_out_r.sample(t), "out_s": gf.basis_out_s.sample(t),
    }
    blocks = {}
    for b in _BLOCKS:
        m = gf.block(b)
        if m is None:
            blocks[f"g_{b}"] = None
            continue
        bo = samples["out_r"] if b[0] == "r" else samples["out_s"]
        bi = samples["in_r"] if b[1] == "r" else samples["in_s"]
        blocks[f"g_{b}"] = bo.T @ m @ bi
    meta = dict(gf.metadata)
    meta["synthesized_from"] = "basis"
    return GreenFunction(form="grid", t_out=t, t_in=t, metadata=meta, **blocks)
