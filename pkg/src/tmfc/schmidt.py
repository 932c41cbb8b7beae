"""Schmidt analysis of a conversion Green function.

The rs block admits a singular value decomposition
``G_rs(t, t') = sum_n rho_n Psi_n(t) phi_n*(t')`` with orthonormal input
functions ``phi_n`` and output functions ``Psi_n``.  Energy conservation
pairs each conversion amplitude ``rho_n`` with a transmission amplitude
``tau_n`` (``|tau_n|^2 + |rho_n|^2 = 1``); the diagonal blocks share the
same mode families.  The mode-n conversion efficiency is ``rho_n^2`` and
the figures of merit are::

    selectivity   S = rho_1^4 / sum_n rho_n^2
    separability      rho_1^2 / sum_n rho_n^2

Discrete operators approximate continuous ones through the quadrature
weights of their grids, so singular values are reported in the continuous
normalization regardless of sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import ConfigurationError, DataError, UnsupportedConfigurationError
from .gf_numeric import GreenFunction, to_grid_form

_PHASE_TOL = 1e-6


@dataclass(frozen=True)
class SchmidtResult:
    """Decomposition summary; arrays are ordered by decreasing ``rho``."""

    rho: np.ndarray
    tau_abs: np.ndarray
    tau_phase: np.ndarray
    ce: np.ndarray
    selectivity: float
    separability: float
    sum_rho_sq: float
    rho_full: np.ndarray
    tau_source: str
    t_in: Optional[np.ndarray] = None
    t_out: Optional[np.ndarray] = None
    modes_in_s: Optional[np.ndarray] = None
    modes_out_r: Optional[np.ndarray] = None
    modes_in_r: Optional[np.ndarray] = None
    modes_out_s: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("rho", "tau_abs", "tau_phase", "ce", "rho_full",
                     "t_in", "t_out", "modes_in_s", "modes_out_r",
                     "modes_in_r", "modes_out_s"):
            v = getattr(self, name)
            if v is None:
                continue
            v = np.asarray(v)
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def tau(self) -> np.ndarray:
        return self.tau_abs * np.exp(1j * self.tau_phase)

    @property
    def dt_in(self) -> float:
        return float(self.t_in[1] - self.t_in[0])

    @property
    def dt_out(self) -> float:
        return float(self.t_out[1] - self.t_out[0])


def selectivity(rho: np.ndarray) -> float:
    """``rho_1^4 / sum rho_n^2`` for a descending singular value list."""
    rho = np.asarray(rho, dtype=float)
    total = float(np.sum(rho ** 2))
    if total <= 0.0:
        return 0.0
    return float(rho[0] ** 4 / total)


def separability(rho: np.ndarray) -> float:
    """``rho_1^2 / sum rho_n^2``; 1 for a single mode, 1/N for N equal ones."""
    rho = np.asarray(rho, dtype=float)
    total = float(np.sum(rho ** 2))
    if total <= 0.0:
        return 0.0
    return float(rho[0] ** 2 / total)


def _canonical_phase(vec: np.ndarray) -> complex:
    """Phase factor making the first significant component positive real."""
    mags = np.abs(vec)
    peak = mags.max()
    if peak == 0.0:
        return 1.0
    idx = int(np.argmax(mags > 0.5 * peak))
    z = vec[idx]
    return z / abs(z)


def decompose(gf: GreenFunction, n_report: int = 10,
              want_modes: bool = True) -> SchmidtResult:
    """Schmidt-decompose the rs block and pair the transmission amplitudes.

    ``tau_n`` is recovered by applying the ss block (or the adjoint rr
    block) to the matched input (output) function; when neither diagonal
    block is applicable the unitarity value ``sqrt(1 - rho_n^2)`` is used
    and ``tau_source`` says so.
    """
    if gf.block("rs") is None:
        raise ConfigurationError("decomposition needs the rs block")

    if gf.form == "basis":
        m = gf.g_rs
        w_out = w_in = 1.0
        t_in = t_out = None
        if gf.grid is not None:
            t_in = t_out = gf.grid.times
    else:
        w_out = math.sqrt(gf.dt_out)
        w_in = math.sqrt(gf.dt_in)
        m = gf.g_rs * (w_out * w_in)
        t_in, t_out = gf.t_in, gf.t_out

    u, sig, vh = np.linalg.svd(m, full_matrices=False)
    n_report = min(n_report, sig.size)
    rho_full = sig.copy()
    if gf.form == "basis" and "conv_energy_s" in gf.metadata:
        # include the conversion weight past the finite output basis: the
        # unprojected column energies sum to the Hilbert-Schmidt weight of
        # the rs block over the spanned inputs
        sum_rho_sq = float(np.sum(gf.metadata["conv_energy_s"]))
    else:
        sum_rho_sq = float(np.sum(sig ** 2))
    rho = sig[:n_report]

    # canonical phases: first significant component of each input function
    # positive real, the partner output function rotated with it
    in_vecs = vh[:n_report].conj()
    out_vecs = u[:, :n_report].T.copy()
    for n in range(n_report):
        ph = _canonical_phase(in_vecs[n])
        in_vecs[n] = in_vecs[n] / ph
        out_vecs[n] = out_vecs[n] / ph

    tau_abs = np.sqrt(np.clip(1.0 - rho ** 2, 0.0, None))
    tau_phase = np.zeros(n_report)
    tau_source = "unitarity"
    modes_out_s = None
    modes_in_r = None

    if gf.block("ss") is not None and (gf.form == "basis" or gf.delta_ss is None
                                       or _delta_applicable(gf)):
        tau_abs, tau_phase, phi_out_s = _tau_from_ss(gf, in_vecs, w_in, w_out)
        tau_source = "gss"
        modes_out_s = phi_out_s
    elif gf.block("rr") is not None and (gf.form == "basis" or gf.delta_rr is None
                                         or _delta_applicable(gf)):
        tau_abs, tau_phase, psi_in_r = _tau_from_rr(gf, out_vecs, w_in, w_out)
        tau_source = "grr"
        modes_in_r = psi_in_r
    if tau_source == "gss" and gf.block("rr") is not None and \
            (gf.form == "basis" or gf.delta_rr is None or _delta_applicable(gf)):
        _, _, modes_in_r = _tau_from_rr(gf, out_vecs, w_in, w_out)

    result_modes = {}
    if want_modes:
        if gf.form == "basis":
            if gf.grid is None:
                raise ConfigurationError(
                    "time-domain modes need a grid; pass want_modes=False")
            t = gf.grid.times
            b_in_s = gf.basis_in_s.sample(t)
            b_out_r = gf.basis_out_r.sample(t)
            result_modes["modes_in_s"] = in_vecs @ b_in_s
            result_modes["modes_out_r"] = out_vecs @ b_out_r
            if modes_out_s is not None:
                result_modes["modes_out_s"] = modes_out_s @ gf.basis_out_s.sample(t)
            if modes_in_r is not None:
                result_modes["modes_in_r"] = modes_in_r @ gf.basis_in_r.sample(t)
        else:
            result_modes["modes_in_s"] = in_vecs / w_in
            result_modes["modes_out_r"] = out_vecs / w_out
            if modes_out_s is not None:
                result_modes["modes_out_s"] = modes_out_s / w_out
            if modes_in_r is not None:
                result_modes["modes_in_r"] = modes_in_r / w_in

    sel = float(rho[0] ** 4 / sum_rho_sq) if sum_rho_sq > 0.0 else 0.0
    sep = float(rho[0] ** 2 / sum_rho_sq) if sum_rho_sq > 0.0 else 0.0
    return SchmidtResult(
        rho=rho, tau_abs=tau_abs, tau_phase=tau_phase, ce=rho ** 2,
        selectivity=sel, separability=sep,
        sum_rho_sq=sum_rho_sq, rho_full=rho_full, tau_source=tau_source,
        t_in=t_in, t_out=t_out, **result_modes,
    )


def _delta_applicable(gf: GreenFunction) -> bool:
    return gf.t_out.size == gf.t_in.size and \
        abs(gf.dt_out - gf.dt_in) <= 1e-12 * gf.dt_in


def _apply_grid(gf: GreenFunction, name: str, vecs: np.ndarray,
                w_from: float, w_to: float, adjoint: bool) -> np.ndarray:
    """Apply a grid block to weighted unit vectors, returning weighted
    unit-normalized images times their amplitudes."""
    from .gf_numeric import apply_block
    out = np.empty((vecs.shape[0],
                    gf.t_in.size if adjoint else gf.t_out.size), dtype=complex)
    for n in range(vecs.shape[0]):
        func = vecs[n] / w_from
        img = apply_block(gf, name, func, adjoint=adjoint)
        out[n] = img * w_to
    return out


def _tau_from_ss(gf: GreenFunction, in_vecs: np.ndarray,
                 w_in: float, w_out: float):
    """``G_ss phi_n = tau_n* Phi_n`` with unit ``Phi_n``."""
    if gf.form == "basis":
        imgs = (gf.g_ss @ in_vecs.T).T
    else:
        imgs = _apply_grid(gf, "ss", in_vecs, w_in, w_out, adjoint=False)
    n = imgs.shape[0]
    tau_abs = np.linalg.norm(imgs, axis=1)
    tau_phase = np.zeros(n)
    out = np.zeros_like(imgs)
    for k in range(n):
        if tau_abs[k] <= 1e-300:
            continue
        ph = _canonical_phase(imgs[k])
        out[k] = imgs[k] / (tau_abs[k] * ph)
        # imgs = tau* Phi with Phi canonical, so tau* carries the phase ph
        tau_phase[k] = -np.angle(ph)
    return tau_abs, tau_phase, out


def _tau_from_rr(gf: GreenFunction, out_vecs: np.ndarray,
                 w_in: float, w_out: float):
    """``G_rr^H Psi_n = tau_n* psi_n`` with unit ``psi_n``."""
    if gf.form == "basis":
        imgs = (gf.g_rr.conj().T @ out_vecs.T).T
    else:
        imgs = _apply_grid(gf, "rr", out_vecs, w_out, w_in, adjoint=True)
    n = imgs.shape[0]
    tau_abs = np.linalg.norm(imgs, axis=1)
    tau_phase = np.zeros(n)
    out = np.zeros_like(imgs)
    for k in range(n):
        if tau_abs[k] <= 1e-300:
            continue
        ph = _canonical_phase(imgs[k])
        out[k] = imgs[k] / (tau_abs[k] * ph)
        tau_phase[k] = -np.angle(ph)
    return tau_abs, tau_phase, out


def beamsplitter_apply(result: SchmidtResult, coeffs_r: np.ndarray,
                       coeffs_s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Mode-wise beamsplitter action of the medium.

    In the paired Schmidt bases each mode transforms independently::

        out_r_n = tau_n in_r_n + rho_n in_s_n
        out_s_n = tau_n in_s_n - rho_n in_r_n

    Requires an (up to numerical noise) real transmission phase, which holds
    for a real coupling and pump; otherwise the simple quadrature form above
    does not apply and an error is raised.
    """
    coeffs_r = np.asarray(coeffs_r, dtype=complex)
    coeffs_s = np.asarray(coeffs_s, dtype=complex)
    n = result.rho.size
    if coeffs_r.shape != (n,) or coeffs_s.shape != (n,):
        raise DataError(f"coefficient vectors must have length {n}")
    if np.any(np.abs(result.tau_phase) > _PHASE_TOL):
        raise UnsupportedConfigurationError(
            "transmission phases are not real within tolerance; the "
            "quadrature beamsplitter form does not apply"
        )
    tau = result.tau_abs
    rho = result.rho
    return tau * coeffs_r + rho * coeffs_s, tau * coeffs_s - rho * coeffs_r


def shape_fidelity(mode_a: np.ndarray, mode_b: np.ndarray,
                   dt_a: float, dt_b: float) -> float:
    """Maximum squared overlap of two mode shapes over a relative delay.

    Both modes must share the sampling step.  The discrete cross-correlation
    is scanned for its peak magnitude, refined with a three-point parabola,
    and normalized by the mode energies, giving a number in [0, 1] that is
    insensitive to global phase and to any time offset between the grids.
    """
    if not math.isclose(dt_a, dt_b, rel_tol=1e-9):
        raise ConfigurationError("modes must share one sampling step")
    a = np.asarray(mode_a, dtype=complex)
    b = np.asarray(mode_b, dtype=complex)
    ea = float(np.sum(np.abs(a) ** 2))
    eb = float(np.sum(np.abs(b) ** 2))
    if ea == 0.0 or eb == 0.0:
        return 0.0
    corr = np.correlate(b, a, mode="full")
    mags = np.abs(corr)
    k = int(np.argmax(mags))
    peak = mags[k]
    if 0 < k < mags.size - 1:
        y0, y1, y2 = mags[k - 1], mags[k], mags[k + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom < -1e-30 * max(peak, 1.0):
            delta = 0.5 * (y0 - y2) / denom
            if abs(delta) <= 1.0:
                peak = y1 - 0.25 * (y0 - y2) * delta
    return float(min(1.0, peak ** 2 / (ea * eb)))


# ---------------------------------------------------------------------------
# frequency-domain view


@dataclass(frozen=True)
class FrequencyKernel:
    """One block transformed to frequency axes.

    Convention: ``K(w, w') = int int e^{i w t} K(t, t') e^{-i w' t'} dt dt'``.
    """

    values: np.ndarray
    omega_out: np.ndarray
    omega_in: np.ndarray

    def __post_init__(self):
        for name in ("values", "omega_out", "omega_in"):
            v = np.asarray(getattr(self, name))
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def d_omega_out(self) -> float:
        return float(self.omega_out[1] - self.omega_out[0])

    @property
    def d_omega_in(self) -> float:
        return float(self.omega_in[1] - self.omega_in[0])

    def singular_values(self) -> np.ndarray:
        """Continuous-normalized singular values; the frequency measure is
        ``d omega / (2 pi)`` per side, so they match the time-domain ones."""
        w = math.sqrt(self.d_omega_out * self.d_omega_in) / (2.0 * math.pi)
        return np.linalg.svd(self.values, compute_uv=False) * w


def gf_fourier(gf: GreenFunction, block: str = "rs") -> FrequencyKernel:
    """Discrete double Fourier transform of one smooth block.

    Output times transform with ``e^{+i w t}``, input times with
    ``e^{-i w' t'}``, matching the analytic frequency kernel convention.
    Blocks carrying a delta line are rejected: a delta transforms to a flat
    phase sheet that a finite grid cannot represent.
    """
    if gf.form == "basis":
        gf = to_grid_form(gf)
    m = gf.block(block)
    if m is None:
        raise ConfigurationError(f"block {block} is not present")
    delta = gf.delta_rr if block == "rr" else gf.delta_ss if block == "ss" else None
    if delta is not None:
        raise UnsupportedConfigurationError(
            "cannot Fourier transform a block with a delta line; "
            "transform the smooth blocks only"
        )
    n_out, n_in = m.shape
    dt_out, dt_in = gf.dt_out, gf.dt_in
    w_out = 2.0 * math.pi * np.fft.fftshift(np.fft.fftfreq(n_out, dt_out))
    w_in = 2.0 * math.pi * np.fft.fftshift(np.fft.fftfreq(n_in, dt_in))
    # e^{+i w t} over rows: inverse transform times n, then boundary phase
    rows = np.fft.ifft(m, axis=0) * n_out * dt_out
    rows = np.fft.fftshift(rows, axes=0) * np.exp(1j * w_out * gf.t_out[0])[:, None]
    # e^{-i w' t'} over columns: forward transform, then boundary phase
    cols = np.fft.fft(rows, axis=1) * dt_in
    cols = np.fft.fftshift(cols, axes=1) * np.exp(-1j * w_in * gf.t_in[0])[None, :]
    return FrequencyKernel(values=cols, omega_out=w_out, omega_in=w_in)
