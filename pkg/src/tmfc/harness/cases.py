"""Pre-registered reproduction cases with stored expected values.

Each case pins one published table, figure study, or limit check to a
concrete sweep configuration and compares the result against expected
values at per-case tolerances.  Tolerances live with the case because the
sources carry different precision: three-significant-figure table entries
get relative bounds, one or two digit prints get absolute
half-print-step bounds, and curve studies get qualitative bounds (peak
value within 0.05, peak location within stated bands).
"""

from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from ..errors import ConfigurationError
from ..model import (
    FieldState,
    PumpShape,
    PumpSpec,
    RegimeParams,
    TemporalGrid,
)
from ..gf_analytic import (
    default_ssvm_grids,
    ecop_bessel_identity_error,
    ecop_output,
    ssvm_gf,
    ssvm_to_ecop_limit_check,
)
from ..schmidt import decompose
from ..solver import Propagator
from .sweep import SweepResult, SweepSpec, run_sweep


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class CaseReport:
    case_id: str
    passed: bool
    checks: Tuple[Check, ...]
    notes: Tuple[str, ...] = ()

    def lines(self) -> List[str]:
        out = [f"{self.case_id}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            out.append(f"  [{'ok' if c.ok else 'FAIL'}] {c.name}: {c.detail}")
        for n in self.notes:
            out.append(f"  note: {n}")
        return out


def _report(case_id: str, checks: Sequence[Check],
            notes: Sequence[str] = ()) -> CaseReport:
    return CaseReport(case_id=case_id, passed=all(c.ok for c in checks),
                      checks=tuple(checks), notes=tuple(notes))


def _rel_check(name: str, measured: float, target: float, tol: float) -> Check:
    err = abs(measured / target - 1.0)
    return Check(name, err <= tol,
                 f"measured {measured:.5g}, target {target:g}, "
                 f"rel err {err:.2e} (tol {tol:g})")


def _abs_check(name: str, measured: float, target: float, tol: float) -> Check:
    err = abs(measured - target)
    return Check(name, err <= tol,
                 f"measured {measured:.5g}, target {target:g}, "
                 f"abs err {err:.2e} (tol {tol:g})")


# ---------------------------------------------------------------------------
# low-conversion table and figure cases

_GBAR_WEAK = 0.01

_LOW_CE_SETUPS = {
    "table1-a": ((1.0, -1.0, 1.0), PumpShape.GAUSSIAN.value, 1.0),
    "table1-b": ((4.0, 2.0, 3.0), PumpShape.GAUSSIAN.value, 1.0),
    "table1-c": ((3.5, 1.5, 1.5), PumpShape.GAUSSIAN.value, 1.0),
    "table1-d": ((3.5, 1.5, 1.0), PumpShape.GAUSSIAN.value, 1.0),
    "fig2": ((8.0, 4.0, 6.0), PumpShape.GAUSSIAN.value, 0.707),
    "fig3a": ((1.0, -1.0, 1.0), PumpShape.GAUSSIAN.value, 0.1),
    "fig3b": ((2.0, 0.0, 0.0), PumpShape.GAUSSIAN.value, 0.1),
    "fig5": ((1.0, -1.0, 1.0), PumpShape.HERMITE_GAUSS_1.value, 0.1),
}

# published CE ratios (relative to the leading mode) and separabilities
_TABLE1_RATIOS = {
    "table1-a": (1.0, 0.306, 0.088, 0.037),
    "table1-b": (1.0, 0.275, 0.064, 0.033),
    "table1-c": (1.0, 0.306, 0.088, 0.037),
    "table1-d": (1.0, 0.342, 0.115, 0.047),
}
_SEPARABILITY = {
    "table1-a": 0.646, "table1-b": 0.676, "table1-c": 0.646,
    "table1-d": 0.610, "fig2": 0.913, "fig3a": 0.967, "fig3b": 0.967,
    "fig5": 0.936,
}


def low_ce_spec(case_id: str) -> SweepSpec:
    (br, bs, bp), shape, tau_p = _LOW_CE_SETUPS[case_id]
    params = RegimeParams(beta_r=br, beta_s=bs, beta_p=bp).with_gamma_bar(_GBAR_WEAK)
    return SweepSpec(params=params, pump=PumpSpec(shape=shape, tau_p=tau_p),
                     engine="low-ce", n_report=8)


def _run_low_ce(case_id: str, workers: int) -> Tuple[SweepResult, dict]:
    result = run_sweep(low_ce_spec(case_id), workers=workers)
    record = result.records[0]
    if record["error"]:
        raise ConfigurationError(f"{case_id} evaluation failed: {record['error']}")
    return result, record


def _case_table1(case_id: str, workers: int = 1):
    result, record = _run_low_ce(case_id, workers)
    ce = np.asarray(record["ce"])
    ratios = ce[:4] / ce[0]
    checks = [
        _rel_check(f"CE ratio {i + 1}", ratios[i], target, 0.02)
        for i, target in enumerate(_TABLE1_RATIOS[case_id])
    ]
    checks.append(_rel_check("separability", record["separability"],
                             _SEPARABILITY[case_id], 0.02))
    return result, _report(case_id, checks)


def _case_fig2(workers: int = 1):
    result, record = _run_low_ce("fig2", workers)
    ce = np.asarray(record["ce"])
    ratios = ce[:4] / ce[0]
    # two-digit prints: absolute half-print-step bounds
    checks = [
        _abs_check("CE ratio 2", ratios[1], 0.029, 5e-4),
        _abs_check("CE ratio 3", ratios[2], 0.028, 5e-4),
        _abs_check("CE ratio 4", ratios[3], 0.011, 5e-4),
        _rel_check("separability", record["separability"], 0.913, 0.02),
    ]
    return result, _report("fig2", checks)


def _case_fig3(case_id: str, workers: int = 1):
    result, record = _run_low_ce(case_id, workers)
    ce = np.asarray(record["ce"])
    ratios = ce[:4] / ce[0]
    checks = [
        _abs_check("CE ratio 2", ratios[1], 0.022, 5e-4),
        _abs_check("CE ratio 3", ratios[2], 0.006, 1e-3),
        _abs_check("CE ratio 4", ratios[3], 0.003, 1e-3),
        _rel_check("separability", record["separability"], 0.967, 0.02),
    ]
    notes = ("single-digit CE prints look truncated rather than rounded "
             "(converged ratio 3 is 0.0066); those carry full-print-step bounds",)
    return result, _report(case_id, checks, notes)


def _case_fig5(workers: int = 1):
    result, record = _run_low_ce("fig5", workers)
    checks = [
        _rel_check("separability", record["separability"], 0.936, 0.02),
    ]
    return result, _report("fig5", checks)


# ---------------------------------------------------------------------------
# exact-kernel sweep cases


def fig6_spec(step: float = 0.1, lo: float = 0.1, hi: float = 2.5) -> SweepSpec:
    """Selectivity vs coupling at the short-pump velocity-matched point."""
    count = int(round((hi - lo) / step)) + 1
    gbars = tuple(round(lo + i * step, 10) for i in range(count))
    params = RegimeParams(beta_r=2.0, beta_s=0.0, beta_p=0.0).with_gamma_bar(1.0)
    return SweepSpec(params=params, pump=PumpSpec(tau_p=0.1),
                     axes=(("gamma_bar", gbars),), engine="analytic-ssvm",
                     n_report=8)


def _peak(result: SweepResult, key: str = "selectivity"):
    vals = [(r[key], r) for r in result.records if not r["error"]]
    if not vals:
        raise ConfigurationError("no successful sweep points")
    best, record = max(vals, key=lambda p: p[0])
    return best, record


def _case_fig6(workers: int = 1):
    result = run_sweep(fig6_spec(), workers=workers)
    best, record = _peak(result)
    checks = [
        _abs_check("peak selectivity", best, 0.81, 0.05),
        Check("peak location", 0.8 <= record["gamma_bar"] <= 1.2,
              f"argmax gamma_bar {record['gamma_bar']:g} in [0.8, 1.2] "
              "(published location 1.0, band 20%)"),
    ]
    notes = ("curve study: qualitative bounds (peak value within 0.05, "
             "location within 20%); a finer sweep resolves the peak at "
             "gamma_bar 1.15",)
    return result, _report("fig6", checks, notes)


def ssvm_limit_spec() -> SweepSpec:
    gbars = tuple(round(0.9 + 0.05 * i, 10) for i in range(11))
    params = RegimeParams(beta_r=2.0, beta_s=0.0, beta_p=0.0).with_gamma_bar(1.0)
    return SweepSpec(params=params, pump=PumpSpec(tau_p=0.01),
                     axes=(("gamma_bar", gbars),), engine="analytic-ssvm",
                     n_report=8)


def _case_ssvm_limit(workers: int = 1):
    result = run_sweep(ssvm_limit_spec(), workers=workers)
    best, record = _peak(result)
    checks = [
        _abs_check("limiting peak selectivity", best, 0.85, 0.05),
    ]
    notes = ("short-pump limit converges to 0.826, below the published "
             "approximately 0.85; the qualitative 0.05 band covers it",)
    return result, _report("ssvm-limit-0.85", checks, notes)


def scup_opt_spec() -> SweepSpec:
    params = RegimeParams(beta_r=4.0, beta_s=0.0, beta_p=2.0).with_gamma_bar(1.0)
    return SweepSpec(
        params=params, pump=PumpSpec(tau_p=1.0),
        axes=(("tau_p", (0.5, 1.0, 1.5, 2.0)),
              ("gamma_bar", (0.45, 0.6, 0.75, 0.9, 1.05, 1.2, 1.35, 1.5))),
        engine="numeric", n_report=8)


def _case_scup_opt(workers: int = 1):
    result = run_sweep(scup_opt_spec(), workers=workers)
    best, record = _peak(result)
    checks = [
        _abs_check("peak selectivity", best, 0.70, 0.05),
        Check("peak pump width", 1.0 <= record["tau_p"] <= 2.0,
              f"argmax tau_p {record['tau_p']:g} in [1.0, 2.0] "
              "(published location 1.5; the ridge is flat)"),
        Check("peak coupling", 0.6 <= record["gamma_bar"] <= 0.9,
              f"argmax gamma_bar {record['gamma_bar']:g} in [0.6, 0.9] "
              "(published location 0.75)"),
    ]
    notes = ("curve study: qualitative bounds; the converged optimum sits "
             "at tau_p 1.0, gamma_bar 0.9 with peak 0.69-0.70",)
    return result, _report("scup-opt", checks, notes)


def _case_betap_symmetry(workers: int = 1):
    params = RegimeParams(beta_r=4.0, beta_s=0.0, beta_p=2.0).with_gamma_bar(_GBAR_WEAK)
    spec = SweepSpec(params=params, pump=PumpSpec(tau_p=0.5),
                     axes=(("beta_p", (0.5, 1.0, 1.5, 2.5, 3.0, 3.5)),),
                     engine="low-ce", n_report=8)
    result = run_sweep(spec, workers=workers)
    by_bp = {r["beta_p"]: r for r in result.records if not r["error"]}
    checks = []
    for delta in (0.5, 1.0, 1.5):
        lo = by_bp[2.0 - delta]["selectivity"] / _GBAR_WEAK ** 2
        hi = by_bp[2.0 + delta]["selectivity"] / _GBAR_WEAK ** 2
        checks.append(_abs_check(f"S/gbar^2 mirror delta={delta:g}", hi, lo, 1e-3))
    return result, _report("betap-symmetry", checks)


def _case_chirp_invariance(workers: int = 1):
    from ..model import QuadraticChirp

    params = RegimeParams(beta_r=1.0, beta_s=0.0, beta_p=0.0).with_gamma_bar(1.0)
    plain = PumpSpec(tau_p=1.0)
    chirped = replace(plain, chirp=QuadraticChirp(5.0))
    t_out, t_in = default_ssvm_grids(params, plain)
    rho0 = decompose(ssvm_gf(params, plain, t_out, t_in), want_modes=False).rho_full
    rho1 = decompose(ssvm_gf(params, chirped, t_out, t_in), want_modes=False).rho_full
    n = min(rho0.size, rho1.size)
    diff = float(np.max(np.abs(rho0[:n] - rho1[:n])))
    checks = [
        Check("spectrum invariance", diff <= 1e-6,
              f"max |delta rho| {diff:.2e} (tol 1e-6) over {n} values"),
    ]
    payload = {"max_abs_diff": diff, "n_values": int(n)}
    return payload, _report("chirp-invariance", checks)


def _case_ecop_limit(workers: int = 1):
    rows = ssvm_to_ecop_limit_check(beta_rs_values=(0.1, 0.03, 0.01, 3e-3, 1e-3))
    errs = [err for _, err in rows]
    checks = [
        Check("limit convergence", all(a > b for a, b in zip(errs, errs[1:])),
              "quadrature error decreases along beta_rs = "
              + ", ".join(f"{b:g}" for b, _ in rows)),
        _abs_check("limit error at beta_rs=1e-3", errs[-1], 0.0, 1e-2),
    ]
    for g in (0.5, 2.0, 10.0):
        err = ecop_bessel_identity_error(g)
        checks.append(Check(f"band integral identity g={g:g}", err <= 1e-8,
                            f"residual {err:.2e} (tol 1e-8)"))
    params = RegimeParams(beta_r=0.3, beta_s=0.3, beta_p=1.0, gamma=1.2)
    pump = PumpSpec(tau_p=0.5)
    grid = TemporalGrid(-6.0, 6.0, 2048, 400)
    t = grid.times
    a_r0 = np.exp(-((t - 0.3) ** 2)) * (1.0 + 0j)
    a_s0 = (t + 0.1) * np.exp(-(t ** 2) / 0.8) * (1.0 + 0j)
    out = Propagator(params, pump, grid).run(a_r0, a_s0)
    ref = ecop_output(params, pump, grid, FieldState(a_r=a_r0, a_s=a_s0))
    err_r = np.linalg.norm(out.a_r - ref.a_r) / np.linalg.norm(ref.a_r)
    err_s = np.linalg.norm(out.a_s - ref.a_s) / np.linalg.norm(ref.a_s)
    checks.append(Check("solver vs closed form", max(err_r, err_s) <= 1e-4,
                        f"rel L2 r {err_r:.2e}, s {err_s:.2e} (tol 1e-4)"))
    payload = {"limit_rows": [[b, e] for b, e in rows],
               "solver_rel_l2": [float(err_r), float(err_s)]}
    return payload, _report("ecop-limit", checks)


# ---------------------------------------------------------------------------
# catalog

CATALOG: Dict[str, Tuple[str, Callable]] = {
    "table1-a": ("weak-conversion CE table, pump-matched r channel",
                 lambda workers=1: _case_table1("table1-a", workers)),
    "table1-b": ("weak-conversion CE table, pump between channels",
                 lambda workers=1: _case_table1("table1-b", workers)),
    "table1-c": ("weak-conversion CE table, pump-matched s channel",
                 lambda workers=1: _case_table1("table1-c", workers)),
    "table1-d": ("weak-conversion CE table, detuned pump",
                 lambda workers=1: _case_table1("table1-d", workers)),
    "fig2": ("near-separable weak kernel", _case_fig2),
    "fig3a": ("short-pump weak kernel, r matched",
              lambda workers=1: _case_fig3("fig3a", workers)),
    "fig3b": ("short-pump weak kernel, s matched",
              lambda workers=1: _case_fig3("fig3b", workers)),
    "fig5": ("first-order Hermite-Gaussian pump", _case_fig5),
    "fig6": ("selectivity vs coupling, exact kernel", _case_fig6),
    "scup-opt": ("symmetric counter-propagating optimum", _case_scup_opt),
    "ssvm-limit-0.85": ("short-pump limiting selectivity", _case_ssvm_limit),
    "betap-symmetry": ("pump-slowness reflection symmetry", _case_betap_symmetry),
    "chirp-invariance": ("pump chirp leaves the spectrum unchanged",
                         _case_chirp_invariance),
    "ecop-limit": ("equal-slowness limits and identities", _case_ecop_limit),
}


def case_ids() -> List[str]:
    return list(CATALOG)


def reproduce(case_id: str, workers: int = 1):
    """Run one pre-registered case; returns (payload, report).

    The payload is the underlying sweep result where the case is a sweep,
    or a small dictionary of measured numbers for the limit/identity cases.
    """
    if case_id not in CATALOG:
        raise ConfigurationError(
            f"unknown case {case_id!r}; known cases: {', '.join(CATALOG)}")
    _, runner = CATALOG[case_id]
    return runner(workers=workers)
