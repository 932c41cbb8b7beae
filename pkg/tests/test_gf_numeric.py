"""Green-function container and numeric assembly tests."""

import numpy as np
import pytest

from tmfc import (
    BasisSpec,
    ConfigurationError,
    CoverageError,
    DataError,
    DeltaLine,
    GreenFunction,
    PumpSpec,
    RegimeParams,
    TruncationError,
    apply_block,
    assemble_gf,
    composite_matrix,
    decompose,
    default_basis_layout,
    grid_for_basis,
    leakage_report,
    to_grid_form,
    unitarity_defect,
)

PUMP = PumpSpec(tau_p=1.0)
SSVM = RegimeParams(beta_r=1.0, beta_s=0.0, beta_p=0.0).with_gamma_bar(0.5)


@pytest.fixture(scope="module")
def gf_small():
    return assemble_gf(SSVM, PUMP, n_r=24, n_s=24)


def test_basis_spec_sampling():
    spec = BasisSpec(n=6, width=0.7, center=1.2)
    t = np.linspace(-5.0, 8.0, 1301)
    dt = t[1] - t[0]
    b = spec.sample(t)
    assert b.shape == (6, t.size)
    gram = b @ b.T * dt
    assert np.max(np.abs(gram - np.eye(6))) < 1e-9
    lo, hi = spec.extent()
    # nearly all of every mode's energy inside the extent
    inside = (t >= lo) & (t <= hi)
    assert np.sum(b[5][~inside] ** 2) * dt < 1e-8


def test_default_basis_layout_geometry():
    layout = default_basis_layout(SSVM, PUMP)
    # s channel rides with the pump: pump-width basis around the pump
    assert np.isclose(layout["in_s"].width, PUMP.tau_p)
    assert np.isclose(layout["in_s"].center,
                      PUMP.center - SSVM.beta_sp * SSVM.L / 2.0)
    # output bases are delayed copies
    assert np.isclose(layout["out_r"].center - layout["in_r"].center,
                      SSVM.beta_r * SSVM.L)
    assert np.isclose(layout["out_s"].center - layout["in_s"].center,
                      SSVM.beta_s * SSVM.L)


def test_green_function_validation():
    with pytest.raises(ConfigurationError):
        GreenFunction(form="tensor", g_rs=np.eye(2))
    with pytest.raises(ConfigurationError):
        GreenFunction(form="grid")
    with pytest.raises(ConfigurationError):
        GreenFunction(form="grid", g_rs=np.eye(3))  # missing axes
    t = np.linspace(0.0, 1.0, 3)
    with pytest.raises(DataError):
        GreenFunction(form="grid", g_rs=np.eye(4), t_out=t, t_in=t)
    bad = np.eye(3)
    bad = bad + 0j
    bad_nan = bad.copy()
    bad_nan[0, 0] = np.nan
    with pytest.raises(DataError):
        GreenFunction(form="grid", g_rs=bad_nan, t_out=t, t_in=t)
    gf = GreenFunction(form="grid", g_rs=bad, t_out=t, t_in=t)
    assert gf.block("rs") is not None
    assert gf.block("sr") is None
    with pytest.raises(ConfigurationError):
        gf.block("g_rs")


def test_assembly_column_energies(gf_small):
    meta = gf_small.metadata
    # per-column conversion + transmission energies sum to about 1
    totals = meta["conv_energy_s"] + meta["trans_energy_s"]
    assert np.max(np.abs(totals - 1.0)) < 1e-6
    report = leakage_report(gf_small)
    assert report["max"] < 1e-2
    assert report["worst_side"] in ("r", "s")


def test_composite_unitarity(gf_small):
    u = composite_matrix(gf_small)
    n = 2 * 24
    assert u.shape == (n, n)
    assert unitarity_defect(gf_small) < 2e-3


def test_svd_reconstruction(gf_small):
    """The rs coefficient matrix is rebuilt from its own SVD to 1e-8."""
    m = gf_small.g_rs
    u, s, vh = np.linalg.svd(m)
    rebuilt = (u * s) @ vh
    assert np.linalg.norm(rebuilt - m) / np.linalg.norm(m) < 1e-8


def test_grid_synthesis_preserves_spectrum(gf_small):
    res_basis = decompose(gf_small, n_report=5, want_modes=False)
    res_grid = decompose(to_grid_form(gf_small), n_report=5, want_modes=False)
    assert np.max(np.abs(res_basis.rho - res_grid.rho)) < 1e-12


def test_truncation_guard():
    with pytest.raises(TruncationError):
        assemble_gf(SSVM, PUMP, n_r=6, n_s=6, tol_leak=1e-4)


def test_explicit_grid_must_cover_basis_tails():
    from tmfc import TemporalGrid

    layout = default_basis_layout(SSVM, PUMP, n_r=8, n_s=8)
    with pytest.raises(CoverageError):
        assemble_gf(SSVM, PUMP, grid=TemporalGrid(-2.0, 2.0, 512, 256),
                    layout=layout)


def test_grid_for_basis_resolves_highest_mode():
    layout = default_basis_layout(SSVM, PUMP, n_r=30, n_s=30)
    grid = grid_for_basis(SSVM, PUMP, layout)
    for spec in layout.values():
        lo, hi = spec.extent()
        assert grid.t_min <= lo and grid.t_max >= hi
        spec.sample(grid.times)  # passes the resolution check


def test_apply_block_basis_form(gf_small):
    rng = np.random.default_rng(3)
    v = rng.normal(size=24) + 1j * rng.normal(size=24)
    assert np.allclose(apply_block(gf_small, "rs", v), gf_small.g_rs @ v)
    assert np.allclose(apply_block(gf_small, "rs", v, adjoint=True),
                       gf_small.g_rs.conj().T @ v)
    with pytest.raises(ConfigurationError):
        apply_block(gf_small, "g_rs", v)


def test_apply_block_grid_delta_shift():
    """A pure delta line acts as the free transit delay."""
    t = np.linspace(-8.0, 8.0, 1024, endpoint=False)
    dt = t[1] - t[0]
    zero = np.zeros((t.size, t.size), dtype=complex)
    gf = GreenFunction(form="grid", g_rr=zero, t_out=t, t_in=t,
                       delta_rr=DeltaLine(delay=0.7, weight=1.0))
    v = np.exp(-t ** 2) * np.exp(0.3j * t)
    out = apply_block(gf, "rr", v)
    ref = np.exp(-(t - 0.7) ** 2) * np.exp(0.3j * (t - 0.7))
    assert np.max(np.abs(out - ref)) < 1e-9


def test_apply_block_adjoint_pairing():
    """<u, G v> equals <G^H u, v> under the grid quadrature."""
    rng = np.random.default_rng(11)
    t_out = np.linspace(-1.0, 3.0, 200)
    t_in = np.linspace(-2.0, 2.0, 160)
    m = rng.normal(size=(200, 160)) + 1j * rng.normal(size=(200, 160))
    gf = GreenFunction(form="grid", g_rs=m, t_out=t_out, t_in=t_in)
    u = rng.normal(size=200) + 1j * rng.normal(size=200)
    v = rng.normal(size=160) + 1j * rng.normal(size=160)
    lhs = np.vdot(u, apply_block(gf, "rs", v)) * gf.dt_out
    rhs = np.vdot(apply_block(gf, "rs", u, adjoint=True), v) * gf.dt_in
    assert np.isclose(lhs, rhs, rtol=1e-12)


def test_assembly_is_deterministic():
    a = assemble_gf(SSVM, PUMP, n_r=10, n_s=10, tol_leak=0.05)
    b = assemble_gf(SSVM, PUMP, n_r=10, n_s=10, tol_leak=0.05)
    assert np.array_equal(a.g_rs, b.g_rs)
    assert np.array_equal(a.g_ss, b.g_ss)
