"""Conical expansion extraction, synthesis, and cutoff extension."""

from __future__ import annotations

import numpy as np
import pytest

from conic_lmcf import (
    AsymptoticExpansion,
    ExceptionalWeightError,
    ExponentTable,
    FlatTorus,
    LaplaceTypeSpec,
    ModeSolution,
    RadialGrid,
    RadiusFunction,
    ValidationError,
    extend_asymptotic,
    extract_asymptotics,
    harvey_lawson_torus,
    laplace_of_terms,
    smooth_cutoff,
    solve_mode,
    synthesize,
)

HEX_METRIC = np.array([[2.0, 1.0], [1.0, 2.0]]) / 3.0


@pytest.fixture(scope="module")
def table():
    return ExponentTable.for_link(FlatTorus(HEX_METRIC), m=3, alpha_max=4.0)


def fake_solution(grid, profile, lam=6.0):
    values = np.stack([np.zeros_like(grid.nodes), profile])
    return ModeSolution(grid, np.array([0.0, 1.0]), values, lam)


def test_pure_quadratic_recovered(table):
    grid = RadialGrid(R=1.0, n_cells=400)
    sol = fake_solution(grid, 3.0 * grid.nodes**2, lam=6.0)
    exp = extract_asymptotics(sol, table, gamma=2.4)
    assert len(exp.terms) == 1
    alpha, k, coeff = exp.terms[0]
    assert alpha == 2.0 and k == 0
    assert abs(coeff - 3.0) < 1e-8
    assert exp.remainder_sup < 1e-10


def test_above_threshold_decay_gives_empty_terms(table):
    grid = RadialGrid(R=1.0, n_cells=400)
    sol = fake_solution(grid, grid.nodes**2.5, lam=0.0)
    exp = extract_asymptotics(sol, table, gamma=2.4)
    assert exp.terms == []
    assert 2.35 < exp.remainder_rate < 2.65


def test_round_trip_synthesis_random(table):
    rng = np.random.default_rng(42)
    grid = RadialGrid(R=1.0, n_cells=600)
    candidates = [(0.0, 0), (1.0, 0), (2.0, 0)]
    for _ in range(8):
        chosen = [c for c in candidates if rng.random() < 0.7] or [(0.0, 0)]
        coeffs = rng.uniform(0.5, 2.0, size=len(chosen)) * rng.choice([-1, 1], len(chosen))
        terms = [(a, k, float(c)) for (a, k), c in zip(chosen, coeffs)]
        profile = synthesize(terms, grid.nodes)
        sol = fake_solution(grid, profile, lam=0.0)
        exp = extract_asymptotics(sol, table, gamma=2.4, mode_only=False)
        got = {round(a + 2 * k, 9): c for a, k, c in exp.terms}
        for a, k, c in terms:
            key = round(a + 2 * k, 9)
            assert key in got, f"missing exponent {key}"
            assert abs(got[key] - c) < 1e-7


def test_solver_output_has_constant_and_square_terms(table):
    grid = RadialGrid(R=1.0, n_cells=400)
    spec = LaplaceTypeSpec(lam=0.0, m=3)
    sol = solve_mode(spec, grid, T=0.1, dt=0.1 / 400,
                     forcing=lambda t, r: np.sqrt(r))
    exp = extract_asymptotics(sol, table, gamma=2.5)
    keys = [(a, k) for a, k, _ in exp.terms]
    assert (0.0, 0) in keys
    assert (0.0, 1) in keys
    assert all(abs(c) > 1e-8 for _, _, c in exp.terms)
    assert exp.remainder_rate >= 2.35


def test_exceptional_gamma_rejected(table):
    grid = RadialGrid(R=1.0, n_cells=200)
    sol = fake_solution(grid, grid.nodes**2, lam=6.0)
    with pytest.raises(ExceptionalWeightError):
        extract_asymptotics(sol, table, gamma=2.0)
    # 4 is exceptional only through lifting: 0 + 2*2
    with pytest.raises(ExceptionalWeightError):
        extract_asymptotics(sol, table, gamma=4.0)


def test_ill_conditioned_basis_warns():
    from conic_lmcf.exponents import ExponentEntry

    # two harmonics whose orders differ by 0.03 — closer than the resolvable
    # spacing — must trigger the conditioning warning
    lam_close = 2.03 * (2.03 + 1.0)
    entries = [ExponentEntry(0.0, 1, 0.0), ExponentEntry(2.0, 6, 6.0),
               ExponentEntry(2.03, 1, lam_close)]
    tight = ExponentTable(3, entries, -4.0, 4.0)
    grid = RadialGrid(R=1.0, n_cells=300)
    sol = fake_solution(grid, grid.nodes**2, lam=6.0)
    with pytest.warns(UserWarning, match="close"):
        extract_asymptotics(sol, tight, gamma=2.4, mode_only=False)


def test_expansion_validation():
    with pytest.raises(ValidationError):
        AsymptoticExpansion([(2.0, 0, 1.0)], remainder_rate=2.5,
                            remainder_sup=0.0, gamma=1.5)  # term above gamma
    with pytest.raises(ValidationError):
        AsymptoticExpansion([(-1.0, 0, 1.0)], remainder_rate=2.5,
                            remainder_sup=0.0, gamma=2.0)  # negative order


def test_laplace_of_terms_drops_constants_and_shifts_lifts():
    # Δ(c · r^{α+2k}) on the λ-mode: exponent drops by 2, k by 1
    out = laplace_of_terms([(0.0, 1, 1.0)], lam=0.0, m=3)
    assert len(out) == 1
    alpha, k, coeff = out[0]
    assert alpha == 0.0 and k == 0
    # Δ r² = e(e+m-2) - λ = 2*3 - 0 = 6 on the constant mode
    assert abs(coeff - 6.0) < 1e-12
    assert laplace_of_terms([(1.0, 0, 2.0)], lam=2.0, m=3) == []


def test_extend_asymptotic_cutoff_profile():
    rho = RadiusFunction(R=1.0)
    r = np.geomspace(1e-4, 1.0, 2000)
    vals = extend_asymptotic([(0.0, 1, 1.0)], rho(r), cutoff=0.5)
    inner = r < 0.25
    outer = r > 0.5
    assert np.max(np.abs(vals[inner] - rho(r[inner]) ** 2)) < 1e-12
    assert np.max(np.abs(vals[outer])) == 0.0
    # transition region is where the cutoff actually varies
    mid = (r >= 0.25) & (r <= 0.5)
    assert np.any((vals[mid] > 0) & (vals[mid] < rho(r[mid]) ** 2))


def test_extend_zero_is_zero():
    rho = RadiusFunction(R=1.0)
    r = np.geomspace(1e-4, 1.0, 100)
    assert np.max(np.abs(extend_asymptotic([], rho(r), cutoff=0.5))) == 0.0


def test_commutator_supported_in_transition_annulus(table):
    # applying the mode operator to the extension, minus the extension of the
    # term-wise Laplacian, must vanish outside [cutoff/2, cutoff]
    grid = RadialGrid(R=1.0, n_cells=2000, q=1.0)  # uniform for clean stencils
    r = grid.nodes
    rho_vals = r.copy()  # radius function equals r below R/2 anyway
    cutoff = 0.5
    terms = [(0.0, 1, 1.0)]
    spec = LaplaceTypeSpec(lam=0.0, m=3)

    from conic_lmcf import apply_radial_operator

    ext = extend_asymptotic(terms, rho_vals, cutoff)
    lap_ext = apply_radial_operator(spec, grid, ext)
    ext_lap = extend_asymptotic(laplace_of_terms(terms, 0.0, 3), rho_vals, cutoff)
    comm = lap_ext - ext_lap
    inside = (r > 1.2 * grid.r_min) & (r < cutoff / 2 * 0.98)
    outside = r > cutoff * 1.02
    scale = np.max(np.abs(ext_lap))
    assert np.max(np.abs(comm[inside])) < 5e-4 * scale   # truncation only
    assert np.max(np.abs(comm[outside])) < 1e-12 * scale


def test_terms_respect_gamma_bound(table):
    grid = RadialGrid(R=1.0, n_cells=400)
    spec = LaplaceTypeSpec(lam=0.0, m=3)
    sol = solve_mode(spec, grid, T=0.05, dt=0.05 / 100,
                     forcing=lambda t, r: np.sqrt(r))
    for gamma in (1.5, 2.5):
        exp = extract_asymptotics(sol, table, gamma=gamma)
        assert all(a + 2 * k < gamma for a, k, _ in exp.terms)


def test_time_index_selects_frame(table):
    grid = RadialGrid(R=1.0, n_cells=300)
    spec = LaplaceTypeSpec(lam=0.0, m=3)
    sol = solve_mode(spec, grid, T=0.1, dt=0.01, forcing=lambda t, r: np.sqrt(r))
    early = extract_asymptotics(sol, table, gamma=1.5, time_index=3)
    late = extract_asymptotics(sol, table, gamma=1.5, time_index=-1)
    assert early.time < late.time
    a_early = early.terms[0][2] if early.terms else 0.0
    a_late = late.terms[0][2] if late.terms else 0.0
    assert a_late > a_early > 0.0  # forced solution keeps growing


def test_smooth_cutoff_endpoints():
    x = np.linspace(0.0, 1.0, 101)
    chi = smooth_cutoff(x, 0.25, 0.5)
    assert np.all(chi[x <= 0.25] == 1.0)
    assert np.all(chi[x >= 0.5] == 0.0)
    assert np.all(np.diff(chi) <= 1e-12)
