import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import system_for
from lowdim.elliptic import (
    CompatibilityError,
    EllipticProblem,
    check_compatibility,
    convergence_study,
    group_poincare_constants,
    poincare_constant,
    residual,
    solve_elliptic,
    solve_system,
)
from lowdim.regularity import continuity_check
from lowdim.structure import builtin

F_CROSS = {1: lambda xi: xi[:, 0], 2: 0.0}
ORACLE_CROSS = {1: lambda xi: -xi[:, 0] ** 3 / 6 + xi[:, 0] / 2, 2: 0.0}


def r2(xi):
    return xi[:, 0] ** 2 + xi[:, 1] ** 2


def manufactured_u(xi):
    return np.cos(np.pi * r2(xi))


def manufactured_f(xi):
    return 4 * np.pi * np.sin(np.pi * r2(xi)) + 4 * np.pi**2 * r2(xi) * np.cos(np.pi * r2(xi))


# ---------------------------------------------------------------- compatibility

def test_compatibility_examples():
    assert abs(check_compatibility(F_CROSS, builtin("cross_segments"))[0]) < 1e-14
    res = check_compatibility(1.0, builtin("disc_plus_segment"))
    assert sorted(res) == pytest.approx(sorted([np.pi, 2.0]), abs=1e-12)
    assert check_compatibility(0.0, builtin("cross_discs")) == [0.0]


def test_incompatible_rejected():
    with pytest.raises(CompatibilityError) as info:
        solve_elliptic(EllipticProblem(builtin("segment"), 1.0, 0.1))
    assert info.value.residuals == [pytest.approx(2.0)]


@given(st.floats(0.01, 10), st.sampled_from([0, 1]))
def test_indicator_shift_is_rejected(c, k):
    """Adding a group indicator to a compatible f breaks compatibility and is refused."""
    s = builtin("disc_plus_segment")
    f = {1: lambda xi: xi[:, 0], 2: 0.0}
    cid = [1, 2][k]
    g = dict(f)
    g[cid] = (lambda xi, base=f[cid]: (base(xi) if callable(base) else base) + c)
    with pytest.raises(CompatibilityError):
        solve_elliptic(EllipticProblem(s, g, 0.2))


# ---------------------------------------------------------------- solve

def test_zero_rhs_gives_zero():
    sol = solve_elliptic(EllipticProblem(builtin("cross_discs"), 0.0, 0.2))
    assert np.abs(sol.u.values).max() == 0.0


@pytest.mark.parametrize("name,f", [
    ("cross_segments", F_CROSS),
    ("cross_discs", manufactured_f),
    ("disc_plus_segment", {1: lambda xi: xi[:, 0], 2: manufactured_f}),
])
def test_weak_identity_and_means(name, f):
    sysm = system_for(name, 0.1)
    sol = solve_system(sysm, sysm.load(f))
    F = sol.load.values
    assert sol.residual <= 1e-10 * np.linalg.norm(F)
    assert max(abs(m) for m in sol.group_means) < 1e-11
    # every P1 test field: v^T (K u - F) = 0 once v has zero group means
    rng = np.random.default_rng(0)
    V = rng.standard_normal((sysm.n_dofs, 20))
    I = sysm.dofmap.indicators()
    C = np.asarray(sysm.constraint_matrix())
    V -= I @ np.linalg.solve(C @ I, C @ V)
    r = V.T @ (sysm.K @ sol.u.values - F)
    assert np.abs(r).max() <= 1e-10 * np.linalg.norm(F) * np.linalg.norm(V, axis=0).max()


def test_decoupled_disc_plus_segment():
    """Forcing on the segment only leaves the disc at zero and matches a lone 1D solve."""
    s = builtin("disc_plus_segment")
    f = {1: lambda xi: np.sin(np.pi * xi[:, 0]), 2: 0.0}
    sol = solve_elliptic(EllipticProblem(s, f, 0.1))
    assert np.abs(sol.u.local(2)).max() < 1e-13
    seg = solve_elliptic(EllipticProblem(builtin("segment"), {1: f[1]}, 0.1))
    a = sol.u.local(1)[np.argsort(sol.system.meshset[1].vertices[:, 0])]
    b = seg.u.local(1)[np.argsort(seg.system.meshset[1].vertices[:, 0])]
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_cross_solution_close_to_oracle():
    sol = solve_elliptic(EllipticProblem(builtin("cross_segments"), F_CROSS, 0.05))
    cm = sol.system.meshset[1]
    exact = ORACLE_CROSS[1](cm.vertices)
    assert np.abs(sol.u.local(1) - exact).max() < 1e-3
    assert np.abs(sol.u.local(2)).max() < 1e-3


def test_naive_gluing_has_unit_jump():
    sysm = system_for("cross_discs", 0.1)
    glued = {1: manufactured_u(sysm.meshset[1].vertices), 2: np.zeros(sysm.meshset[2].n_vertices)}
    assert continuity_check(glued, sysm).max_jump == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------- residual

def test_residual_examples():
    sysm = system_for("cross_segments", 0.1)
    F = sysm.load(F_CROSS)
    sol = solve_system(sysm, F)
    C = sysm.constraint_matrix()
    assert residual(sysm.K, sol.u, F, C) < 1e-10
    shifted = sol.u.values + 3.0 * sysm.dofmap.group_indicator(0)
    assert residual(sysm.K, shifted, F, C) == pytest.approx(residual(sysm.K, sol.u, F, C), abs=1e-12)
    Fv = F.values
    c = np.asarray(C).ravel()
    PF = Fv - (Fv @ c) / (c @ c) * c
    assert residual(sysm.K, np.zeros(sysm.n_dofs), F, C) == pytest.approx(np.linalg.norm(PF), rel=1e-14)


# ---------------------------------------------------------------- Poincare

def test_segment_poincare():
    C = group_poincare_constants(system_for("segment", 0.02))[0]
    assert C == pytest.approx(4 / np.pi**2, rel=0.02)


def test_disc_poincare():
    C = group_poincare_constants(system_for("disc", 0.05))[0]
    assert C == pytest.approx(1 / 1.8411837813**2, rel=0.05)


def test_cross_segments_poincare_matches_segment():
    """The first nonconstant mode of the cross is the odd segment mode, so the constants agree."""
    a = group_poincare_constants(system_for("segment", 0.1))[0]
    b = group_poincare_constants(system_for("cross_segments", 0.1))[0]
    assert b == pytest.approx(a, rel=1e-10)


def test_poincare_eigvec_attains_bound():
    sysm = system_for("segment", 0.05)
    idx = sysm.dofmap.group_dofs(0)
    C, v = poincare_constant(sysm.K, sysm.M, idx)
    assert v @ (sysm.M @ v) == pytest.approx(C * (v @ (sysm.K @ v)), rel=1e-10)


@pytest.mark.parametrize("name", ["cross_segments", "disc_plus_segment", "cross_discs"])
def test_weak_poincare_random_fields(name, rng):
    sysm = system_for(name, 0.1)
    consts = group_poincare_constants(sysm)
    dm = sysm.dofmap
    for _ in range(200):
        v = rng.standard_normal(sysm.n_dofs)
        for k in range(dm.n_groups):
            idx = dm.group_dofs(k)
            w = np.zeros(sysm.n_dofs)
            w[idx] = v[idx]
            ind = dm.group_indicator(k)
            w -= (ind @ (sysm.M @ w)) / (ind @ (sysm.M @ ind)) * ind
            assert w @ (sysm.M @ w) <= consts[k] * (w @ (sysm.K @ w)) * (1 + 1e-10)


# ---------------------------------------------------------------- convergence

def test_cross_convergence_rates():
    p = EllipticProblem(builtin("cross_segments"), F_CROSS, 0.2)
    tab = convergence_study(p, [0.2, 0.1, 0.05, 0.025], ORACLE_CROSS)
    assert all(1.8 <= r <= 2.2 for r in tab.rates), tab.rates
    assert len(tab.rows()) == 4


def test_manufactured_disc_rates():
    p = EllipticProblem(builtin("cross_discs"), manufactured_f, 0.2)
    tab = convergence_study(p, [0.2, 0.1, 0.05, 0.025], manufactured_u)
    assert all(1.7 <= r <= 2.3 for r in tab.rates), tab.rates


def test_self_oracle_zero_error():
    from lowdim.assembly import l2_error

    sol = solve_elliptic(EllipticProblem(builtin("cross_segments"), F_CROSS, 0.1))
    assert l2_error(sol.u, {1: lambda xi: _interp(sol, 1, xi), 2: lambda xi: _interp(sol, 2, xi)}) < 1e-14


def _interp(sol, cid, xi):
    cm = sol.system.meshset[cid]
    order = np.argsort(cm.vertices[:, 0])
    return np.interp(xi[:, 0], cm.vertices[order, 0], sol.u.local(cid)[order])


def test_brute_force_galerkin_fine():
    """Dense generalized solve with explicit zero-mean constraint agrees with the saddle system."""
    sysm = system_for("cross_segments", 0.05)
    F = sysm.load(F_CROSS).values
    K = sysm.K.toarray()
    c = sysm.M @ np.ones(sysm.n_dofs)
    # null-space basis of c^T via QR
    Q, _ = np.linalg.qr(np.column_stack([c, np.eye(sysm.n_dofs)[:, 1:]]))
    Z = Q[:, 1:]
    y = np.linalg.solve(Z.T @ K @ Z, Z.T @ F)
    sol = solve_system(sysm, F)
    np.testing.assert_allclose(Z @ y, sol.u.values, atol=1e-10)
