"""Tests for the balance solver, rigidity, presets, and polynomial certificate."""

import cmath
import math

import numpy as np
import pytest

from maxface.balance import (
    GaugeFixing,
    balance_jacobian,
    default_gauge,
    dW_dQ_rank,
    force_vector,
    growth_gradient_of_W,
    newton_balance,
    polynomial_check,
    polynomial_check_scale,
    preset,
    preset_catenoid,
    preset_chm,
    preset_dihedral,
    preset_polynomial,
    rigidity,
    topology,
)
from maxface.configuration import Configuration, NeckId, neck_sizes, scalar_W
from maxface.errors import NoConvergence

from helpers import random_configuration


# ---------------------------------------------------------------------------
# Jacobian
# ---------------------------------------------------------------------------

def test_jacobian_catenoid_is_zero():
    cfg = preset_catenoid()
    J = balance_jacobian(cfg, neck_sizes(cfg))
    assert J.shape == (1, 1)
    assert J[0, 0] == 0j


def fd_jacobian(cfg, sizes, h=1e-6):
    necks = list(cfg.necks())
    N = len(necks)
    J = np.zeros((N, N), dtype=complex)
    flat = [z for row in cfg.p for z in row]
    for col in range(N):
        for sign, fac in ((1, 1.0), (-1, -1.0)):
            pert = list(flat)
            pert[col] += sign * h
            rows, pos = [], 0
            for nl in cfg.n:
                rows.append(tuple(pert[pos:pos + nl]))
                pos += nl
            J[:, col] += fac * force_vector(cfg.with_positions(rows), sizes) / (2 * h)
    return J


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(41)
    for _ in range(10):
        cfg = random_configuration(rng)
        sizes = neck_sizes(cfg)
        J = balance_jacobian(cfg, sizes)
        J_fd = fd_jacobian(cfg, sizes)
        scale = max(1.0, np.max(np.abs(J)))
        assert np.max(np.abs(J - J_fd)) < 1e-5 * scale


def test_jacobian_is_complex_linear():
    # holomorphic dependence: imaginary-step finite difference agrees too
    cfg = preset_chm(3)
    sizes = neck_sizes(cfg)
    J = balance_jacobian(cfg, sizes)
    h = 1e-6
    necks = list(cfg.necks())
    flat = [z for row in cfg.p for z in row]
    col = 2
    pert_p = list(flat)
    pert_m = list(flat)
    pert_p[col] += 1j * h
    pert_m[col] -= 1j * h

    def rebuild(vals):
        rows, pos = [], 0
        for nl in cfg.n:
            rows.append(tuple(vals[pos:pos + nl]))
            pos += nl
        return cfg.with_positions(rows)

    col_fd = (force_vector(rebuild(pert_p), sizes)
              - force_vector(rebuild(pert_m), sizes)) / (2j * h)
    assert np.max(np.abs(J[:, col] - col_fd)) < 1e-5 * max(1.0, np.max(np.abs(J)))


def test_jacobian_rank_chm2():
    cfg = preset_chm(2)
    report = rigidity(cfg)
    assert report.jacobian_rank == 1 == report.expected_rank
    assert report.is_rigid and report.balanced


# ---------------------------------------------------------------------------
# Newton balance
# ---------------------------------------------------------------------------

def test_newton_returns_balanced_input_unchanged():
    cfg = preset_chm(3)
    out = newton_balance(cfg)
    assert out.p == cfg.p


def test_newton_recovers_perturbed_chm3():
    cfg = preset_chm(3)
    rng = np.random.default_rng(7)
    rows = [list(row) for row in cfg.p]
    for k in range(3):
        rows[1][k] += 0.05 * cmath.exp(2j * math.pi * rng.uniform())
    perturbed = cfg.with_positions(rows)
    gauge = GaugeFixing(((NeckId(1, 1), 0j), (NeckId(2, 3), cfg.p[1][2])))
    recovered = newton_balance(perturbed, gauge, max_iter=10, tol=1e-12)
    sizes = neck_sizes(recovered)
    assert np.max(np.abs(force_vector(recovered, sizes))) <= 1e-12
    err = max(abs(a - b) for ra, rb in zip(recovered.p, cfg.p) for a, b in zip(ra, rb))
    assert err < 1e-10


def test_newton_unbalanceable_two_neck_level_reports_no_convergence():
    # two necks on one level repel; with both pinned the residual is fixed
    cfg = Configuration(L=2, n=(2,), p=((-1.0, 1.0),), Q=(-2.0, 2.0))
    with pytest.raises(NoConvergence) as err:
        newton_balance(cfg)
    assert err.value.residual == pytest.approx(1.0, abs=1e-14)


def test_newton_post_verified_by_independent_force_evaluation():
    cfg = preset_chm(4)
    rng = np.random.default_rng(13)
    rows = [list(row) for row in cfg.p]
    for k in range(4):
        rows[1][k] += 0.03 * cmath.exp(2j * math.pi * rng.uniform())
    out = newton_balance(cfg.with_positions(rows),
                         GaugeFixing(((NeckId(1, 1), 0j), (NeckId(2, 4), cfg.p[1][3]))))
    sizes = neck_sizes(out)
    assert np.max(np.abs(force_vector(out, sizes))) <= 1e-12


# ---------------------------------------------------------------------------
# rigidity
# ---------------------------------------------------------------------------

def test_rigidity_chm_family():
    for m, rank in ((2, 1), (3, 2), (4, 3)):
        report = rigidity(preset_chm(m))
        assert report.jacobian_rank == rank
        assert report.expected_rank == rank
        assert report.is_rigid


def test_rigidity_catenoid_rank_zero():
    report = rigidity(preset_catenoid())
    assert report.jacobian_rank == 0
    assert report.expected_rank == 0
    assert report.is_rigid


def test_rigidity_gauge_invariance():
    cfg = preset_chm(3)
    base = rigidity(cfg)
    rng = np.random.default_rng(19)
    for _ in range(10):
        w = complex(rng.normal(), rng.normal())
        lam = complex(rng.normal(), rng.normal())
        if abs(lam) < 0.1:
            lam += 1.0
        moved = cfg.translated(w).scaled(lam)
        report = rigidity(moved)
        assert report.jacobian_rank == base.jacobian_rank


def test_rigidity_unbalanced_warning_flag():
    cfg = preset_chm(3)
    rows = [list(r) for r in cfg.p]
    rows[1][0] += 0.2
    report = rigidity(cfg.with_positions(rows))
    assert not report.balanced


# ---------------------------------------------------------------------------
# dW/dQ rank
# ---------------------------------------------------------------------------

def test_dW_dQ_rank_catenoid_is_zero():
    # single-neck level: W vanishes identically in Q, so the rank is 0
    assert dW_dQ_rank(preset_catenoid()) == 0


def test_dW_dQ_rank_chm3():
    assert dW_dQ_rank(preset_chm(3)) == 1


def test_dW_dQ_rank_zero_sizes():
    cfg = Configuration(L=3, n=(1, 1), p=((0j,), (1.0,)), Q=(0.0, 0.0, 0.0))
    assert dW_dQ_rank(cfg) == 0


def test_growth_gradient_matches_finite_differences():
    cfg = preset_chm(4)
    g = growth_gradient_of_W(cfg)
    h = 1e-6
    for j in range(cfg.L - 1):
        Qp = list(cfg.Q)
        Qm = list(cfg.Q)
        Qp[j] += h
        Qp[-1] -= h
        Qm[j] -= h
        Qm[-1] += h

        def W_of(Q):
            c = neck_sizes(Configuration(cfg.L, cfg.n, cfg.p, tuple(Q)))
            cfg2 = Configuration(cfg.L, cfg.n, cfg.p, tuple(Q))
            return scalar_W(cfg2, c)[1]

        fd = (W_of(Qp) - W_of(Qm)) / (2 * h)
        assert g[j] == pytest.approx(fd, abs=1e-5)


# ---------------------------------------------------------------------------
# topology
# ---------------------------------------------------------------------------

def test_topology_catenoid():
    report = topology(preset_catenoid())
    assert (report.genus, report.end_count) == (0, 2)
    assert report.embeddable
    assert report.end_types == ("catenoid", "catenoid")


def test_topology_chm():
    # Q = (1-m, -1, m) is strictly increasing only for m >= 3
    for m in (2, 3, 4, 5):
        report = topology(preset_chm(m))
        assert report.genus == m - 1
        assert report.end_count == 3
        assert report.embeddable == (m >= 3)


def test_topology_dihedral_genus():
    L, m = 4, 5
    cfg = preset_dihedral(L, m)
    report = topology(cfg)
    assert report.genus == m * (L - 2) - L + 2 == 2 * (L - 2) ** 2
    assert report.embeddable  # m = 2L-3 > 2(L-2)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def test_preset_chm2_data():
    cfg = preset_chm(2)
    assert cfg.Q == (-1.0, -1.0, 2.0)
    assert abs(cfg.p[1][0] + 1.0) < 1e-15 and abs(cfg.p[1][1] - 1.0) < 1e-15
    sizes = neck_sizes(cfg)
    assert np.max(np.abs(force_vector(cfg, sizes))) <= 1e-12


def test_preset_dispatch():
    assert preset("catenoid").L == 2
    assert preset("chm", m=4).n == (1, 4)
    with pytest.raises(ValueError):
        preset("unknown")


def test_preset_dihedral_balanced_and_planar_end():
    cfg = preset_dihedral(4, 5)
    sizes = neck_sizes(cfg)
    assert np.max(np.abs(force_vector(cfg, sizes))) <= 1e-10
    s, w = scalar_W(cfg, sizes)
    assert abs(w) < 1e-10
    # c = (3,1,1) gives Q = (-3,-2,0,5): one planar end
    assert topology(cfg).end_types[2] == "planar"


def test_preset_dihedral_larger():
    # generic decreasing seed keeps the growths strictly increasing (m > 2(L-2))
    cfg = preset_dihedral(5, 9, c_seed=(1.0, 0.9, 0.7))
    sizes = neck_sizes(cfg)
    assert np.max(np.abs(force_vector(cfg, sizes))) <= 1e-10
    assert topology(cfg).embeddable


# ---------------------------------------------------------------------------
# polynomial certificate
# ---------------------------------------------------------------------------

def test_polynomial_check_catenoid():
    assert polynomial_check([(0j,)], c=(1.0,)) == 0.0


def test_polynomial_check_chm3():
    cfg = preset_chm(3)
    sizes = neck_sizes(cfg)
    resid = polynomial_check(cfg.p, sizes)
    scale = polynomial_check_scale(cfg.p, sizes.c)
    assert resid <= 1e-10 * scale


def test_polynomial_check_detects_imbalance():
    cfg = preset_chm(3)
    sizes = neck_sizes(cfg)
    rows = [list(r) for r in cfg.p]
    rows[1][0] *= 1.05
    resid = polynomial_check(rows, sizes)
    assert resid > 1e-3


def test_polynomial_check_repeated_root():
    from maxface.errors import RepeatedRoot
    with pytest.raises(RepeatedRoot):
        polynomial_check([(0j,), (0j,)], c=(1.0, 1.0))


def test_preset_polynomial_roundtrip():
    cfg0 = preset_chm(3)
    sizes0 = neck_sizes(cfg0)
    cfg = preset_polynomial(cfg0.p, sizes0.c)
    assert cfg.Q == cfg0.Q
    assert cfg.n == cfg0.n
