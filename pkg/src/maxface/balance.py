"""Balancing, rigidity, and preset families of neck configurations.

The force F is holomorphic in each neck position, so the balance system is
solved by a damped complex Newton iteration.  The forces are invariant under
translations and complex scalings of p; the gauge is fixed by pinning two
neck positions, after which the Jacobian of a rigid configuration has full
column rank N-2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .configuration import (
    Configuration,
    NeckId,
    NeckSizes,
    force,
    neck_sizes,
    scalar_W,
)
from .errors import CoincidentNecks, NoConvergence, RepeatedRoot, SingularJacobian

RANK_THRESHOLD = 1e-8  # relative to largest singular value


@dataclass(frozen=True)
class GaugeFixing:
    """Pinned neck positions removing translation and scaling freedom."""

    pinned: tuple[tuple[NeckId, complex], ...]

    def __post_init__(self):
        if len(self.pinned) > 2:
            raise ValueError("at most two pins")
        ids = [tuple(nid) for nid, _ in self.pinned]
        if len(set(ids)) != len(ids):
            raise ValueError("pinned necks must be distinct")


@dataclass(frozen=True)
class RigidityReport:
    jacobian_rank: int
    expected_rank: int
    singular_values: tuple[float, ...]
    is_rigid: bool
    balanced: bool  # warning flag: report computed at an unbalanced point


@dataclass(frozen=True)
class TopologyReport:
    genus: int
    end_count: int
    embeddable: bool
    end_types: tuple[str, ...]  # "catenoid" (Q_l != 0) or "planar" (Q_l == 0)


def default_gauge(config: Configuration) -> GaugeFixing:
    """Pin the first neck of the lowest level plus the neck of maximal modulus."""
    necks = list(config.necks())
    if len(necks) < 2:
        return GaugeFixing(())
    first = necks[0]
    rest = [nk for nk in necks if tuple(nk) != tuple(first)]
    second = max(rest, key=lambda nk: (abs(config.position(nk)), -nk.level, -nk.index))
    return GaugeFixing(((first, config.position(first)), (second, config.position(second))))


def force_vector(config: Configuration, sizes: NeckSizes) -> np.ndarray:
    return np.array([force(config, sizes, nk) for nk in config.necks()], dtype=complex)


def balance_jacobian(config: Configuration, sizes: NeckSizes) -> np.ndarray:
    """Complex N x N matrix dF_{l,k}/dp_{l',k'} in neck enumeration order."""
    necks = list(config.necks())
    index = {tuple(nk): i for i, nk in enumerate(necks)}
    N = len(necks)
    J = np.zeros((N, N), dtype=complex)
    for row, nk in enumerate(necks):
        l, k = nk.level, nk.index
        pk = config.p[l - 1][k - 1]
        cl = sizes.of_level(l)
        diag = 0j
        for i, q in enumerate(config.p[l - 1]):
            if i == k - 1:
                continue
            d2 = (pk - q) ** 2
            J[row, index[(l, i + 1)]] += 2.0 * cl * cl / d2
            diag -= 2.0 * cl * cl / d2
        for dl in (-1, 1):
            lj = l + dl
            if not (1 <= lj <= config.L - 1):
                continue
            cj = sizes.of_level(lj)
            for i, q in enumerate(config.p[lj - 1]):
                d2 = (pk - q) ** 2
                J[row, index[(lj, i + 1)]] -= cl * cj / d2
                diag += cl * cj / d2
        J[row, row] += diag
    return J


def newton_balance(
    initial: Configuration,
    gauge: GaugeFixing | None = None,
    max_iter: int = 50,
    tol: float = 1e-12,
) -> Configuration:
    """Damped Newton iteration on the balance system with pinned gauge."""
    if gauge is None:
        gauge = default_gauge(initial)
    if initial.neck_count >= 2 and len(gauge.pinned) != 2:
        raise ValueError("two pins are required when the configuration has N >= 2 necks")

    necks = list(initial.necks())
    index = {tuple(nk): i for i, nk in enumerate(necks)}
    pinned_idx = {}
    for nid, value in gauge.pinned:
        if tuple(nid) not in index:
            raise ValueError(f"pinned neck {tuple(nid)} not in configuration")
        pinned_idx[index[tuple(nid)]] = complex(value)
    free = [i for i in range(len(necks)) if i not in pinned_idx]

    def assemble(flat: np.ndarray) -> Configuration:
        rows, pos = [], 0
        for nl in initial.n:
            rows.append(tuple(flat[pos:pos + nl]))
            pos += nl
        return initial.with_positions(rows)

    flat = np.array([z for row in initial.p for z in row], dtype=complex)
    for i, val in pinned_idx.items():
        flat[i] = val
    config = assemble(flat)
    sizes = neck_sizes(config)
    F = force_vector(config, sizes)
    resid = np.max(np.abs(F))
    if resid <= tol:
        return config

    for _ in range(max_iter):
        J = balance_jacobian(config, sizes)
        J_red = J[:, free]
        if free:
            sv = np.linalg.svd(J_red, compute_uv=False)
            if sv[0] == 0.0 or sv[-1] < 1e-12 * sv[0]:
                raise SingularJacobian(
                    f"reduced Jacobian rank-deficient (sv ratio {sv[-1]/max(sv[0],1e-300):.1e})")
            step, *_ = np.linalg.lstsq(J_red, -F, rcond=None)
        else:
            raise NoConvergence("no free variables and residual above tolerance",
                                residual=resid)
        lam = 1.0
        accepted = False
        for _ in range(20):
            trial = flat.copy()
            trial[free] += lam * step
            try:
                cand = assemble(trial)
            except CoincidentNecks:
                lam *= 0.5
                continue
            F_new = force_vector(cand, sizes)
            r_new = np.max(np.abs(F_new))
            if r_new < resid:
                flat, config, F, resid = trial, cand, F_new, r_new
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            raise NoConvergence(f"step rejected at residual {resid:.3e}", residual=resid)
        if resid <= tol:
            return config
    raise NoConvergence(f"no convergence after {max_iter} iterations, residual {resid:.3e}",
                        residual=resid)


def rigidity(config: Configuration, sizes: NeckSizes | None = None) -> RigidityReport:
    """Rank of the force Jacobian versus the maximal rank N-2."""
    if sizes is None:
        sizes = neck_sizes(config)
    N = config.neck_count
    balanced = bool(np.max(np.abs(force_vector(config, sizes))) <= 1e-8)
    J = balance_jacobian(config, sizes)
    sv = np.linalg.svd(J, compute_uv=False)
    smax = sv[0] if len(sv) else 0.0
    rank = int(np.sum(sv > RANK_THRESHOLD * smax)) if smax > 0 else 0
    expected = max(N - 2, 0)
    return RigidityReport(
        jacobian_rank=rank,
        expected_rank=expected,
        singular_values=tuple(float(s) for s in sv),
        is_rigid=(rank == expected),
        balanced=balanced,
    )


def growth_gradient_of_W(config: Configuration) -> np.ndarray:
    """Gradient of the closed-form W with respect to Q, restricted to sum(dQ)=0.

    With S_l = Q_1 + ... + Q_l one has c_l = -S_l / n_l, so dc_l/dQ_j =
    -[j <= l]/n_l; the returned vector holds the components along the
    hyperplane basis e_j - e_L, j = 1..L-1.
    """
    sizes = neck_sizes(config)
    L, n = config.L, config.n
    dW_dc = np.zeros(L - 1)
    for l in range(1, L):
        nl, cl = n[l - 1], sizes.of_level(l)
        dW_dc[l - 1] = 2.0 * nl * (nl - 1) * cl
        if l + 1 <= L - 1:
            dW_dc[l - 1] -= nl * n[l] * sizes.of_level(l + 1)
        if l - 1 >= 1:
            dW_dc[l - 1] -= n[l - 2] * nl * sizes.of_level(l - 1)
    g = np.zeros(L)  # unconstrained dW/dQ_j
    for j in range(1, L + 1):
        g[j - 1] = sum(dW_dc[l - 1] * (-1.0 / n[l - 1]) for l in range(max(j, 1), L))
    return g[:-1] - g[-1]


def dW_dQ_rank(config: Configuration) -> int:
    """Rank (0 or 1) of Q -> W on the sum(Q)=0 hyperplane."""
    g = growth_gradient_of_W(config)
    sizes = neck_sizes(config)
    scale = max(1.0, max(abs(c) for c in sizes.c))
    return 1 if np.max(np.abs(g)) > 1e-10 * scale * scale else 0


def topology(config: Configuration, sizes: NeckSizes | None = None) -> TopologyReport:
    """Genus, end count, and wider-sense embeddability of the opened surface."""
    if sizes is None:
        sizes = neck_sizes(config)
    genus = config.neck_count - config.L + 1
    increasing = all(config.Q[i] < config.Q[i + 1] for i in range(config.L - 1))
    ends = tuple("planar" if q == 0.0 else "catenoid" for q in config.Q)
    return TopologyReport(genus=genus, end_count=config.L, embeddable=increasing,
                          end_types=ends)


# ---------------------------------------------------------------------------
# Preset families
# ---------------------------------------------------------------------------

def preset_catenoid() -> Configuration:
    """Single neck between two planes: the Lorentzian catenoid."""
    return Configuration(L=2, n=(1,), p=((0j,),), Q=(-1.0, 1.0))


def preset_chm(m: int) -> Configuration:
    """Costa (m=2) and Costa-Hoffman-Meeks (m>2) configurations."""
    if m < 2:
        raise ValueError("m must be >= 2")
    ring = tuple(cmath.exp(2j * math.pi * k / m) for k in range(1, m + 1))
    return Configuration(L=3, n=(1, m), p=((0j,), ring),
                         Q=(1.0 - m, -1.0, float(m)))


def _dihedral_c(L: int, m: int, c_seed) -> tuple[float, ...]:
    """Complete a dihedral size vector: c_1 is forced by the W = 0 condition."""
    if c_seed is None:
        tail = [1.0] * (L - 2)
    else:
        tail = [float(v) for v in c_seed]
        if len(tail) == L - 1:
            tail = tail[1:]
        if len(tail) != L - 2:
            raise ValueError(f"need {L - 2} seed sizes for levels 2..{L - 1}")
    if tail[0] == 0.0:
        raise ValueError("c_2 must be nonzero")
    # W = m(m-1) sum_{l>=2} c_l^2 - m c_1 c_2 - m^2 sum_{2<=l<=L-2} c_l c_{l+1} = 0
    s_sq = sum(v * v for v in tail)
    s_cross = sum(tail[i] * tail[i + 1] for i in range(len(tail) - 1))
    c1 = (m * (m - 1) * s_sq - m * m * s_cross) / (m * tail[0])
    return (c1, *tail)


def _dihedral_config(L: int, m: int, c: tuple[float, ...], radii) -> Configuration:
    p = [(0j,)]
    for rho in radii:
        p.append(tuple(rho * cmath.exp(2j * math.pi * k / m) for k in range(1, m + 1)))
    n = (1,) + (m,) * (L - 2)
    Q = []
    for l in range(1, L + 1):
        nl = n[l - 1] if l <= L - 1 else 0
        nlm = n[l - 2] if l >= 2 else 0
        clm = c[l - 2] if 2 <= l <= L else 0.0
        cl = c[l - 1] if l <= L - 1 else 0.0
        Q.append(nlm * clm - nl * cl)
    return Configuration(L=L, n=n, p=tuple(p), Q=tuple(Q))


def preset_dihedral(L: int, m: int, c_seed=None, tol: float = 1e-13) -> Configuration:
    """Dihedral family: one neck at the origin and m-neck rings on each higher level.

    Ring radii are real (possibly negative: a negative radius staggers the ring
    by pi/m for odd m) and solve the symmetry-reduced radial balance system.
    """
    if L < 3:
        raise ValueError("dihedral preset needs L >= 3")
    if m < 2:
        raise ValueError("m must be >= 2")
    c = _dihedral_c(L, m, c_seed)
    n_rings = L - 2  # levels 2..L-1

    def radial_forces(radii: np.ndarray) -> np.ndarray:
        # real force at the angle-0 neck of each ring level
        out = np.zeros(n_rings)
        for i in range(n_rings):
            l = i + 2
            cl = c[l - 1]
            rl = radii[i]
            val = cl * cl * (m - 1) / rl
            for dl in (-1, 1):
                lj = l + dl
                if lj == 1:
                    val -= cl * c[0] / rl
                elif 2 <= lj <= L - 1:
                    rj = radii[lj - 2]
                    val -= cl * c[lj - 1] * m * rl ** (m - 1) / (rl**m - rj**m)
            out[i] = val
        return out

    def solve_from(start: np.ndarray) -> np.ndarray | None:
        x = start.astype(float).copy()  # unknowns: radii of levels 3..L-1 (rho_2 = 1)
        for _ in range(80):
            radii = np.concatenate(([1.0], x))
            F = radial_forces(radii)[:-1] if n_rings > 1 else np.zeros(0)
            if n_rings == 1 or np.max(np.abs(F)) <= tol:
                full = radial_forces(radii)
                return radii if np.max(np.abs(full)) <= 1e-10 else None
            h = 1e-7
            J = np.zeros((len(F), len(x)))
            for j in range(len(x)):
                xp = x.copy(); xp[j] += h
                xm = x.copy(); xm[j] -= h
                Fp = radial_forces(np.concatenate(([1.0], xp)))[:-1]
                Fm = radial_forces(np.concatenate(([1.0], xm)))[:-1]
                J[:, j] = (Fp - Fm) / (2 * h)
            try:
                step, *_ = np.linalg.lstsq(J, -F, rcond=None)
            except np.linalg.LinAlgError:
                return None
            lam, accepted = 1.0, False
            r0 = np.max(np.abs(F))
            for _ in range(25):
                xt = x + lam * step
                radii_t = np.concatenate(([1.0], xt))
                bad = np.any(np.abs(radii_t) < 1e-8) or any(
                    abs(radii_t[i] ** m - radii_t[i + 1] ** m) < 1e-10
                    for i in range(len(radii_t) - 1))
                if bad:
                    lam *= 0.5
                    continue
                Ft = radial_forces(radii_t)[:-1]
                if np.max(np.abs(Ft)) < r0:
                    x, accepted = xt, True
                    break
                lam *= 0.5
            if not accepted:
                return None
        return None

    if n_rings == 1:
        radii = np.array([1.0])
        if np.max(np.abs(radial_forces(radii))) > 1e-10:
            raise NoConvergence("radial balance fails for the single-ring dihedral data")
        return _dihedral_config(L, m, c, radii)

    starts = []
    for base in (1.1 + 0.2 * np.arange(n_rings - 1), 1.6 + 0.5 * np.arange(n_rings - 1)):
        for signs in range(2 ** (n_rings - 1)):
            s = np.array([(-1.0) ** ((signs >> b) & 1) for b in range(n_rings - 1)])
            starts.append(base * s)
    last_err = None
    for start in starts:
        radii = solve_from(start)
        if radii is None:
            continue
        try:
            cfg = _dihedral_config(L, m, c, radii)
        except CoincidentNecks as exc:
            last_err = exc
            continue
        sizes = neck_sizes(cfg)
        if np.max(np.abs(force_vector(cfg, sizes))) <= 1e-11:
            return cfg
    raise NoConvergence(f"dihedral radial solve failed for L={L}, m={m} ({last_err})")


def preset_polynomial(root_lists, c) -> Configuration:
    """Configuration assembled from per-level root lists and given neck sizes."""
    root_lists = [tuple(complex(z) for z in row) for row in root_lists]
    c = tuple(float(v) for v in c)
    L = len(root_lists) + 1
    if len(c) != L - 1:
        raise ValueError(f"need {L - 1} sizes, got {len(c)}")
    n = tuple(len(row) for row in root_lists)
    Q = []
    for l in range(1, L + 1):
        nl = n[l - 1] if l <= L - 1 else 0
        nlm = n[l - 2] if l >= 2 else 0
        clm = c[l - 2] if l >= 2 else 0.0
        cl = c[l - 1] if l <= L - 1 else 0.0
        Q.append(nlm * clm - nl * cl)
    return Configuration(L=L, n=n, p=tuple(root_lists), Q=tuple(Q))


def preset(kind: str, **params) -> Configuration:
    """Dispatch for the preset families."""
    kind = kind.lower()
    if kind == "catenoid":
        return preset_catenoid()
    if kind == "chm":
        return preset_chm(int(params["m"]))
    if kind == "dihedral":
        return preset_dihedral(int(params["L"]), int(params["m"]), params.get("c_seed"))
    if kind == "polynomial":
        return preset_polynomial(params["roots"], params["c"])
    raise ValueError(f"unknown preset kind {kind!r}")


# ---------------------------------------------------------------------------
# Polynomial balance certificate
# ---------------------------------------------------------------------------

def _poly_from_roots(roots) -> np.ndarray:
    coeffs = np.array([1.0 + 0j])
    for z in roots:
        coeffs = np.convolve(coeffs, np.array([1.0, -z], dtype=complex))
    return coeffs


def _poly_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)


def _poly_deriv(a: np.ndarray) -> np.ndarray:
    n = len(a) - 1
    if n == 0:
        return np.zeros(1, dtype=complex)
    return a[:-1] * np.arange(n, 0, -1)


def _poly_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    la, lb = len(a), len(b)
    width = max(la, lb)
    out = np.zeros(width, dtype=complex)
    out[width - la:] += a
    out[width - lb:] += b
    return out


def polynomial_check(root_lists, sizes: "NeckSizes | Sequence[float]" = None, c=None) -> float:
    """Max coefficient magnitude of the polynomial balance identity.

    With P_l the monic polynomial with the level-l roots and P their product,
    a configuration is balanced exactly when

        sum_l c_l^2 (P/P_l) P_l''  -  sum_l c_l c_{l+1} (P/(P_l P_{l+1})) P_l' P_{l+1}'

    is the zero polynomial.  Both summands are polynomials, assembled here by
    exact coefficient arithmetic.
    """
    if c is None:
        c = sizes.c if isinstance(sizes, NeckSizes) else tuple(sizes)
    root_lists = [tuple(complex(z) for z in row) for row in root_lists]
    levels = len(root_lists)
    if len(c) != levels:
        raise ValueError("one size per level required")
    combined = [z for row in root_lists for z in row]
    scale = max(1.0, max((abs(z) for z in combined), default=0.0))
    for i in range(len(combined)):
        for j in range(i + 1, len(combined)):
            if abs(combined[i] - combined[j]) <= 1e-9 * scale:
                raise RepeatedRoot(f"roots {combined[i]} and {combined[j]} coincide")
    P_l = [_poly_from_roots(row) for row in root_lists]
    lhs = np.zeros(1, dtype=complex)
    for l in range(levels):
        other = np.array([1.0 + 0j])
        for j in range(levels):
            if j != l:
                other = _poly_mul(other, P_l[j])
        term = c[l] ** 2 * _poly_mul(other, _poly_deriv(_poly_deriv(P_l[l])))
        lhs = _poly_add(lhs, term)
    for l in range(levels - 1):
        other = np.array([1.0 + 0j])
        for j in range(levels):
            if j not in (l, l + 1):
                other = _poly_mul(other, P_l[j])
        term = c[l] * c[l + 1] * _poly_mul(other,
                                           _poly_mul(_poly_deriv(P_l[l]), _poly_deriv(P_l[l + 1])))
        lhs = _poly_add(lhs, -term)
    return float(np.max(np.abs(lhs))) if len(lhs) else 0.0


def polynomial_check_scale(root_lists, c) -> float:
    """Reference magnitude for certifying polynomial_check residuals."""
    root_lists = [tuple(complex(z) for z in row) for row in root_lists]
    levels = len(root_lists)
    P_l = [_poly_from_roots(row) for row in root_lists]
    mags = [1.0]
    for l in range(levels):
        other = np.array([1.0 + 0j])
        for j in range(levels):
            if j != l:
                other = _poly_mul(other, P_l[j])
        term = c[l] ** 2 * _poly_mul(other, _poly_deriv(_poly_deriv(P_l[l])))
        if len(term):
            mags.append(float(np.max(np.abs(term))))
    return max(mags)
