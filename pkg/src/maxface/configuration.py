"""Configurations of necks between stacked spacelike planes.

A configuration consists of L horizontal planes labelled 1..L, with n_l > 0
necks between plane l and plane l+1 (convention n_0 = n_L = 0), limit neck
positions p[l][k] in the complex plane, and one logarithmic growth Q_l per
plane.  The neck sizes c_l are the real numbers solving

    Q_l = n_{l-1} c_{l-1} - n_l c_l,        c_0 = c_L = 0,

which requires sum(Q) = 0.  To each plane belongs the meromorphic 1-form

    omega_l = sum_k -c_l dz/(z - p[l][k]) + sum_k c_{l-1} dz/(z - p[l-1][k]),

and the force on neck (l,k) is

    F_{l,k} = sum_{i != k} 2 c_l^2/(p_{l,k} - p_{l,i})
            - sum_i c_l c_{l+1}/(p_{l,k} - p_{l+1,i})
            - sum_i c_l c_{l-1}/(p_{l,k} - p_{l-1,i})
            = (1/2) Res_{p_{l,k}} (omega_l^2 + omega_{l+1}^2)/dz.

A configuration is balanced when every force vanishes.  The scalar

    W = sum p_{l,k} F_{l,k}
      = sum_l n_l (n_l - 1) c_l^2 - sum_l n_l n_{l+1} c_l c_{l+1}

depends on (n, c) only and must vanish for a balanced configuration to exist.

The waist of an opened neck carries the trigonometric functions

    R^(r)_{l,k}(theta) = Im(A e^{i (r+1) theta}),
    A = conj(S) for odd l, S for even l,
    S = Res_{p_{l,k}} (omega_l^{r+2} + omega_{l+1}^{r+2})/dz,

whose leading nonvanishing order governs the count and placement of
non-cuspidal singular points on the waist.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from math import comb
from typing import Iterator, Sequence

import numpy as np

from .errors import CoincidentNecks, NonZeroGrowthSum, NotAPole

GROWTH_SUM_TOL = 1e-12
COINCIDENCE_TOL = 1e-12


@dataclass(frozen=True)
class NeckId:
    """Label (level, index) of a neck, both 1-based."""

    level: int
    index: int

    def __iter__(self):
        return iter((self.level, self.index))


@dataclass(frozen=True)
class Configuration:
    """Immutable neck configuration (p, Q)."""

    L: int
    n: tuple[int, ...]
    p: tuple[tuple[complex, ...], ...]
    Q: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        object.__setattr__(self, "p", tuple(tuple(complex(z) for z in row) for row in self.p))
        object.__setattr__(self, "Q", tuple(float(q) for q in self.Q))
        if self.L < 2:
            raise ValueError(f"need at least two planes, got L={self.L}")
        if len(self.n) != self.L - 1:
            raise ValueError(f"len(n)={len(self.n)} but L-1={self.L - 1}")
        if any(nl < 1 for nl in self.n):
            raise ValueError(f"every level needs at least one neck, got n={self.n}")
        if len(self.p) != self.L - 1:
            raise ValueError(f"len(p)={len(self.p)} but L-1={self.L - 1}")
        for l, (nl, row) in enumerate(zip(self.n, self.p), start=1):
            if len(row) != nl:
                raise ValueError(f"level {l} has {len(row)} positions but n_{l}={nl}")
        if len(self.Q) != self.L:
            raise ValueError(f"len(Q)={len(self.Q)} but L={self.L}")
        qscale = max(1.0, max(abs(q) for q in self.Q))
        if abs(sum(self.Q)) > GROWTH_SUM_TOL * qscale:
            raise NonZeroGrowthSum(f"sum(Q) = {sum(self.Q):.3e} is not zero")
        scale = max(1.0, max((abs(z) for row in self.p for z in row), default=0.0))
        for l in range(1, self.L):
            row = self.p[l - 1]
            for i in range(len(row)):
                for j in range(i + 1, len(row)):
                    if abs(row[i] - row[j]) <= COINCIDENCE_TOL * scale:
                        raise CoincidentNecks(
                            f"necks ({l},{i + 1}) and ({l},{j + 1}) coincide at {row[i]}")
            if l < self.L - 1:
                for i, zi in enumerate(row):
                    for j, zj in enumerate(self.p[l]):
                        if abs(zi - zj) <= COINCIDENCE_TOL * scale:
                            raise CoincidentNecks(
                                f"necks ({l},{i + 1}) and ({l + 1},{j + 1}) coincide at {zi}")

    @property
    def neck_count(self) -> int:
        return sum(self.n)

    def necks(self) -> Iterator[NeckId]:
        for l in range(1, self.L):
            for k in range(1, self.n[l - 1] + 1):
                yield NeckId(l, k)

    def position(self, neck: NeckId) -> complex:
        self._check_neck(neck)
        return self.p[neck.level - 1][neck.index - 1]

    def _check_neck(self, neck: NeckId) -> None:
        if not (1 <= neck.level <= self.L - 1):
            raise ValueError(f"neck level {neck.level} out of range [1,{self.L - 1}]")
        if not (1 <= neck.index <= self.n[neck.level - 1]):
            raise ValueError(
                f"neck index {neck.index} out of range [1,{self.n[neck.level - 1]}]")

    def with_positions(self, p: Sequence[Sequence[complex]]) -> "Configuration":
        return Configuration(self.L, self.n, tuple(tuple(row) for row in p), self.Q)

    def translated(self, w: complex) -> "Configuration":
        return self.with_positions([[z + w for z in row] for row in self.p])

    def scaled(self, lam: complex) -> "Configuration":
        if lam == 0:
            raise ValueError("scaling factor must be nonzero")
        return self.with_positions([[lam * z for z in row] for row in self.p])

    def position_scale(self) -> float:
        return max(1.0, max((abs(z) for row in self.p for z in row), default=0.0))


@dataclass(frozen=True)
class NeckSizes:
    """Neck sizes c_1..c_{L-1}; the boundary values c_0 = c_L = 0 are implicit."""

    c: tuple[float, ...]

    def of_level(self, l: int) -> float:
        """c_l with the boundary convention, valid for 0 <= l <= L."""
        if l <= 0 or l > len(self.c):
            return 0.0
        return self.c[l - 1]


@dataclass(frozen=True)
class LevelForm:
    """A meromorphic 1-form sum_i res_i dz/(z - pole_i) with simple poles."""

    poles: tuple[tuple[complex, float], ...]

    def __call__(self, z):
        """Evaluate the coefficient function f = form/dz at z (scalar or array)."""
        out = np.zeros_like(np.asarray(z, dtype=complex))
        for q, r in self.poles:
            out = out + r / (np.asarray(z, dtype=complex) - q)
        return out if out.shape else complex(out)

    def pole_positions(self) -> tuple[complex, ...]:
        return tuple(q for q, _ in self.poles)


@dataclass(frozen=True)
class TrigPolynomial:
    """theta -> Im(sum_m A_m e^{i m theta}) for integer frequencies m >= 1."""

    coefficients: dict[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        if any(m < 1 for m in self.coefficients):
            raise ValueError("frequencies must be >= 1")

    def __call__(self, theta):
        th = np.asarray(theta, dtype=float)
        out = np.zeros_like(th)
        for m, a in self.coefficients.items():
            out = out + np.imag(a * np.exp(1j * m * th))
        return out if out.shape else float(out)

    def amplitude(self, m: int) -> float:
        return abs(self.coefficients.get(m, 0.0))

    def max_amplitude(self) -> float:
        return max((abs(a) for a in self.coefficients.values()), default=0.0)

    def frequencies(self) -> tuple[int, ...]:
        return tuple(sorted(self.coefficients))

    def is_zero(self, tol: float = 1e-10) -> bool:
        return self.max_amplitude() <= tol

    def zeros(self, refine_tol: float = 1e-13) -> tuple[float, ...]:
        """Zeros in [0, 2*pi), located by grid sign change plus bisection."""
        if self.is_zero(0.0):
            return ()
        max_freq = max(self.coefficients)
        ngrid = max(1024, 256 * max_freq)
        th = np.linspace(0.0, 2.0 * math.pi, ngrid, endpoint=False)
        vals = self(th)
        zeros = []
        for i in range(ngrid):
            a, b = th[i], th[i] + 2.0 * math.pi / ngrid
            fa, fb = vals[i], vals[(i + 1) % ngrid]
            if fa == 0.0:
                zeros.append(a)
                continue
            if fa * fb >= 0.0:
                continue
            lo, hi, flo = a, b, fa
            while hi - lo > refine_tol:
                mid = 0.5 * (lo + hi)
                fm = self(mid)
                if fm == 0.0:
                    lo = hi = mid
                elif flo * fm < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            zeros.append(0.5 * (lo + hi) % (2.0 * math.pi))
        return tuple(sorted(zeros))


def neck_sizes(config: Configuration) -> NeckSizes:
    """Solve Q_l = n_{l-1} c_{l-1} - n_l c_l by forward substitution."""
    qscale = max(1.0, max(abs(q) for q in config.Q))
    if abs(sum(config.Q)) > GROWTH_SUM_TOL * qscale:
        raise NonZeroGrowthSum(f"sum(Q) = {sum(config.Q):.3e}")
    c = []
    prev, nprev = 0.0, 0
    for l in range(1, config.L):
        cl = (nprev * prev - config.Q[l - 1]) / config.n[l - 1]
        c.append(cl)
        prev, nprev = cl, config.n[l - 1]
    sizes = NeckSizes(tuple(c))
    # round-trip check of the defining recurrence
    for l in range(1, config.L + 1):
        nl = config.n[l - 1] if l <= config.L - 1 else 0
        nlm = config.n[l - 2] if l >= 2 else 0
        resid = config.Q[l - 1] - (nlm * sizes.of_level(l - 1) - nl * sizes.of_level(l))
        if abs(resid) > 1e-12 * qscale:
            raise ArithmeticError(f"neck size recurrence residual {resid:.3e} at level {l}")
    return sizes


def level_form(config: Configuration, sizes: NeckSizes, l: int) -> LevelForm:
    """The form omega_l on plane l: poles -c_l at p[l][*] and +c_{l-1} at p[l-1][*]."""
    if not (1 <= l <= config.L):
        raise ValueError(f"level {l} out of range [1,{config.L}]")
    poles = []
    if l <= config.L - 1:
        cl = sizes.of_level(l)
        poles.extend((q, -cl) for q in config.p[l - 1])
    if l >= 2:
        clm = sizes.of_level(l - 1)
        poles.extend((q, clm) for q in config.p[l - 2])
    return LevelForm(tuple(poles))


def force(config: Configuration, sizes: NeckSizes, neck: NeckId) -> complex:
    """Balance residual on one neck, from the explicit three-sum expression."""
    config._check_neck(neck)
    l, k = neck.level, neck.index
    pk = config.p[l - 1][k - 1]
    cl = sizes.of_level(l)
    total = 0j
    for i, q in enumerate(config.p[l - 1]):
        if i != k - 1:
            total += 2.0 * cl * cl / (pk - q)
    if l + 1 <= config.L - 1:
        cl1 = sizes.of_level(l + 1)
        for q in config.p[l]:
            total -= cl * cl1 / (pk - q)
    if l - 1 >= 1:
        clm = sizes.of_level(l - 1)
        for q in config.p[l - 2]:
            total -= cl * clm / (pk - q)
    return total


def residue_power(form: LevelForm, pole_position: complex, power: int) -> complex:
    """Residue at a pole of f^power where f = form/dz.

    Writing f = c/(z - p) + h with h holomorphic at p,

        Res = sum_{j=1}^{power} C(power, j) c^j [u^{j-1}] h^{power-j},

    where [u^s] takes the Taylor coefficient of order s at p.  The Taylor
    coefficients of h are exact derivatives of simple-pole terms.
    """
    if power < 2:
        raise ValueError("power must be >= 2")
    scale = max(1.0, max(abs(q) for q, _ in form.poles))
    c0 = None
    others = []
    for q, r in form.poles:
        if abs(q - pole_position) <= 1e-12 * scale:
            if c0 is not None:
                raise NotAPole(f"pole at {pole_position} matched twice; form is degenerate")
            c0 = r
        else:
            others.append((q, r))
    if c0 is None:
        raise NotAPole(f"{pole_position} is not a pole of the form")
    order = power - 2
    taylor = np.zeros(order + 1, dtype=complex)
    for s in range(order + 1):
        taylor[s] = sum(r * (-1.0) ** s / (pole_position - q) ** (s + 1) for q, r in others)
    # truncated powers of h
    h_pow = np.zeros((power, order + 1), dtype=complex)
    h_pow[0, 0] = 1.0
    for m in range(1, power):
        h_pow[m] = np.convolve(h_pow[m - 1], taylor)[: order + 1]
    res = 0j
    for j in range(1, power + 1):
        s = j - 1
        if s <= order and power - j < power:
            res += comb(power, j) * c0**j * h_pow[power - j, s]
    return complex(res)


def force_via_residue(config: Configuration, sizes: NeckSizes, neck: NeckId) -> complex:
    """Force of a neck as half the residue of (omega_l^2 + omega_{l+1}^2)/dz."""
    config._check_neck(neck)
    l = neck.level
    pk = config.position(neck)
    w_l = level_form(config, sizes, l)
    w_l1 = level_form(config, sizes, l + 1)
    return 0.5 * (residue_power(w_l, pk, 2) + residue_power(w_l1, pk, 2))


def scalar_W(config: Configuration, sizes: NeckSizes) -> tuple[complex, float]:
    """(sum form, closed form) of W; the two agree identically."""
    sum_form = 0j
    for neck in config.necks():
        sum_form += config.position(neck) * force(config, sizes, neck)
    closed = 0.0
    for l in range(1, config.L):
        nl, cl = config.n[l - 1], sizes.of_level(l)
        closed += nl * (nl - 1) * cl * cl
    for l in range(1, config.L - 1):
        closed -= config.n[l - 1] * config.n[l] * sizes.of_level(l) * sizes.of_level(l + 1)
    return sum_form, closed


def waist_residue_sum(config: Configuration, sizes: NeckSizes, neck: NeckId, r: int) -> complex:
    """S = Res_{p_{l,k}} (omega_l^{r+2} + omega_{l+1}^{r+2})/dz."""
    config._check_neck(neck)
    if r < 1:
        raise ValueError("r must be >= 1")
    l = neck.level
    pk = config.position(neck)
    w_l = level_form(config, sizes, l)
    w_l1 = level_form(config, sizes, l + 1)
    return residue_power(w_l, pk, r + 2) + residue_power(w_l1, pk, r + 2)


def R_function(config: Configuration, sizes: NeckSizes, neck: NeckId, r: int) -> TrigPolynomial:
    """The waist function R^(r)_{l,k}; a single frequency r+1 is present."""
    S = waist_residue_sum(config, sizes, neck, r)
    A = S.conjugate() if neck.level % 2 == 1 else S
    return TrigPolynomial({r + 1: A})
