"""Singularity structure on neck waists: prediction, detection, classification.

Around each opened neck the singular set is the waist circle |v| = t.  Its
points are classified through the governing function A(t, theta): cuspidal
edges where Re A != 0 and Im A != 0, swallowtails at simple zeros of Im A,
and generalized A_{k+2} points where the first k-1 theta-derivatives of Im A
vanish as well.  If Im A vanishes identically the whole waist maps to one
point (cone-like singularity).

The asymptotic predictions come from the waist functions R^(r): the smallest
m with R^(m-1) != 0 yields 2m non-cuspidal points at the zeros of R^(m-1),
evenly spaced by pi/m.  Symmetries sharpen the verdicts: a rotation of order
m about the neck certifies swallowtails (as does the generic case m = 2),
and a horizontal mirror through the neck forces the cone-like case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .configuration import Configuration, NeckId, NeckSizes, R_function, TrigPolynomial
from .errors import GridTooCoarse, NoMirror

MATCH_TOL = 1e-10
R_MAX_DEFAULT = 16


# ---------------------------------------------------------------------------
# symmetry detection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetryEvidence:
    """Symmetries of a configuration about one neck.

    rotational_order is math.inf for a single-neck configuration (every
    rotation fixes it); vertical_mirror_all likewise marks the degenerate
    single-neck case where every axis is a mirror.
    """

    neck: NeckId
    rotational_order: float
    vertical_mirror_angles: tuple[float, ...]
    horizontal_mirror: bool
    vertical_mirror_all: bool = False


def _match_multisets(a: Sequence[complex], b: Sequence[complex], tol: float) -> bool:
    if len(a) != len(b):
        return False
    pool = list(b)
    for z in a:
        best, best_d = None, tol
        for i, w in enumerate(pool):
            d = abs(z - w)
            if d <= best_d:
                best, best_d = i, d
        if best is None:
            return False
        pool.pop(best)
    return True


def detect_symmetries(config: Configuration, neck: NeckId) -> SymmetryEvidence:
    """Rotations, vertical mirrors, and the horizontal mirror about a neck."""
    config._check_neck(neck)
    q = config.position(neck)
    scale = max(1.0, config.position_scale())
    tol = MATCH_TOL * scale
    rel = [tuple(z - q for z in row) for row in config.p]
    others = [z for row in rel for z in row if abs(z) > tol]
    N = config.neck_count

    if N == 1:
        rotational_order: float = math.inf
        mirror_angles: tuple[float, ...] = ()
        mirror_all = True
    else:
        rotational_order = 1
        for order in range(N - 1, 1, -1):
            w = complex(math.cos(2 * math.pi / order), math.sin(2 * math.pi / order))
            if all(_match_multisets([w * z for z in row], row, tol) for row in rel):
                rotational_order = order
                break
        mirror_all = False
        candidates = set()
        for i, zi in enumerate(others):
            for zj in others[i:]:
                if abs(abs(zi) - abs(zj)) > tol:
                    continue
                phi = 0.5 * (math.atan2(zi.imag, zi.real) + math.atan2(zj.imag, zj.real))
                candidates.add(round(phi % math.pi, 9))
        found = []
        for phi in sorted(candidates):
            w = complex(math.cos(2 * phi), math.sin(2 * phi))
            if all(_match_multisets([w * z.conjugate() for z in row], row, tol) for row in rel):
                if all(abs(phi - f) > 1e-8 for f in found):
                    found.append(phi)
        mirror_angles = tuple(sorted(found))

    # horizontal mirror: the level-reversing reflection must fix the neck,
    # so the neck's gap must be the middle one (L = 2 * level), with
    # palindromic neck counts, antisymmetric growths, and mirrored positions.
    horizontal = False
    if config.L == 2 * neck.level:
        horizontal = all(config.n[l - 1] == config.n[config.L - l - 1]
                         for l in range(1, config.L))
        if horizontal:
            qtol = MATCH_TOL * max(1.0, max(abs(v) for v in config.Q))
            horizontal = all(abs(config.Q[l - 1] + config.Q[config.L - l]) <= qtol
                             for l in range(1, config.L + 1))
        if horizontal:
            horizontal = all(
                _match_multisets([z.conjugate() for z in rel[l - 1]],
                                 rel[config.L - l - 1], tol)
                for l in range(1, config.L))
    return SymmetryEvidence(
        neck=neck,
        rotational_order=rotational_order,
        vertical_mirror_angles=mirror_angles,
        horizontal_mirror=horizontal,
        vertical_mirror_all=mirror_all,
    )


# ---------------------------------------------------------------------------
# asymptotic prediction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SingularityPrediction:
    neck: NeckId
    kind: str                      # "cone-like" | "discrete" | "undetermined"
    leading_order: int | None      # smallest m with R^(m-1) != 0
    count: int | None              # 2m zeros on the waist
    angles: tuple[float, ...]
    type_claim: str | None         # "swallowtail" | "unverified"
    justification: str             # "horizontal-mirror" | "generic-r1" |
                                   # "rotational-symmetry" | "none"
    evidence: SymmetryEvidence
    leading_form: TrigPolynomial | None


def predict(config: Configuration, sizes: NeckSizes, neck: NeckId,
            r_max: int = R_MAX_DEFAULT) -> SingularityPrediction:
    """Asymptotic verdict for the waist of one neck of a balanced configuration."""
    evidence = detect_symmetries(config, neck)
    if evidence.horizontal_mirror:
        return SingularityPrediction(
            neck=neck, kind="cone-like", leading_order=None, count=None,
            angles=(), type_claim=None, justification="horizontal-mirror",
            evidence=evidence, leading_form=None)
    csc = max(1.0, max(abs(v) for v in sizes.c)) ** 3
    for r in range(1, r_max + 1):
        form = R_function(config, sizes, neck, r)
        if form.is_zero(1e-10 * csc):
            continue
        m = r + 1
        angles = form.zeros()
        if m == 2:
            claim, why = "swallowtail", "generic-r1"
        elif evidence.rotational_order == m:
            claim, why = "swallowtail", "rotational-symmetry"
        else:
            claim, why = "unverified", "none"
        return SingularityPrediction(
            neck=neck, kind="discrete", leading_order=m, count=2 * m,
            angles=angles, type_claim=claim, justification=why,
            evidence=evidence, leading_form=form)
    return SingularityPrediction(
        neck=neck, kind="undetermined", leading_order=None, count=None,
        angles=(), type_claim=None, justification="none",
        evidence=evidence, leading_form=None)


# ---------------------------------------------------------------------------
# finite-t classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SingularPoint:
    theta: float
    kind: str          # "swallowtail" | "generalized-a{k+2}" | "degenerate-front"
    ladder_depth: int  # smallest k with nonzero k-th theta-derivative of Im A


@dataclass(frozen=True)
class FiniteTClassification:
    theta_grid: tuple[float, ...]
    values: tuple[complex, ...]
    cone_like: bool
    points: tuple[SingularPoint, ...]
    grid_classes: tuple[str, ...]   # per grid point: "cuspidal-edge" |
                                    # "near-zero" | "degenerate-front" | "cone-like"


def _theta_derivative(f: Callable[[float], float], x: float, k: int, h: float) -> float:
    """k-th derivative by central differences with one Richardson step."""
    stencils = {
        1: ([-1, 1], [-0.5, 0.5]),
        2: ([-1, 0, 1], [1.0, -2.0, 1.0]),
        3: ([-2, -1, 1, 2], [-0.5, 1.0, -1.0, 0.5]),
        4: ([-2, -1, 0, 1, 2], [1.0, -4.0, 6.0, -4.0, 1.0]),
        5: ([-3, -2, -1, 1, 2, 3], [-0.5, 2.0, -2.5, 2.5, -2.0, 0.5]),
    }
    offs, wts = stencils[k]

    def estimate(step):
        return sum(w * f(x + o * step) for o, w in zip(offs, wts)) / step**k

    d1, d2 = estimate(h), estimate(h / 2)
    return (4.0 * d2 - d1) / 3.0


def classify_at_t(
    theta_grid: Sequence[float],
    values: Sequence[complex],
    evaluator: Callable[[float], complex],
    tol: float = 1e-8,
    deriv_step: float = 1e-3,
    max_ladder: int = 5,
) -> FiniteTClassification:
    """Classify waist points from samples of the governing function.

    Zeros of Im A are bracketed by grid sign changes and refined by bisection
    on the supplied evaluator; the derivative ladder then separates
    swallowtails (first derivative nonzero) from deeper generalized A_k
    points.  Points where Re A vanishes are flagged as degenerate front
    violations.
    """
    th = np.asarray(theta_grid, dtype=float)
    vals = np.asarray(values, dtype=complex)
    n = len(th)
    if n < 512:
        raise GridTooCoarse(f"need at least 512 grid points, got {n}")
    if len(vals) != n:
        raise ValueError("grid and samples disagree in length")
    scale = float(np.max(np.abs(vals)))
    if scale == 0.0:
        raise ValueError("governing function vanished identically on the grid")
    im, re = vals.imag, vals.real
    im_scale = float(np.max(np.abs(im)))

    points: list[SingularPoint] = []
    grid_classes: list[str] = []
    cone_like = im_scale <= tol * scale
    for i in range(n):
        if abs(re[i]) <= tol * scale:
            grid_classes.append("degenerate-front")
            points.append(SingularPoint(float(th[i]), "degenerate-front", 0))
        elif cone_like:
            grid_classes.append("cone-like")
        elif abs(im[i]) <= tol * scale:
            grid_classes.append("near-zero")
        else:
            grid_classes.append("cuspidal-edge")

    if cone_like:
        return FiniteTClassification(tuple(map(float, th)), tuple(map(complex, vals)),
                                     True, tuple(points), tuple(grid_classes))

    step = 2.0 * math.pi / n

    def im_eval(x: float) -> float:
        return float(np.imag(evaluator(x)))

    zeros = []
    for i in range(n):
        a = float(th[i])
        b = a + step
        fa = im[i]
        fb = im[(i + 1) % n]
        if fa == 0.0:
            zeros.append(a)
            continue
        if fa * fb >= 0.0:
            continue
        lo, hi, flo = a, b, fa
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            fm = im_eval(mid)
            if fm == 0.0:
                lo = hi = mid
                break
            if flo * fm < 0.0:
                hi = mid
            else:
                lo, flo = mid, fm
        zeros.append(0.5 * (lo + hi) % (2.0 * math.pi))
    zeros.sort()
    for z0, z1 in zip(zeros, zeros[1:]):
        if z1 - z0 < 0.25 * step:
            raise GridTooCoarse(f"zeros at {z0:.6f} and {z1:.6f} are not separated by the grid")

    deriv_tol = 1e-4 * im_scale
    for z in zeros:
        depth = 0
        for k in range(1, max_ladder + 1):
            d = _theta_derivative(im_eval, z, k, deriv_step)
            if abs(d) > deriv_tol * max(1.0, float(k)):
                depth = k
                break
        if depth == 1:
            kind = "swallowtail"
        elif depth == 0:
            kind = f"generalized-a{max_ladder + 2}+"
            depth = max_ladder
        else:
            kind = f"generalized-a{depth + 2}"
        points.append(SingularPoint(float(z), kind, depth))

    points.sort(key=lambda sp: sp.theta)
    return FiniteTClassification(tuple(map(float, th)), tuple(map(complex, vals)),
                                 False, tuple(points), tuple(grid_classes))


def vertical_mirror_noncuspidal_check(
    evidence: SymmetryEvidence,
    classification: FiniteTClassification,
    angle_tol: float | None = None,
) -> bool:
    """True when every mirror-fixed waist angle is non-cuspidal at finite t.

    A mirror at configuration angle phi fixes the waist angles
    theta = s*phi mod pi with s = -1 on odd levels and +1 on even levels
    (odd planes carry conjugated node positions).
    """
    if not evidence.vertical_mirror_angles and not evidence.vertical_mirror_all:
        raise NoMirror(f"no vertical mirror recorded for neck {tuple(evidence.neck)}")
    if classification.cone_like:
        return True
    n = len(classification.theta_grid)
    if angle_tol is None:
        angle_tol = max(1e-6, 4.0 * math.pi / n)
    sign = -1.0 if evidence.neck.level % 2 == 1 else 1.0
    zero_angles = [p.theta for p in classification.points]
    if not zero_angles:
        return False
    fixed = []
    for phi in evidence.vertical_mirror_angles:
        base = (sign * phi) % math.pi
        fixed.extend([base, base + math.pi])
    for theta in fixed:
        d = min(min(abs(theta - z), 2 * math.pi - abs(theta - z)) for z in zero_angles)
        if d > angle_tol:
            return False
    return True


# ---------------------------------------------------------------------------
# combinatorial identities (exact arithmetic)
# ---------------------------------------------------------------------------

def _falling(a: int, j: int) -> int:
    """Descending factorial (a)_j = a (a-1) ... (a-j+1), (a)_0 = 1."""
    out = 1
    for i in range(j):
        out *= a - i
    return out


def identity1(m: int, n: int, l: int) -> Fraction:
    """sum_{j=0}^{l} C(m,j) (n+1)_j / m! * C(m-j, l-j) (-2n-2)_{l-j}, exactly.

    Vandermonde convolution collapses the sum to C(m,l) (-n-1)_l / m!: the
    value is 1/(m+n+1)! at l = -n-1 and 0 for every l > -n-1.
    """
    if not (-m <= n <= -2):
        raise ValueError(f"need -m <= n <= -2, got n={n}, m={m}")
    if not (0 <= l <= m):
        raise ValueError(f"need 0 <= l <= m, got l={l}")
    total = Fraction(0)
    for j in range(l + 1):
        total += (Fraction(math.comb(m, j) * _falling(n + 1, j), math.factorial(m))
                  * math.comb(m - j, l - j) * _falling(-2 * n - 2, l - j))
    return total


def identity1_closed_form(m: int, n: int, l: int) -> Fraction:
    """Closed form C(m,l) (-n-1)_l / m! of identity1."""
    return Fraction(math.comb(m, l) * _falling(-n - 1, l), math.factorial(m))


def identity2(m: int) -> Fraction:
    """sum_j C(m,j) (-m)_j (2m)_{m-j} / m!; equals 1 for every m >= 1."""
    if m < 1:
        raise ValueError("m must be >= 1")
    total = Fraction(0)
    for j in range(m + 1):
        total += Fraction(math.comb(m, j) * _falling(-m, j) * _falling(2 * m, m - j),
                          math.factorial(m))
    return total
