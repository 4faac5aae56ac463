"""Shared test utilities: random configurations and independent oracles."""

import math

import numpy as np

from maxface.configuration import Configuration, LevelForm


def random_configuration(rng: np.random.Generator, max_necks: int = 8) -> Configuration:
    """A valid random configuration with N <= max_necks, well-separated necks."""
    while True:
        L = int(rng.integers(2, 5))
        n = []
        remaining = max_necks
        ok = True
        for _ in range(L - 1):
            if remaining < 1:
                ok = False
                break
            nl = int(rng.integers(1, min(3, remaining) + 1))
            n.append(nl)
            remaining -= nl
        if not ok:
            continue
        pts: list[complex] = []
        rows = []
        failed = False
        for nl in n:
            row = []
            for _ in range(nl):
                for _attempt in range(200):
                    z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
                    if all(abs(z - w) > 0.25 for w in pts):
                        row.append(z)
                        pts.append(z)
                        break
                else:
                    failed = True
                    break
            if failed:
                break
            rows.append(tuple(row))
        if failed:
            continue
        Q = rng.uniform(-2, 2, size=L)
        Q[-1] -= Q.sum()
        return Configuration(L=L, n=tuple(n), p=tuple(rows), Q=tuple(Q))


def contour_residue_power(form: LevelForm, pole: complex, power: int,
                          n_points: int = 4096) -> complex:
    """Trapezoid-rule contour oracle for residue_power (independent path)."""
    other = [abs(q - pole) for q, _ in form.poles if abs(q - pole) > 1e-12]
    radius = 0.5 * min(other) if other else 0.5
    theta = 2.0 * math.pi * np.arange(n_points) / n_points
    z = pole + radius * np.exp(1j * theta)
    f = np.zeros(n_points, dtype=complex)
    for q, r in form.poles:
        f += r / (z - q)
    return complex(radius * np.mean(f**power * np.exp(1j * theta)))
