"""Benchmark objectives: two 2-D test problems (a cosine-modulated bowl and
the Beale function) plus the five De Jong functions F1-F5, with analytic
gradients where they exist.

The Shekel foxholes constants ship as a plain-text data asset
(``data/foxholes.txt``, 25 rows of "a1 a2") and are verified against their
structural invariants at load time.
"""

from __future__ import annotations

import math
from importlib import resources

import numpy as np

from .core import BoxDomain, GradientUnavailable, Objective, RngStream, as_point

VALID_NAMES = ("TP1", "BEALE", "F1", "F2", "F3", "F4", "F5")

# TP1 has no published bounds; a symmetric box large enough for its ~50
# local minima.  Overridable through make_objective(bounds=...).
TP1_DEFAULT_BOUND = 16.0

_F4_COEF = np.arange(1, 31, dtype=float)


def eval_tp1(p) -> float:
    x = np.asarray(p, dtype=float)
    return float(x[0] ** 2 + x[1] ** 2 - 18.0 * math.cos(x[0]) - 18.0 * math.cos(x[1]))


def grad_tp1(p) -> np.ndarray:
    x = np.asarray(p, dtype=float)
    return 2.0 * x + 18.0 * np.sin(x)


def eval_beale(p) -> float:
    # Second coefficient is the standard 2.25: it is the only value for
    # which f(3, 0.5) = 0 holds, which the known optimum requires.
    x1, x2 = float(p[0]), float(p[1])
    t1 = 1.5 - x1 + x1 * x2
    t2 = 2.25 - x1 + x1 * x2 ** 2
    t3 = 2.625 - x1 + x1 * x2 ** 3
    return t1 * t1 + t2 * t2 + t3 * t3


def grad_beale(p) -> np.ndarray:
    x1, x2 = float(p[0]), float(p[1])
    t1 = 1.5 - x1 + x1 * x2
    t2 = 2.25 - x1 + x1 * x2 ** 2
    t3 = 2.625 - x1 + x1 * x2 ** 3
    g1 = 2.0 * (t1 * (x2 - 1.0) + t2 * (x2 ** 2 - 1.0) + t3 * (x2 ** 3 - 1.0))
    g2 = 2.0 * (t1 * x1 + t2 * 2.0 * x1 * x2 + t3 * 3.0 * x1 * x2 ** 2)
    return np.array([g1, g2])


def eval_f1(p) -> float:
    x = np.asarray(p, dtype=float)
    return float(np.sum(x * x))


def grad_f1(p) -> np.ndarray:
    return 2.0 * np.asarray(p, dtype=float)


def eval_f2(p) -> float:
    # Squared Rosenbrock form; without the square the function is unbounded
    # below on the box and (1, 1) would not be the minimizer.
    x1, x2 = float(p[0]), float(p[1])
    return 100.0 * (x1 ** 2 - x2) ** 2 + (1.0 - x1) ** 2


def grad_f2(p) -> np.ndarray:
    x1, x2 = float(p[0]), float(p[1])
    return np.array([
        400.0 * x1 * (x1 ** 2 - x2) - 2.0 * (1.0 - x1),
        -200.0 * (x1 ** 2 - x2),
    ])


def eval_f3(p) -> float:
    x = np.asarray(p, dtype=float)
    return float(30.0 + np.sum(np.floor(x)))


def f4_deterministic(p) -> float:
    """Noise-free part of F4: sum_i i * x_i^4."""
    x = np.asarray(p, dtype=float)
    return float(np.sum(_F4_COEF * x ** 4))


def eval_f4(p, rng: RngStream) -> float:
    # One fresh Gauss(0,1) per term per evaluation (30 draws each call).
    x = np.asarray(p, dtype=float)
    return float(np.sum(_F4_COEF * x ** 4 + rng.normal(size=30)))


def _load_foxholes() -> np.ndarray:
    text = resources.files("sgmopt").joinpath("data/foxholes.txt").read_text()
    rows = [line.split() for line in text.strip().splitlines()]
    a = np.array([[float(r[0]), float(r[1])] for r in rows]).T
    if a.shape != (2, 25):
        raise ValueError(f"foxholes data must be 2x25, got {a.shape}")
    base = np.array([-32.0, -16.0, 0.0, 16.0, 32.0])
    if not np.array_equal(a[0], np.tile(base, 5)):
        raise ValueError("foxholes row 1 must cycle (-32,-16,0,16,32)")
    if not np.array_equal(a[1], np.repeat(base, 5)):
        raise ValueError("foxholes row 2 must repeat each of (-32,-16,0,16,32) five times")
    if np.any(np.abs(a) > 65.536):
        raise ValueError("foxholes columns must lie inside [-65.536, 65.536]^2")
    return a


_FOXHOLES = _load_foxholes()
_F5_J = np.arange(1, 26, dtype=float)


def foxholes_matrix() -> np.ndarray:
    """The 2x25 foxholes constants (copy; callers may not mutate the asset)."""
    return _FOXHOLES.copy()


def eval_f5(p) -> float:
    x = np.asarray(p, dtype=float)
    d = (x[0] - _FOXHOLES[0]) ** 6 + (x[1] - _FOXHOLES[1]) ** 6
    return float(1.0 / (0.002 + np.sum(1.0 / (_F5_J + d))))


def finite_difference_gradient(fn, p, rel_step: float = 1e-6) -> np.ndarray:
    """Central differences with per-axis step rel_step * (1 + |x_i|)."""
    x = np.asarray(p, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * (1.0 + abs(x[i]))
        up = x.copy()
        dn = x.copy()
        up[i] += h
        dn[i] -= h
        g[i] = (fn(up) - fn(dn)) / (2.0 * h)
    return g


def _box(bound: float, dim: int) -> BoxDomain:
    return BoxDomain(np.full(dim, -bound), np.full(dim, bound))


def make_objective(name: str, bounds: float | None = None) -> Objective:
    """Build one of the named objectives, fully populated.

    ``bounds`` overrides the symmetric box half-width (TP1 only; the other
    functions have fixed published domains).
    """
    key = name.strip().upper()
    if key == "TP1":
        b = TP1_DEFAULT_BOUND if bounds is None else float(bounds)
        return Objective(
            name="TP1", dim=2, domain=_box(b, 2), fn=eval_tp1,
            gradient_fn=grad_tp1, known_optimum=((0.0, 0.0), -36.0))
    if bounds is not None:
        raise ValueError(f"{key} has a fixed domain; bounds override applies to TP1 only")
    if key == "BEALE":
        return Objective(
            name="BEALE", dim=2, domain=_box(4.5, 2), fn=eval_beale,
            gradient_fn=grad_beale, known_optimum=((3.0, 0.5), 0.0))
    if key == "F1":
        return Objective(
            name="F1", dim=3, domain=_box(5.12, 3), fn=eval_f1,
            gradient_fn=grad_f1, known_optimum=((0.0, 0.0, 0.0), 0.0))
    if key == "F2":
        return Objective(
            name="F2", dim=2, domain=_box(2.048, 2), fn=eval_f2,
            gradient_fn=grad_f2, known_optimum=((1.0, 1.0), 0.0))
    if key == "F3":
        # The all-lo corner floors to -6 per axis; domain [-5.12, 5.12]^5 is
        # the one on which the known optimum value 0 actually holds.
        return Objective(
            name="F3", dim=5, domain=_box(5.12, 5), fn=eval_f3,
            known_optimum=(tuple([-5.12] * 5), 0.0))
    if key == "F4":
        # Known-optimum value is the noise-free part at the origin.
        return Objective(
            name="F4", dim=30, domain=_box(1.28, 30), fn=eval_f4,
            known_optimum=(tuple([0.0] * 30), 0.0), stochastic=True,
            noise_free_fn=f4_deterministic)
    if key == "F5":
        return Objective(
            name="F5", dim=2, domain=_box(65.536, 2), fn=eval_f5,
            known_optimum=((-32.0, -32.0), 0.9980038388186492))
    raise ValueError(f"unknown objective {name!r}; valid names: {', '.join(VALID_NAMES)}")


def gradient(obj: Objective, p) -> np.ndarray:
    """Gradient of ``obj`` at an interior point.

    Analytic where available, central finite differences for F5; raises
    GradientUnavailable for F3 (piecewise constant) and F4 (stochastic).
    """
    p = as_point(p, obj.dim)
    if obj.stochastic:
        raise GradientUnavailable(f"{obj.name} is stochastic")
    if obj.name == "F3":
        raise GradientUnavailable("F3 is piecewise constant")
    if obj.gradient_fn is not None:
        return np.asarray(obj.gradient_fn(p), dtype=float)
    return finite_difference_gradient(obj.fn, p)
