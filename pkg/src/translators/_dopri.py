"""Dormand-Prince 5(4) stepper for small autonomous systems.

Works on plain tuples of floats; for a 3-dimensional state this is several
times faster than going through numpy arrays.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence, Tuple

State = Tuple[float, ...]
Rhs = Callable[[State], State]

ORDER = 5

_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth-order minus embedded fourth-order weights
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40


def _axpy(y: State, h: float, terms: Sequence[Tuple[float, State]]) -> State:
    out = list(y)
    for a, k in terms:
        ha = h * a
        for i, ki in enumerate(k):
            out[i] += ha * ki
    return tuple(out)


def step(f: Rhs, y: State, k1: State, h: float) -> Tuple[State, State, State]:
    """One Dormand-Prince step of size ``h``.

    Returns ``(y_new, f(y_new), err)`` where ``err`` is the difference between
    the fifth- and fourth-order solutions.  ``k1`` must be ``f(y)``.
    """
    k2 = f(_axpy(y, h, [(_A21, k1)]))
    k3 = f(_axpy(y, h, [(_A31, k1), (_A32, k2)]))
    k4 = f(_axpy(y, h, [(_A41, k1), (_A42, k2), (_A43, k3)]))
    k5 = f(_axpy(y, h, [(_A51, k1), (_A52, k2), (_A53, k3), (_A54, k4)]))
    k6 = f(_axpy(y, h, [(_A61, k1), (_A62, k2), (_A63, k3), (_A64, k4), (_A65, k5)]))
    y_new = _axpy(y, h, [(_B1, k1), (_B3, k3), (_B4, k4), (_B5, k5), (_B6, k6)])
    k7 = f(y_new)
    err = tuple(
        h * (_E1 * a + _E3 * c + _E4 * d + _E5 * e + _E6 * g + _E7 * k)
        for a, c, d, e, g, k in zip(k1, k3, k4, k5, k6, k7)
    )
    return y_new, k7, err


def error_norm(err: State, y0: State, y1: State, atol: float, rtol: float) -> float:
    """Max-norm of the local error scaled by ``atol + rtol*|y|``."""
    return max(
        abs(e) / (atol + rtol * max(abs(a), abs(b)))
        for e, a, b in zip(err, y0, y1)
    )


def next_step(h: float, err_norm: float) -> float:
    if err_norm == 0.0:
        return 5.0 * h
    factor = 0.9 * err_norm ** (-1.0 / ORDER)
    return h * min(5.0, max(0.2, factor))


def hermite(y0: State, f0: State, y1: State, f1: State, h: float, theta: float) -> State:
    """Cubic Hermite interpolation across an accepted step, ``theta`` in [0, 1]."""
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + theta
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    return tuple(
        h00 * a + h * h10 * da + h01 * b + h * h11 * db
        for a, da, b, db in zip(y0, f0, y1, f1)
    )


def is_finite(y: State) -> bool:
    return all(math.isfinite(v) for v in y)
