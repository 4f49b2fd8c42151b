"""Numeric cross-checks that do not reuse the closed forms they verify.

The stationary law comes from a direct solve of a truncated generator, the
equilibrium from bisection on the joiner's profit, and the social optimum
from golden-section maximization of the welfare rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import analytic
from .model import DomainError, SolveError, SystemParams

MIN_TRUNCATION = 50
TAIL_MASS = 1e-12

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class GeneratorMatrix:
    """Truncated rate matrix.

    State 0 is ``(0, 0)``; state ``1 + n`` is ``(n, 1)`` for
    ``0 <= n <= truncation_level``.
    """

    truncation_level: int
    entries: sp.csr_matrix

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def dense(self) -> np.ndarray:
        return self.entries.toarray()


def truncation_for(params: SystemParams, q: float) -> int:
    """Smallest level keeping the neglected tail mass under ``TAIL_MASS``."""
    x = analytic.geometric_root(params, q)
    if x <= 0.0:
        return MIN_TRUNCATION
    return max(MIN_TRUNCATION, math.ceil(math.log(TAIL_MASS) / math.log(x)))


def build_generator(params: SystemParams, q: float, truncation: int | None = None) -> GeneratorMatrix:
    if not 0.0 <= q <= 1.0:
        raise DomainError("q", f"must lie in [0, 1], got {q!r}")
    if truncation is None:
        truncation = truncation_for(params, q)
    if truncation < MIN_TRUNCATION:
        raise DomainError("truncation", f"must be >= {MIN_TRUNCATION}, got {truncation}")

    lam_eff = params.lam * q
    size = truncation + 2
    rows, cols, vals = [0], [1], [params.eta]
    for n in range(truncation + 1):
        i = 1 + n
        if n < truncation and lam_eff > 0.0:
            rows.append(i)
            cols.append(i + 1)
            vals.append(lam_eff)
        if n >= 1:
            rows.append(i)
            cols.append(i - 1)
            vals.append(params.mu)
        rows.append(i)
        cols.append(0)
        vals.append(params.xi)
    off = sp.coo_matrix((vals, (rows, cols)), shape=(size, size)).tocsr()
    exit_rates = np.asarray(off.sum(axis=1)).ravel()
    gen = (off - sp.diags(exit_rates)).tocsr()
    return GeneratorMatrix(truncation_level=truncation, entries=gen)


def solve_stationary(gen: GeneratorMatrix) -> np.ndarray:
    """Solve ``pi Q = 0`` with ``sum(pi) = 1``."""
    a = gen.entries.T.tolil()
    a[0, :] = np.ones(gen.size)
    rhs = np.zeros(gen.size)
    rhs[0] = 1.0
    with np.errstate(all="raise"):
        try:
            pi = spla.spsolve(a.tocsc(), rhs)
        except (RuntimeError, FloatingPointError) as exc:
            raise SolveError(f"stationary solve failed: {exc}") from exc
    if not np.all(np.isfinite(pi)):
        raise SolveError("stationary solve produced non-finite values")
    residual = np.abs(gen.entries.T @ pi).max()
    scale = max(1.0, np.abs(gen.entries.diagonal()).max())
    if residual > 1e-10 * scale:
        raise SolveError(f"balance residual {residual:.3e} too large")
    # round-off can leave far-tail entries a hair below zero
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def stationary_vector(params: SystemParams, q: float, truncation: int | None = None) -> np.ndarray:
    return solve_stationary(build_generator(params, q, truncation))


def profit_join_series(params: SystemParams, q: float, levels: int = 400) -> float:
    """Joiner profit as a level-by-level sum over the solved stationary law."""
    pi = stationary_vector(params, q, max(levels, truncation_for(params, q)))
    serving = pi[1:]
    n = np.arange(serving.size)
    theta = (params.mu / (params.mu + params.xi)) ** (n + 1)
    c_xi = params.cost / params.xi
    profit = params.reward * theta - c_xi * (1.0 - theta)
    return float(np.dot(serving, profit) / serving.sum())


def welfare_from_vector(params: SystemParams, pi: np.ndarray) -> float:
    serving = pi[1:]
    n = np.arange(serving.size)
    served_rate = params.mu * serving[1:].sum()
    return float(served_rate * params.reward - params.cost * np.dot(n, serving))


def bisect_decreasing(f, lo: float, hi: float, tol: float = 1e-9, max_iter: int = 200) -> float:
    """Root of a strictly decreasing ``f`` with ``f(lo) > 0 > f(hi)``."""
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def golden_section_max(f, a: float, b: float, tol: float = 1e-10) -> float:
    """Argmax of a unimodal ``f`` on ``[a, b]``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def numeric_equilibrium(params: SystemParams) -> float:
    if params.lam <= 0.0:
        raise DomainError("lambda", "must be > 0")

    def gain(q):
        return analytic.profit_join(params, q)

    if gain(0.0) <= 0.0:
        return 0.0
    if gain(1.0) >= 0.0:
        return 1.0
    return bisect_decreasing(gain, 0.0, 1.0)


def numeric_social_optimum(params: SystemParams, grid_points: int = 201) -> float:
    if params.lam <= 0.0:
        raise DomainError("lambda", "must be > 0")

    def welfare(q):
        return analytic.social_welfare(params, q)

    grid = np.linspace(0.0, 1.0, grid_points)
    values = np.array([welfare(q) for q in grid])
    _check_unimodal(values)
    i = int(np.argmax(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid_points - 1)]
    q = golden_section_max(welfare, lo, hi)
    for edge in (0.0, 1.0):
        if abs(q - edge) < 1e-8 and welfare(edge) >= welfare(q):
            return edge
    return q


def _check_unimodal(values: np.ndarray, slack: float = 1e-12) -> None:
    diffs = np.diff(values)
    scale = slack * max(1.0, np.abs(values).max())
    falling = np.flatnonzero(diffs < -scale)
    if falling.size and np.any(diffs[falling[0]:] > scale):
        raise SolveError("welfare curve is not unimodal on the grid")


def numeric_price(params: SystemParams) -> float | None:
    """Fee found by bisection so that joining at the numeric optimum breaks even.

    Returns ``None`` when the numeric optimum is a boundary (no fee binds).
    """
    q_s = numeric_social_optimum(params)
    if q_s <= 0.0 or q_s >= 1.0:
        return None
    return bisect_decreasing(lambda fee: analytic.profit_join(params, q_s, fee=fee),
                             0.0, params.reward, tol=1e-13)
