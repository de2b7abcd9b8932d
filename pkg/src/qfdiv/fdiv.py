"""Classical and quantum f-divergences.

A divergence is described by a :class:`DivergenceFunction`: a convex scalar
function on the positive axis together with its boundary data -- the limit at
zero, the slope at infinity ``ell = lim f(x)/x``, and the value at one.  Every
divergence returned here is an extended real: a finite ``float`` or ``math.inf``.
The kernel convention ``0 * inf = 0`` is applied explicitly where the mass of
the first argument outside the support of the second vanishes.

The primary evaluation path is the exact spectral double sum over clustered
eigenvalue pairs plus a kernel term weighted by ``ell``; the epsilon sweep
(second argument regularized to full rank) is a cross-validation mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .linalg import CLUSTER_TOL, RANK_TOL, _psd_spectrum, as_matrix, clamped_psd_eigh

INF = math.inf

ALPHA_ONE_TOL = 1e-6  # below this distance from 1, Tsallis paths switch to x*log(x)


@dataclass(frozen=True)
class DivergenceFunction:
    """Pointwise evaluator of f on (0, inf) plus the boundary data the kernel needs.

    ``fn`` must be vectorized over numpy arrays of positive floats and free of
    side effects.  ``f_at_zero`` is the limit at 0+ and ``ell`` the limit of
    ``f(x)/x`` at infinity; either may be ``inf``.  ``operator_convex`` records
    whether f is operator convex on the positive axis, which is what the
    monotonicity results need.
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    f_at_zero: float
    ell: float
    f_at_one: float
    operator_convex: bool

    def __post_init__(self) -> None:
        if self.ell == -INF:
            raise DomainError("divergence functions with ell = -inf are not supported")
        got = float(self.fn(np.asarray(1.0)))
        if abs(got - self.f_at_one) > 1e-12:
            raise DomainError(
                f"f_at_one inconsistent with the evaluator: {self.f_at_one!r} vs f(1)={got!r}"
            )

    def __call__(self, xi):
        return self.fn(np.asarray(xi, dtype=float))


def _xlogx(xi: np.ndarray) -> np.ndarray:
    return xi * np.log(xi)


def make_tsallis_f(alpha: float) -> DivergenceFunction:
    """Build the power-family divergence function of order ``alpha``.

    For ``alpha != 1`` this is ``(xi**alpha - xi) / (alpha - 1)``; within
    ``1e-6`` of 1 it switches to ``xi * log(xi)`` to avoid the cancellation in
    the quotient.  The family is operator convex exactly for ``alpha`` in
    ``(0, 2]``.
    """
    alpha = float(alpha)
    if alpha <= 0.0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        return DivergenceFunction(
            name="kl",
            fn=_xlogx,
            f_at_zero=0.0,
            ell=INF,
            f_at_one=0.0,
            operator_convex=True,
        )
    return DivergenceFunction(
        name=f"tsallis-{alpha:g}",
        fn=lambda xi, a=alpha: (xi**a - xi) / (a - 1.0),
        f_at_zero=0.0,
        ell=INF if alpha > 1.0 else 1.0 / (1.0 - alpha),
        f_at_one=0.0,
        operator_convex=alpha <= 2.0,
    )


def csiszar_divergence(p, q, f: DivergenceFunction) -> float:
    """Classical f-divergence ``sum_x q_x f(p_x / q_x)`` of two distributions.

    Terms with ``q_x = 0 < p_x`` contribute ``p_x * ell``; terms with
    ``p_x = q_x = 0`` contribute nothing.
    """
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.shape != q.shape:
        raise DomainError(f"length mismatch: {p.size} vs {q.size}")
    if (p < 0).any() or (q < 0).any():
        raise DomainError("probability vectors must be entrywise nonnegative")
    for name, vec in (("p", p), ("q", q)):
        if abs(vec.sum() - 1.0) > 1e-10:
            raise DomainError(f"{name} must sum to 1, got {vec.sum()!r}")

    total = 0.0
    both = (p > 0) & (q > 0)
    if both.any():
        total += float(np.sum(q[both] * f(p[both] / q[both])))
    p_only = (p > 0) & (q == 0)
    if p_only.any():
        if f.ell == INF:
            return INF
        total += f.ell * float(p[p_only].sum())
    q_only = (p == 0) & (q > 0)
    if q_only.any():
        if f.f_at_zero == INF:
            return INF
        total += f.f_at_zero * float(q[q_only].sum())
    return total


def _overlap_table(m_a: np.ndarray, m_b: np.ndarray, cluster_tol: float, rank_tol: float):
    """Clustered spectra of two PSD operators plus their projector overlap table.

    Returns ``(a_vals, b_vals, O)`` with ``O[i, j] = tr(P_a_i Q_b_j)``.
    """
    a_vals, a_starts, _, u = _psd_spectrum(m_a, cluster_tol, rank_tol)
    b_vals, b_starts, _, v = _psd_spectrum(m_b, cluster_tol, rank_tol)
    g = np.abs(u.conj().T @ v) ** 2
    table = np.add.reduceat(np.add.reduceat(g, a_starts, axis=0), b_starts, axis=1)
    return a_vals, b_vals, table


def quantum_f_divergence(
    A,
    B,
    f: DivergenceFunction,
    cluster_tol: float = CLUSTER_TOL,
    rank_tol: float = RANK_TOL,
) -> float:
    """Quantum f-divergence of PSD operator ``A`` with respect to ``B``.

    Evaluates the spectral double sum ``sum_{a, b>0} b f(a/b) tr(P_a Q_b)``
    plus the kernel term ``ell * tr(A (1 - B^0))``; the result is ``inf``
    exactly when ``ell = inf`` and the kernel mass exceeds ``rank_tol`` (or a
    cross term hits an infinite ``f_at_zero``).
    """
    m_a = as_matrix(A)
    m_b = as_matrix(B)
    if m_a.shape != m_b.shape:
        raise DomainError(f"dimension mismatch: {m_a.shape} vs {m_b.shape}")
    a_vals, b_vals, table = _overlap_table(m_a, m_b, cluster_tol, rank_tol)

    total = 0.0
    pos_a = a_vals > 0
    pos_b = b_vals > 0
    if pos_b.any():
        b_pos = b_vals[pos_b]
        if pos_a.any():
            ratios = np.divide.outer(a_vals[pos_a], b_pos)
            block = table[np.ix_(pos_a, pos_b)]
            with np.errstate(all="ignore"):
                fvals = np.asarray(f(ratios))
                bad = np.isinf(fvals) & (block <= 0.0)  # inf * 0 := 0
                if bad.any():
                    fvals = np.where(bad, 0.0, fvals)
                total += float(np.sum(b_pos * fvals * block))
        if (~pos_a).any():
            zero_mass = float(np.sum(b_pos * table[np.ix_(~pos_a, pos_b)]))
            if f.f_at_zero == INF:
                if zero_mass > rank_tol:
                    return INF
            else:
                total += f.f_at_zero * zero_mass
    if (~pos_b).any():
        kernel_mass = float(a_vals @ table[:, ~pos_b].sum(axis=1))
        if f.ell == INF:
            if kernel_mass > rank_tol:
                return INF
            # 0 * inf := 0 -- mass inside rank tolerance contributes nothing
        else:
            total += f.ell * kernel_mass
    return total


def quantum_f_divergence_eps_sweep(
    A,
    B,
    f: DivergenceFunction,
    eps_schedule: Sequence[float] = (1e-5, 1e-6, 1e-7),
    cluster_tol: float = CLUSTER_TOL,
    rank_tol: float = RANK_TOL,
) -> tuple[list[float], float]:
    """Divergence against ``B + eps * I`` along a decreasing epsilon schedule.

    The regularized second argument is full rank, so no kernel term arises.
    Returns the per-epsilon values and the linear extrapolation to zero of the
    last two points, or ``inf`` when successive values grow by more than a
    factor of 10 (the signature of a divergent limit).
    """
    eps = [float(e) for e in eps_schedule]
    if not eps:
        raise DomainError("eps_schedule must be non-empty")
    if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise DomainError("eps_schedule must be strictly decreasing and positive")
    m_b = as_matrix(B)
    eye = np.eye(m_b.shape[0])
    values = [
        quantum_f_divergence(A, m_b + e * eye, f, cluster_tol=cluster_tol, rank_tol=rank_tol)
        for e in eps
    ]
    if len(values) == 1:
        return values, values[0]
    v0, v1 = values[-2], values[-1]
    e0, e1 = eps[-2], eps[-1]
    if abs(v1) > 10.0 * max(abs(v0), 1e-12) or abs(v1) > 1e12:
        return values, INF
    extrapolated = v1 + (v1 - v0) * e1 / (e0 - e1)
    return values, extrapolated


def tsallis_divergence_closed(
    A,
    B,
    alpha: float,
    rank_tol: float = RANK_TOL,
) -> float:
    """Power-family divergence via the closed trace form, powers on supports.

    Computes ``(tr(A^alpha B^(1-alpha)) - tr A) / (alpha - 1)``; for
    ``alpha > 1`` the value is ``inf`` unless the range of ``A`` lies in the
    range of ``B``.  Within ``1e-6`` of ``alpha = 1`` this delegates to the
    logarithmic form.
    """
    alpha = float(alpha)
    if alpha <= 0.0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        return vn_relative_entropy_closed(A, B, rank_tol=rank_tol)
    a_vals, a_vecs = clamped_psd_eigh(as_matrix(A), rank_tol)
    b_vals, b_vecs = clamped_psd_eigh(as_matrix(B), rank_tol)
    g = np.abs(a_vecs.conj().T @ b_vecs) ** 2
    pos_b = b_vals > 0
    if alpha > 1.0:
        kernel_mass = float(a_vals @ g[:, ~pos_b].sum(axis=1)) if (~pos_b).any() else 0.0
        if kernel_mass > rank_tol:
            return INF
    cross = float(a_vals**alpha @ g[:, pos_b] @ b_vals[pos_b] ** (1.0 - alpha))
    return (cross - float(a_vals.sum())) / (alpha - 1.0)


def vn_relative_entropy_closed(A, B, rank_tol: float = RANK_TOL) -> float:
    """Relative entropy ``tr(A log A - A log B)`` on supports, ``inf`` off-support."""
    a_vals, a_vecs = clamped_psd_eigh(as_matrix(A), rank_tol)
    b_vals, b_vecs = clamped_psd_eigh(as_matrix(B), rank_tol)
    g = np.abs(a_vecs.conj().T @ b_vecs) ** 2
    pos_a = a_vals > 0
    pos_b = b_vals > 0
    kernel_mass = float(a_vals @ g[:, ~pos_b].sum(axis=1)) if (~pos_b).any() else 0.0
    if kernel_mass > rank_tol:
        return INF
    a_pos = a_vals[pos_a]
    first = float(np.sum(a_pos * np.log(a_pos)))
    second = float(a_pos @ g[np.ix_(pos_a, pos_b)] @ np.log(b_vals[pos_b]))
    return first - second
