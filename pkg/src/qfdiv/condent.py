"""Conditional entropies built from f-divergences.

The defining quantity is ``-inf_sigma D_f(rho || 1 (x) sigma)`` over normalized
density operators ``sigma`` living on the support of the reduced state of the
conditioning factor.  The generic path solves that minimization numerically
with a multi-start quasi-Newton descent over an exponential parameterization
``sigma(H) = exp(H) / tr exp(H)``, which keeps iterates strictly feasible.
For the power family there is an independent closed form (the reduced
``alpha``-power trace), and for ``alpha = 1`` the entropy-difference formula;
both are cross-validated against the optimizer in the test suite.

States carry their factor dimensions; ``cond`` selects the conditioning
factors by label, e.g. ``cond="B"`` on an (A, B, C) state conditions on the
middle factor alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from . import rng
from .errors import ConvergenceError, DomainError, PreconditionError
from .fdiv import ALPHA_ONE_TOL, DivergenceFunction, quantum_f_divergence
from .linalg import (
    RANK_TOL,
    DensityOperator,
    as_matrix,
    clamped_psd_eigh,
    permute_subsystems,
    ptrace_entries,
)

_NORMALIZED_TOL = 1e-10
_FACTOR_LABELS = "ABC"


class BipartiteState:
    """A normalized density operator together with its tensor factor dimensions."""

    __slots__ = ("rho", "dims")

    def __init__(self, rho, dims: Sequence[int]) -> None:
        if not isinstance(rho, DensityOperator):
            rho = DensityOperator(rho)
        dims = tuple(int(d) for d in dims)
        if len(dims) not in (2, 3) or any(d < 1 for d in dims):
            raise DomainError(f"dims must be two or three positive factors, got {dims}")
        if math.prod(dims) != rho.dim:
            raise DomainError(
                f"dimension mismatch: factors {dims} give {math.prod(dims)}, state has {rho.dim}"
            )
        if abs(rho.trace_value - 1.0) > _NORMALIZED_TOL:
            raise DomainError(
                f"conditional entropies need a normalized state, trace = {rho.trace_value!r}"
            )
        self.rho = rho
        self.dims = dims

    @property
    def entries(self) -> np.ndarray:
        return self.rho.entries

    def __repr__(self) -> str:
        return f"BipartiteState(dims={self.dims})"


@dataclass(frozen=True)
class OptimizerOptions:
    """Knobs of the conditional-entropy minimizer; all surfaced by the CLI."""

    starts: int = 4
    value_tol: float = 1e-6
    max_iters: int = 500
    fd_step: float = 1e-5
    seed: int = 0


@dataclass(frozen=True)
class OptimizationReport:
    value: float
    sigma_star: DensityOperator
    starts: int
    iterations_per_start: tuple[int, ...]
    best_start_index: int
    converged: bool


def alpha_log(xi: float, alpha: float) -> float:
    """Deformed logarithm ``(xi**(1-alpha) - 1) / (1 - alpha)``, ``log`` at ``alpha=1``."""
    xi = float(xi)
    alpha = float(alpha)
    if xi <= 0.0:
        raise DomainError(f"alpha_log needs a positive argument, got {xi!r}")
    if alpha <= 0.0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        return math.log(xi)
    return (xi ** (1.0 - alpha) - 1.0) / (1.0 - alpha)


def tsallis_entropy(rho, alpha: float) -> float:
    """Power-family entropy ``(1 - tr rho**alpha) / (alpha - 1)`` of a normalized state."""
    alpha = float(alpha)
    if alpha <= 0.0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    w = np.linalg.eigvalsh(as_matrix(rho))
    # rank floor: fractional powers amplify eigenvalue noise of the kernel
    w = w[w > RANK_TOL * float(np.abs(w).max(initial=0.0))]
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        return float(-np.sum(w * np.log(w)))
    return (1.0 - float(np.sum(w**alpha))) / (alpha - 1.0)


def _conditioning_view(state: BipartiteState, cond: str):
    """Permute the state so the conditioning factors form one trailing block.

    Returns ``(entries, d_rest, d_cond)`` for the equivalent two-factor split.
    """
    dims = state.dims
    n = len(dims)
    labels = _FACTOR_LABELS[:n]
    if not cond or any(c not in labels for c in cond) or len(set(cond)) != len(cond):
        raise DomainError(f"conditioning label {cond!r} invalid for factors {labels!r}")
    cond_idx = sorted(labels.index(c) for c in cond)
    rest = [i for i in range(n) if i not in cond_idx]
    if not rest:
        raise DomainError("cannot condition on every factor")
    perm = rest + cond_idx
    entries = state.entries
    if perm != list(range(n)):
        entries = permute_subsystems(entries, dims, perm)
    d_rest = math.prod(dims[i] for i in rest)
    d_cond = math.prod(dims[i] for i in cond_idx)
    return entries, d_rest, d_cond


def _require_wellbehaved(f: DivergenceFunction) -> None:
    if f.f_at_zero != 0.0:
        raise PreconditionError(
            f"{f.name}: conditional entropies need f(0) = 0, got {f.f_at_zero!r}"
        )
    if not f.operator_convex:
        raise PreconditionError(f"{f.name}: f is not operator convex on its stated range")


def _pack_hermitian(h: np.ndarray) -> np.ndarray:
    r = h.shape[0]
    iu = np.triu_indices(r, 1)
    return np.concatenate((np.diagonal(h).real, h[iu].real, h[iu].imag))


class _Objective:
    """Batched divergence evaluation over the exponential parameterization.

    The joint state is eigendecomposed once; afterwards one parameter vector
    costs a single ``r x r`` eigensolve plus small contractions, and finite
    difference gradients are evaluated as one batch.
    """

    def __init__(self, entries: np.ndarray, d_rest: int, d_cond: int, f: DivergenceFunction):
        self.f = f
        w, psi = clamped_psd_eigh(entries)
        rho_cond = ptrace_entries(entries, (d_rest, d_cond), [1])
        wb, vb = clamped_psd_eigh(rho_cond)
        self.support = vb[:, wb > 0.0]
        self.rho_cond = rho_cond
        r = self.support.shape[1]
        self.rank = r
        pos = w > 0.0
        self.weights = w[pos]
        kets = np.ascontiguousarray(psi[:, pos].T).reshape(-1, d_rest, d_cond)
        reduced = np.einsum("nkb,nkc->nbc", kets, kets.conj())
        self.reduced = np.einsum("br,nbc,cs->nrs", self.support.conj(), reduced, self.support)
        self.iu = np.triu_indices(r, 1)
        self.n_params = r * r

    def hermitian(self, thetas: np.ndarray) -> np.ndarray:
        m, r = thetas.shape[0], self.rank
        npair = r * (r - 1) // 2
        h = np.zeros((m, r, r), dtype=np.complex128)
        idx = np.arange(r)
        h[:, idx, idx] = thetas[:, :r]
        if npair:
            re = thetas[:, r : r + npair]
            im = thetas[:, r + npair :]
            h[:, self.iu[0], self.iu[1]] = re + 1j * im
            h[:, self.iu[1], self.iu[0]] = re - 1j * im
        return h

    def value_batch(self, thetas: np.ndarray) -> np.ndarray:
        lam, u = np.linalg.eigh(self.hermitian(np.atleast_2d(thetas)))
        lam = lam - lam.max(axis=1, keepdims=True)
        ex = np.exp(lam)
        s = ex / ex.sum(axis=1, keepdims=True)
        s = np.maximum(s, 1e-300)  # keeps 0 * inf out of the sum below
        overlap = np.einsum("mrj,nrs,msj->mnj", u.conj(), self.reduced, u).real
        ratios = self.weights[None, :, None] / s[:, None, :]
        with np.errstate(all="ignore"):
            fvals = np.asarray(self.f(ratios))
            bad = np.isinf(fvals) & (overlap <= 0.0)
            if bad.any():
                fvals = np.where(bad, 0.0, fvals)
            terms = s[:, None, :] * fvals * overlap
        return terms.sum(axis=(1, 2))

    def value(self, theta: np.ndarray) -> float:
        return float(self.value_batch(theta[None])[0])

    def fd_gradient(self, theta: np.ndarray, step: float) -> np.ndarray:
        k = self.n_params
        pts = np.tile(theta, (2 * k, 1))
        idx = np.arange(k)
        pts[idx, idx] += step
        pts[k + idx, idx] -= step
        vals = self.value_batch(pts)
        grad = (vals[:k] - vals[k:]) / (2.0 * step)
        return np.nan_to_num(grad, nan=0.0, posinf=1e12, neginf=-1e12)

    def sigma(self, theta: np.ndarray) -> np.ndarray:
        lam, u = np.linalg.eigh(self.hermitian(theta[None])[0])
        lam = lam - lam.max()
        ex = np.exp(lam)
        s = ex / ex.sum()
        inner = (u * s) @ u.conj().T
        return self.support @ inner @ self.support.conj().T


class _StallStop:
    """Stops a descent once the value improves by < 1e-10 over 20 iterations."""

    window = 20
    min_improvement = 1e-10

    def __init__(self, objective: _Objective):
        self.objective = objective
        self.best = math.inf
        self.flat = 0
        self.stalled = False

    def __call__(self, xk) -> None:
        v = self.objective.value(np.asarray(xk))
        if self.best - v < self.min_improvement:
            self.flat += 1
        else:
            self.flat = 0
        self.best = min(self.best, v)
        if self.flat >= self.window:
            self.stalled = True
            raise StopIteration


def _start_points(objective: _Objective, opts: OptimizerOptions) -> list[np.ndarray]:
    """Mixed state on the support, the reduced state itself, then seeded random."""
    r = objective.rank
    starts = [np.zeros(objective.n_params)]
    if opts.starts >= 2:
        v = objective.support
        sig0 = v.conj().T @ objective.rho_cond @ v
        w0, u0 = np.linalg.eigh(sig0)
        w0 = np.clip(w0.real, 1e-12, None)
        h = (u0 * np.log(w0)) @ u0.conj().T
        h = h - (np.trace(h).real / r) * np.eye(r)
        starts.append(_pack_hermitian(h))
    gen = rng.generator(opts.seed)
    for _ in range(opts.starts - len(starts)):
        starts.append(0.5 * rng.standard_normals(gen, objective.n_params))
    return starts[: max(1, opts.starts)]


def conditional_entropy_optimize(
    state: BipartiteState,
    f: DivergenceFunction,
    opts: OptimizerOptions | None = None,
    cond: str = "B",
) -> OptimizationReport:
    """Conditional entropy by direct minimization over the conditioning marginal.

    Runs ``opts.starts`` independent BFGS descents (finite-difference
    gradients) over ``sigma(H) = exp(H) / tr exp(H)`` restricted to the support
    of the reduced conditioning state; the divergence is convex there, so all
    converged starts must agree within ``opts.value_tol``.  Raises
    :class:`ConvergenceError` when no start converges.
    """
    _require_wellbehaved(f)
    opts = opts or OptimizerOptions()
    if opts.starts < 1:
        raise DomainError("optimizer needs at least one start")
    entries, d_rest, d_cond = _conditioning_view(state, cond)
    objective = _Objective(entries, d_rest, d_cond, f)

    if objective.rank == 1:
        # single feasible point: the support projector itself
        sigma = objective.support @ objective.support.conj().T
        full = np.kron(np.eye(d_rest), sigma)
        value = -quantum_f_divergence(entries, full, f)
        return OptimizationReport(
            value=value,
            sigma_star=DensityOperator(sigma),
            starts=0,
            iterations_per_start=(),
            best_start_index=0,
            converged=True,
        )

    runs = []
    for x0 in _start_points(objective, opts):
        stop = _StallStop(objective)
        res = minimize(
            objective.value,
            x0,
            jac=lambda th: objective.fd_gradient(th, opts.fd_step),
            method="BFGS",
            callback=stop,
            options={"gtol": 1e-9, "maxiter": opts.max_iters},
        )
        grad_norm = float(np.abs(res.jac).max()) if res.jac is not None else math.inf
        ok = bool(res.success) or stop.stalled or (res.status == 2 and grad_norm <= 1e-6)
        runs.append((float(res.fun), np.asarray(res.x), int(res.nit), ok, res.message))

    converged = [(v, i) for i, (v, _, _, ok, _) in enumerate(runs) if ok]
    if not converged:
        details = "; ".join(f"start {i}: {msg}" for i, (_, _, _, _, msg) in enumerate(runs))
        raise ConvergenceError(f"no optimizer start converged ({details})")
    best_value, best_index = min(converged)
    spread = max(v for v, _ in converged) - best_value
    sigma = objective.sigma(runs[best_index][1])
    return OptimizationReport(
        value=-best_value,
        sigma_star=DensityOperator(sigma),
        starts=len(runs),
        iterations_per_start=tuple(r[2] for r in runs),
        best_start_index=best_index,
        converged=spread <= opts.value_tol,
    )


def conditional_entropy_tsallis_closed(
    state: BipartiteState,
    alpha: float,
    cond: str = "B",
) -> tuple[float, DensityOperator]:
    """Closed-form power-family conditional entropy and its optimizing state.

    The minimizer is the normalized ``1/alpha`` power of the reduced
    ``alpha``-power ``tr_rest(rho**alpha)``, giving the value
    ``(1 - (tr [tr_rest(rho**alpha)]**(1/alpha))**alpha) / (alpha - 1)``.
    Valid for ``alpha`` in ``(0, 2]`` where the divergence is monotone.
    """
    alpha = float(alpha)
    if not 0.0 < alpha <= 2.0:
        raise PreconditionError(f"alpha must lie in (0, 2], got {alpha!r}")
    entries, d_rest, d_cond = _conditioning_view(state, cond)
    rho_cond = ptrace_entries(entries, (d_rest, d_cond), [1])
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        value = tsallis_entropy(entries, 1.0) - tsallis_entropy(rho_cond, 1.0)
        return value, DensityOperator(rho_cond)
    w, v = clamped_psd_eigh(entries)
    rho_pow = (v * w**alpha) @ v.conj().T
    reduced = ptrace_entries(rho_pow, (d_rest, d_cond), [1])
    wt, vt = clamped_psd_eigh(reduced)
    root = (vt * wt ** (1.0 / alpha)) @ vt.conj().T
    norm = float(np.trace(root).real)
    value = (1.0 - norm**alpha) / (alpha - 1.0)
    return value, DensityOperator(root / norm)


def conditional_entropy_vn_closed(state: BipartiteState, cond: str = "B") -> float:
    """Entropy-difference form ``H(rho) - H(rho_cond)`` of the conditional entropy."""
    entries, d_rest, d_cond = _conditioning_view(state, cond)
    rho_cond = ptrace_entries(entries, (d_rest, d_cond), [1])
    return tsallis_entropy(entries, 1.0) - tsallis_entropy(rho_cond, 1.0)


def thm2_bounds(
    state: BipartiteState,
    f: DivergenceFunction,
    cond: str = "B",
) -> tuple[float, float]:
    """Two-sided trace bounds on the conditional entropy.

    ``-tr(f(d rho)) / d <= H_f(rho|cond) <= -tr(f(rho))`` with ``d`` the
    conditioning dimension; for the power family these reduce to expressions
    in the joint power-family entropy.
    """
    _require_wellbehaved(f)
    entries, _, d_cond = _conditioning_view(state, cond)
    w, _ = clamped_psd_eigh(entries)
    w = w[w > 0.0]
    lower = -float(np.sum(f(d_cond * w))) / d_cond
    upper = -float(np.sum(f(w)))
    return lower, upper


def pure_state_bounds_tsallis(
    schmidt_coeffs: Sequence[float],
    alpha: float,
) -> tuple[float, float]:
    """Conditional-entropy bracket of a bipartite pure state from its Schmidt data.

    Lower bound ``ln_alpha(1/S)`` with ``S`` the Schmidt number, upper bound
    ``ln_alpha`` of the largest squared coefficient; both coincide when the
    coefficients are all equal, and the upper bound is strictly negative for
    entangled states.
    """
    alpha = float(alpha)
    if not 0.0 < alpha <= 2.0:
        raise PreconditionError(f"alpha must lie in (0, 2], got {alpha!r}")
    c = np.asarray(schmidt_coeffs, dtype=float).ravel()
    if (c < 0).any():
        raise DomainError("Schmidt coefficients must be nonnegative")
    if abs(float(np.sum(c**2)) - 1.0) > 1e-10:
        raise DomainError(f"Schmidt coefficients must have unit square sum, got {np.sum(c**2)!r}")
    schmidt_number = int(np.sum(c > 1e-12))
    lower = alpha_log(1.0 / schmidt_number, alpha)
    upper = alpha_log(float(np.max(c) ** 2), alpha)
    return lower, upper


def classical_register_closed_form(
    block_entropies: Sequence[float],
    p: Sequence[float],
    alpha: float,
) -> float:
    """Exact conditional entropy of a classical-register mixture from its blocks.

    Combines per-block conditional entropies ``H_y`` through the weighted
    ``1/alpha`` power mean of ``1 + (1 - alpha) H_y``; at ``alpha = 1`` this
    degenerates to the plain average.
    """
    alpha = float(alpha)
    if not 0.0 < alpha <= 2.0:
        raise PreconditionError(f"alpha must lie in (0, 2], got {alpha!r}")
    h = np.asarray(block_entropies, dtype=float).ravel()
    w = np.asarray(p, dtype=float).ravel()
    if h.size != w.size or h.size == 0:
        raise DomainError("block entropies and probabilities must align and be non-empty")
    if (w < 0).any() or abs(float(w.sum()) - 1.0) > 1e-10:
        raise DomainError("p must be a probability distribution")
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        return float(np.dot(w, h))
    t = 1.0 + (1.0 - alpha) * h
    if (t < 0).any():
        raise DomainError(
            f"inconsistent block entropies: 1 + (1 - alpha) H = {t.min()!r} is negative"
        )
    mean = float(np.dot(w, t ** (1.0 / alpha)))
    return (mean**alpha - 1.0) / (1.0 - alpha)


def chain_rule_rhs(h_abc_given_bc: float, d_c: int, alpha: float) -> float:
    """Upper bound on conditioning by less: ``d_C**(1-alpha) h + ln_alpha(d_C)``."""
    d_c = int(d_c)
    if d_c < 1:
        raise DomainError(f"d_C must be at least 1, got {d_c}")
    alpha = float(alpha)
    if not 0.0 < alpha <= 2.0:
        raise PreconditionError(f"alpha must lie in (0, 2], got {alpha!r}")
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        return float(h_abc_given_bc) + math.log(d_c)
    return d_c ** (1.0 - alpha) * float(h_abc_given_bc) + alpha_log(float(d_c), alpha)
