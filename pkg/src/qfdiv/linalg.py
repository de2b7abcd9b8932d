"""Complex Hermitian linear algebra kernel.

Eigendecompositions are computed with ``numpy.linalg.eigh`` (LAPACK
``heevd``), which is deterministic for fixed input bits.  Exact degeneracy
of spectra does not survive floating point, so eigenvalues are re-grouped
into clusters before they are treated as a discrete spectrum; ``CLUSTER_TOL``
controls the merging gap and ``RANK_TOL`` the eigenvalue floor below which a
positive operator is considered to leave its support.

Tensor index convention: ``kron(A, B)`` puts the A index outer and the B
index inner, i.e. the composite row index is ``i_A * dim_B + i_B`` (the
``numpy.kron`` layout).  All partial traces and subsystem permutations use
the same convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import DomainError

CLUSTER_TOL = 1e-8
RANK_TOL = 1e-10

_HERM_TOL = 1e-12
_PSD_TOL = 1e-10
_TRACE_TOL = 1e-12
_PROJECTOR_TOL = 1e-8

_FACTOR_LABELS = "ABC"


class HermitianOperator:
    """A square complex matrix that is Hermitian within ``1e-12`` relative tolerance.

    The stored matrix is symmetrized, copied and marked read-only, so instances
    can be shared freely between threads.
    """

    __slots__ = ("entries",)

    def __init__(self, entries) -> None:
        m = np.array(entries, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"expected a square matrix, got shape {m.shape}")
        if not np.isfinite(m).all():
            raise DomainError("matrix entries must be finite")
        scale = 1.0 + np.abs(m).max(initial=0.0)
        defect = np.abs(m - m.conj().T).max(initial=0.0)
        if defect > _HERM_TOL * scale:
            raise DomainError(
                f"Hermiticity violated: max |M - M^dag| = {defect:.3e} "
                f"exceeds {_HERM_TOL:.0e} * (1 + max|M|)"
            )
        m = (m + m.conj().T) / 2.0
        m.setflags(write=False)
        self.entries = m

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"


class DensityOperator(HermitianOperator):
    """Positive semi-definite Hermitian operator with trace in ``(0, 1]``.

    Sub-normalized states (trace strictly below one) are allowed.
    """

    __slots__ = ()

    def __init__(self, entries) -> None:
        super().__init__(entries)
        lo = float(np.linalg.eigvalsh(self.entries).min())
        if lo < -_PSD_TOL:
            raise DomainError(
                f"positive semi-definiteness violated: smallest eigenvalue {lo:.3e}"
            )
        t = self.trace_value
        if not 0.0 < t <= 1.0 + _TRACE_TOL:
            raise DomainError(f"trace bound violated: trace = {t!r}, expected in (0, 1]")

    @property
    def trace_value(self) -> float:
        return float(np.trace(self.entries).real)


class EigenCluster(NamedTuple):
    eigenvalue: float
    projector: HermitianOperator
    multiplicity: int


@dataclass(frozen=True)
class SpectralDecomposition:
    """Clustered spectrum: pairwise orthogonal projectors, ascending eigenvalues."""

    clusters: tuple[EigenCluster, ...]

    @property
    def dim(self) -> int:
        return self.clusters[0].projector.dim

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for value, proj, _ in self.clusters:
            out += value * proj.entries
        return out


def as_matrix(x, check: bool = True) -> np.ndarray:
    """Coerce an operator wrapper or array-like to a complex square ndarray."""
    if isinstance(x, HermitianOperator):
        return x.entries
    m = np.asarray(x, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    if check:
        scale = 1.0 + np.abs(m).max(initial=0.0)
        defect = np.abs(m - m.conj().T).max(initial=0.0)
        if defect > _HERM_TOL * scale:
            raise DomainError(f"Hermiticity violated: max |M - M^dag| = {defect:.3e}")
        m = (m + m.conj().T) / 2.0
    return m


def _grouped_eigh(m: np.ndarray, cluster_tol: float):
    """Eigendecompose and merge eigenvalues separated by less than the tolerance.

    Returns ``(values, starts, ends, vecs)`` where ``values[k]`` is the mean
    eigenvalue of cluster ``k``, ``starts[k]:ends[k]`` its eigenvector column
    range, and ``vecs`` the full eigenvector matrix (ascending eigenvalues).
    """
    w, v = np.linalg.eigh(m)
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    thr = cluster_tol * scale
    gaps = np.diff(w)
    starts = np.concatenate(([0], np.nonzero(gaps >= thr)[0] + 1))
    ends = np.concatenate((starts[1:], [w.size]))
    values = np.array([w[s:e].mean() for s, e in zip(starts, ends)])
    return values, starts, ends, v


def _psd_spectrum(m: np.ndarray, cluster_tol: float, rank_tol: float):
    """Clustered spectrum of a PSD operator with the near-zero clusters clamped to 0.

    Eigenvalues at or below ``rank_tol * ||m||`` count as the kernel and are
    replaced by an exact 0 (merged into a single leading cluster).  Eigenvalues
    materially below the PSD tolerance raise a domain error.
    """
    values, starts, ends, v = _grouped_eigh(m, cluster_tol)
    norm = float(np.abs(values).max(initial=0.0))
    floor = rank_tol * norm
    bad = values < -max(_PSD_TOL, floor)
    if bad.any():
        raise DomainError(
            f"positive semi-definiteness violated: eigenvalue {values[bad].min():.3e}"
        )
    zero = values <= floor
    if zero.any():
        # collapse every clamped cluster into one kernel cluster
        keep = ~zero
        nz_start = int(ends[zero][-1])
        values = np.concatenate(([0.0], values[keep]))
        starts = np.concatenate(([0], starts[keep]))
        ends = np.concatenate(([nz_start], ends[keep]))
    return values, starts, ends, v


def clamped_psd_eigh(m: np.ndarray, rank_tol: float = RANK_TOL):
    """Raw ascending eigensystem of a PSD matrix with the kernel clamped to exact zeros.

    Eigenvalues at or below ``rank_tol * ||m||`` become 0; anything materially
    below the PSD tolerance raises a domain error.
    """
    w, v = np.linalg.eigh(m)
    floor = rank_tol * float(np.abs(w).max(initial=0.0))
    if w.min(initial=0.0) < -max(_PSD_TOL, floor):
        raise DomainError(f"positive semi-definiteness violated: eigenvalue {w.min():.3e}")
    return np.where(w <= floor, 0.0, w), v


def eig_hermitian(M, cluster_tol: float = CLUSTER_TOL) -> SpectralDecomposition:
    """Clustered spectral decomposition of a Hermitian operator.

    Eigenvalues whose mutual gap is below ``cluster_tol * max(1, ||M||)`` are
    merged into a single cluster whose projector sums the corresponding rank-1
    projectors.  Clusters are returned in ascending eigenvalue order.
    """
    m = as_matrix(M)
    values, starts, ends, v = _grouped_eigh(m, cluster_tol)
    clusters = []
    for val, s, e in zip(values, starts, ends):
        block = v[:, s:e]
        proj = HermitianOperator(block @ block.conj().T)
        clusters.append(EigenCluster(float(val), proj, int(e - s)))
    return SpectralDecomposition(tuple(clusters))


def support_projector(A, rank_tol: float = RANK_TOL) -> HermitianOperator:
    """Orthogonal projector onto the range of a positive operator.

    Eigenvectors with eigenvalue above ``rank_tol * ||A||`` span the support;
    the zero operator maps to the zero projector.
    """
    m = as_matrix(A)
    w, v = np.linalg.eigh(m)
    thr = rank_tol * float(np.abs(w).max(initial=0.0))
    cols = v[:, w > thr]
    return HermitianOperator(cols @ cols.conj().T)


def is_projector(P, tol: float = _PROJECTOR_TOL) -> bool:
    """True when ``P`` is Hermitian and idempotent within ``tol``."""
    try:
        m = as_matrix(P)
    except DomainError:
        return False
    return bool(np.abs(m @ m - m).max(initial=0.0) <= tol)


def projector_join(P, Q) -> HermitianOperator:
    """Projector onto the sum of the ranges of two projectors."""
    if not is_projector(P) or not is_projector(Q):
        raise DomainError("projector_join expects idempotent Hermitian inputs")
    return support_projector(as_matrix(P) + as_matrix(Q))


def _factor_indices(keep: str, n_factors: int) -> list[int]:
    labels = _FACTOR_LABELS[:n_factors]
    if not keep or any(c not in labels for c in keep) or len(set(keep)) != len(keep):
        raise DomainError(f"subsystem label {keep!r} invalid for {n_factors} factors")
    idx = sorted(labels.index(c) for c in keep)
    return idx


def ptrace_entries(entries: np.ndarray, dims: Sequence[int], keep_idx: Sequence[int]) -> np.ndarray:
    """Partial trace at the array level, keeping the listed factor indices in order."""
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    if entries.shape != (math.prod(dims),) * 2:
        raise DomainError(
            f"dimension mismatch: matrix of shape {entries.shape} vs factors {dims}"
        )
    t = entries.reshape(*dims, *dims)
    removed = 0
    for ax in sorted(set(range(n)) - set(keep_idx), reverse=True):
        t = np.trace(t, axis1=ax, axis2=ax + n - removed)
        removed += 1
    d_keep = math.prod(dims[i] for i in keep_idx)
    return np.ascontiguousarray(t.reshape(d_keep, d_keep))


def partial_trace(rho, keep: str, dims: Sequence[int] | None = None) -> DensityOperator:
    """Reduced state over the kept subsystems, e.g. ``keep="B"`` traces out A.

    ``rho`` may be a :class:`~qfdiv.condent.BipartiteState` (dims taken from it),
    or any operator together with an explicit ``dims`` tuple.
    """
    if dims is None:
        dims = getattr(rho, "dims", None)
        if dims is None:
            raise DomainError("dims are required unless the state carries them")
    entries = as_matrix(getattr(rho, "rho", rho))
    keep_idx = _factor_indices(keep, len(dims))
    return DensityOperator(ptrace_entries(entries, dims, keep_idx))


def permute_subsystems(entries: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of an operator; ``perm[k]`` is the old index of new factor ``k``."""
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    if sorted(perm) != list(range(n)):
        raise DomainError(f"invalid permutation {perm!r} for {n} factors")
    t = entries.reshape(*dims, *dims)
    axes = [*perm, *(p + n for p in perm)]
    d = math.prod(dims)
    return np.ascontiguousarray(t.transpose(axes).reshape(d, d))


def kron(A, B):
    """Tensor product with the A index outer and the B index inner.

    Returns a wrapped operator when both inputs are wrapped, otherwise an ndarray.
    """
    out = np.kron(as_matrix(A, check=False), as_matrix(B, check=False))
    if isinstance(A, HermitianOperator) and isinstance(B, HermitianOperator):
        return HermitianOperator(out)
    return out


def apply_spectral_function(
    A,
    g: Callable[[float], float],
    on_support_only: bool = False,
    cluster_tol: float = CLUSTER_TOL,
    rank_tol: float = RANK_TOL,
) -> HermitianOperator:
    """Apply a scalar function to the clustered eigenvalues of a PSD operator.

    With ``on_support_only`` the kernel cluster is skipped (stays zero), which
    realizes the convention that powers of a positive operator are taken on
    its support.  A non-finite value of ``g`` at a present eigenvalue is a
    domain error.
    """
    m = as_matrix(A)
    values, starts, ends, v = _psd_spectrum(m, cluster_tol, rank_tol)
    mapped = np.zeros(m.shape[0])
    for val, s, e in zip(values, starts, ends):
        if val == 0.0 and on_support_only:
            continue
        with np.errstate(all="ignore"):
            y = float(g(val))
        if not math.isfinite(y):
            raise DomainError(f"spectral function undefined at eigenvalue {val!r}")
        mapped[s:e] = y
    return HermitianOperator((v * mapped) @ v.conj().T)


def hs_inner(X, Y) -> complex:
    """Hilbert-Schmidt inner product tr(X^dag Y)."""
    x = as_matrix(X, check=False)
    y = as_matrix(Y, check=False)
    if x.shape != y.shape:
        raise DomainError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return complex(np.vdot(x, y))
