"""Normalized-Laplacian spectra, eigenvector centrality and Fiedler bi-sections."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netcore import PinSnapshot

FIEDLER_ZERO = 1e-12


class SpectralError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SpectralSummary:
    lambda1: float
    lambda2: float  # nan when L_N has no second non-zero value (N <= 3 with a complex pair)
    delta_lambda: float
    fiedler: np.ndarray
    zero_count: int
    node_ids: tuple[int, ...] = ()


@dataclass(frozen=True)
class CentralityVector:
    node_ids: tuple[int, ...]
    values: np.ndarray
    iterations: int
    residual: float


@dataclass(frozen=True)
class Bisection:
    s_plus: frozenset[int]
    s_minus: frozenset[int]

    @property
    def n_nodes(self) -> int:
        return len(self.s_plus) + len(self.s_minus)

    @property
    def small(self) -> frozenset[int]:
        return self.s_plus if len(self.s_plus) <= len(self.s_minus) else self.s_minus

    @property
    def f_small(self) -> float:
        return min(len(self.s_plus), len(self.s_minus)) / self.n_nodes


def laplacian_matrix(weights: np.ndarray) -> np.ndarray:
    """``I - D_in^{-1} W^T`` for an arbitrary weight matrix with positive in-strengths."""
    w = np.asarray(weights, dtype=float)
    s_in = w.sum(axis=0)
    if np.any(s_in <= 0):
        bad = np.flatnonzero(s_in <= 0).tolist()
        raise SpectralError(f"zero in-strength at node indices {bad}")
    return np.eye(w.shape[0]) - w.T / s_in[:, None]


def normalized_laplacian(s: PinSnapshot) -> np.ndarray:
    return laplacian_matrix(s.weights)


def _eig(a: np.ndarray):
    try:
        vals, vecs = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigensolver did not converge: {exc}") from exc
    if not np.all(np.isfinite(vals)):
        raise SpectralError("eigensolver returned non-finite eigenvalues")
    return vals, vecs


def default_zero_tol(n: int) -> float:
    return 1e-9 * n


def zero_eigenvalue_count(weights: np.ndarray, zero_tol: float | None = None) -> int:
    lap = laplacian_matrix(weights)
    tol = default_zero_tol(lap.shape[0]) if zero_tol is None else zero_tol
    vals = np.linalg.eigvals(lap)
    return int(np.count_nonzero(np.abs(vals.real) < tol))


def _phase_fix(v: np.ndarray) -> np.ndarray:
    # rotate so the largest-modulus entry is real positive before taking the real part
    k = int(np.argmax(np.abs(v)))
    return (v * np.exp(-1j * np.angle(v[k]))).real


def _sign_fix(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) >= FIEDLER_ZERO)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def spectrum_from_weights(weights: np.ndarray, zero_tol: float | None = None,
                          node_ids: tuple[int, ...] = ()) -> SpectralSummary:
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    if n < 2:
        raise SpectralError("spectrum needs at least two nodes")
    tol = default_zero_tol(n) if zero_tol is None else zero_tol
    vals, vecs = _eig(laplacian_matrix(w))
    zero = np.abs(vals.real) < tol
    zero_count = int(zero.sum())
    if zero_count != 1:
        raise SpectralError(f"normalized Laplacian has {zero_count} zero eigenvalues; "
                            "graph is not a single strongly-connected component")
    # a conjugate pair contributes one value: keep real eigenvalues and the Im > 0 member
    imag_tol = 1e-10 * max(1.0, float(np.abs(vals).max()))
    keep = [k for k in range(n) if not zero[k] and vals[k].imag > -imag_tol]
    keep = [k for k in keep if abs(vals[k].imag) <= imag_tol or vals[k].imag > 0]
    keep.sort(key=lambda k: (vals[k].real, k))
    if not keep:
        raise SpectralError("no non-zero eigenvalue found")
    first = keep[0]
    lam1 = float(vals[first].real)
    if lam1 <= 0:
        raise SpectralError(f"non-positive algebraic connectivity {lam1:g}")
    lam2 = float(vals[keep[1]].real) if len(keep) > 1 else float("nan")
    vec = vecs[:, first]
    fiedler = vec.real if abs(vals[first].imag) <= imag_tol else _phase_fix(vec)
    fiedler = _sign_fix(fiedler / np.linalg.norm(fiedler))
    return SpectralSummary(lam1, lam2, lam2 - lam1, fiedler, zero_count, tuple(node_ids))


def spectrum_summary(s: PinSnapshot, zero_tol: float | None = None) -> SpectralSummary:
    """Algebraic connectivity and Fiedler vector of a snapshot.

    ``lambda1`` is the smallest positive real part among the eigenvalues of
    the normalized Laplacian; ``lambda2`` the next one, counted with
    multiplicity. Eigenvalues with ``|Re| < zero_tol`` count as zero.
    """
    return spectrum_from_weights(s.weights, zero_tol, s.node_ids)


def algebraic_connectivity(weights: np.ndarray, zero_tol: float | None = None) -> float:
    return spectrum_from_weights(weights, zero_tol).lambda1


def eigenvector_centrality(s: PinSnapshot, tol: float = 1e-12, max_iter: int = 100000,
                           left: bool = False) -> CentralityVector:
    """Dominant eigenvector of W by power iteration, unit Euclidean norm.

    The right eigenvector is used unless ``left`` is set. Iteration runs on
    ``(I + W/||W||)`` so that periodic graphs converge; the shift does not
    change the Perron vector.
    """
    w = s.weights.T if left else s.weights
    n = w.shape[0]
    a = np.eye(n) + w / np.abs(w).sum(axis=1).max()
    x = np.full(n, 1.0 / np.sqrt(n))
    resid = np.inf
    for it in range(1, max_iter + 1):
        y = a @ x
        y /= np.linalg.norm(y)
        resid = float(np.linalg.norm(y - x))
        x = y
        if resid < tol:
            return CentralityVector(s.node_ids, x, it, resid)
    raise SpectralError(f"power iteration did not converge in {max_iter} steps (residual {resid:.3g})")


def fiedler_bisection(summary: SpectralSummary) -> Bisection:
    v = np.asarray(summary.fiedler)
    ids = summary.node_ids or tuple(range(v.size))
    plus = frozenset(i for i, x in zip(ids, v) if x > 0 or abs(x) < FIEDLER_ZERO)
    minus = frozenset(ids) - plus
    if not plus or not minus:
        raise SpectralError("degenerate Fiedler vector: all entries share one sign")
    return Bisection(plus, minus)
