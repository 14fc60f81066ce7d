"""Dense complex matrices, Hilbert-Schmidt subspaces and spectral projectors.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Everything that
passes through :func:`as_matrix` comes back as a read-only copy, so results can
be shared between threads without defensive copying.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import schur
from scipy.sparse.csgraph import connected_components

from stabgraph.exceptions import (
    DimensionError,
    NotCommutingError,
    NotNormalError,
    NotProjectorError,
)

DEFAULT_TOL = 1e-9
CLUSTER_TOL = 1e-8
NORMALITY_TOL = 1e-8
MAX_DIM = 4096


def as_matrix(a) -> np.ndarray:
    """Validate ``a`` as a square, finite complex matrix and return a read-only copy."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionError(f"expected a non-empty square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise DimensionError(f"dimension {m.shape[0]} exceeds the supported maximum {MAX_DIM}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    m.flags.writeable = False
    return m


def _same_dim(*mats: np.ndarray) -> int:
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hs_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``tr(A^dagger B)``."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def kron_all(factors: Iterable[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


# ---------------------------------------------------------------- subspaces


@dataclass(frozen=True, eq=False)
class OperatorSubspace:
    """Subspace of B(C^d) held as a Hilbert-Schmidt orthonormal basis.

    ``basis`` has shape ``(rank, d, d)``.
    """

    ambient_dim: int
    basis: np.ndarray
    tol: float = DEFAULT_TOL

    @property
    def rank(self) -> int:
        return int(self.basis.shape[0])

    def __len__(self) -> int:
        return self.rank

    def __iter__(self):
        return iter(self.basis)

    def coefficients(self, a) -> np.ndarray:
        """HS coefficients ``<B_i, A>`` of ``a`` against the basis."""
        a = np.asarray(a, dtype=complex)
        if a.shape != (self.ambient_dim, self.ambient_dim):
            raise DimensionError(
                f"matrix of shape {a.shape} does not live in B(C^{self.ambient_dim})"
            )
        flat = self.basis.reshape(self.rank, -1)
        return flat.conj() @ a.ravel()

    def residual(self, a) -> float:
        """HS norm of the component of ``a`` orthogonal to the subspace."""
        a = np.asarray(a, dtype=complex)
        coeffs = self.coefficients(a)
        proj = coeffs @ self.basis.reshape(self.rank, -1) if self.rank else 0.0
        return float(np.linalg.norm(a.ravel() - proj))


def orthonormalize(mats: Sequence, tol: float = DEFAULT_TOL, dim: int | None = None) -> OperatorSubspace:
    """Orthonormal basis (modified Gram-Schmidt, two passes) spanning ``mats``.

    A candidate is dropped when its residual after projection is at most
    ``tol`` times the largest input norm. ``dim`` fixes the ambient dimension
    when ``mats`` may be empty.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    arrays = [np.asarray(m, dtype=complex) for m in mats]
    for m in arrays:
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"expected square matrices, got shape {m.shape}")
    if arrays:
        d = _same_dim(*arrays)
        if dim is not None and dim != d:
            raise DimensionError(f"dimension mismatch: {d} vs {dim}")
    elif dim is None:
        raise DimensionError("cannot infer the ambient dimension of an empty list")
    else:
        d = dim

    vecs = np.array([m.ravel() for m in arrays]).reshape(len(arrays), d * d)
    norms = np.linalg.norm(vecs, axis=1) if len(arrays) else np.zeros(0)
    scale = float(norms.max()) if len(arrays) else 0.0
    q = np.empty((min(len(arrays), d * d), d * d), dtype=complex)
    k = 0
    if scale > 0:
        threshold = tol * scale
        for v in vecs:
            if k == q.shape[0]:
                break
            w = v.copy()
            for _ in range(2):
                if k:
                    w -= q[:k].T @ (q[:k].conj() @ w)
            nrm = np.linalg.norm(w)
            if nrm > threshold:
                q[k] = w / nrm
                k += 1
    basis = q[:k].reshape(k, d, d).copy()
    basis.flags.writeable = False
    return OperatorSubspace(ambient_dim=d, basis=basis, tol=tol)


def contains(space: OperatorSubspace, a, tol: float = DEFAULT_TOL) -> bool:
    """Whether ``a`` lies in ``space`` up to ``tol * max(1, ||a||_HS)``."""
    a = np.asarray(a, dtype=complex)
    return space.residual(a) <= tol * max(1.0, hs_norm(a))


def subspace_equal(s1: OperatorSubspace, s2: OperatorSubspace, tol: float = DEFAULT_TOL) -> bool:
    if s1.ambient_dim != s2.ambient_dim:
        raise DimensionError(f"dimension mismatch: {s1.ambient_dim} vs {s2.ambient_dim}")
    if s1.rank != s2.rank:
        return False
    return all(contains(s2, b, tol) for b in s1.basis) and all(
        contains(s1, b, tol) for b in s2.basis
    )


# ---------------------------------------------------------------- spectra


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: tuple
    projectors: tuple
    source_dim: int

    @property
    def pairs(self) -> list:
        return list(zip(self.eigenvalues, self.projectors))

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((self.source_dim, self.source_dim), dtype=complex)
        for lam, p in self.pairs:
            out += lam * p
        return out


def check_normal(u: np.ndarray, tol: float = NORMALITY_TOL) -> None:
    residual = hs_norm(u @ dagger(u) - dagger(u) @ u)
    if residual > tol * max(hs_norm(u), 1e-300):
        raise NotNormalError(f"matrix is not normal (residual {residual:.3e})")


def _cluster(values: np.ndarray, cluster_tol: float) -> list[np.ndarray]:
    """Group eigenvalues whose chains of pairwise gaps stay within ``cluster_tol``."""
    close = np.abs(values[:, None] - values[None, :]) <= cluster_tol
    count, labels = connected_components(close, directed=False)
    groups = [np.flatnonzero(labels == c) for c in range(count)]

    def key(idx):
        mean = values[idx].mean()
        return (-round(mean.real, 6), -round(mean.imag, 6))

    return sorted(groups, key=key)


def _split(u: np.ndarray, q: np.ndarray, cluster_tol: float) -> list[tuple[complex, np.ndarray]]:
    """Eigenspaces of ``u`` restricted to range(q), as (eigenvalue, isometry) pairs."""
    b = dagger(q) @ u @ q
    try:
        t, z = schur(b, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NotNormalError(f"eigensolver failed: {exc}") from exc
    values = np.diag(t)
    out = []
    for idx in _cluster(values, cluster_tol):
        out.append((complex(values[idx].mean()), q @ z[:, idx]))
    return out


def spectral_projectors(u, cluster_tol: float = CLUSTER_TOL) -> SpectralDecomposition:
    """Eigenvalue/projector pairs of a normal matrix, merging eigenvalues closer than ``cluster_tol``."""
    u = as_matrix(u)
    d = u.shape[0]
    check_normal(u)
    eye = np.eye(d)
    # Pauli-like input: Hermitian involution, projectors (I +- U)/2
    if hs_norm(u - dagger(u)) <= DEFAULT_TOL * d and hs_norm(u @ u - eye) <= DEFAULT_TOL * d:
        values, projs = [], []
        for lam in (1.0, -1.0):
            p = (eye + lam * u) / 2
            if abs(np.trace(p).real) > 0.5:
                values.append(complex(lam))
                projs.append(p)
        return SpectralDecomposition(tuple(values), tuple(projs), d)
    pairs = _split(u, np.eye(d, dtype=complex), cluster_tol)
    return SpectralDecomposition(
        tuple(lam for lam, _ in pairs),
        tuple(v @ dagger(v) for _, v in pairs),
        d,
    )


def check_commuting(mats: Sequence[np.ndarray], tol: float = NORMALITY_TOL) -> None:
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            a, b = mats[i], mats[j]
            residual = hs_norm(a @ b - b @ a)
            if residual > tol * max(1.0, hs_norm(a) * hs_norm(b)):
                raise NotCommutingError(i, j, residual)


def joint_eigenprojectors(us: Sequence, cluster_tol: float = CLUSTER_TOL) -> list[tuple[list, np.ndarray]]:
    """Minimal orthogonal projectors on whose ranges every input acts as a scalar.

    Returns ``(label, projector)`` pairs where ``label[k]`` is the scalar by
    which ``us[k]`` acts on the range.
    """
    mats = [as_matrix(u) for u in us]
    if not mats:
        raise ValueError("need at least one matrix")
    d = _same_dim(*mats)
    for m in mats:
        check_normal(m)
    check_commuting(mats)

    blocks: list[tuple[list, np.ndarray]] = [([], np.eye(d, dtype=complex))]
    for u in mats:
        refined = []
        for label, q in blocks:
            for lam, sub in _split(u, q, cluster_tol):
                refined.append((label + [lam], sub))
        blocks = refined
    return [(label, q @ dagger(q)) for label, q in blocks]


def is_projector(p, tol: float = DEFAULT_TOL) -> bool:
    p = np.asarray(p, dtype=complex)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        return False
    scale = max(1.0, hs_norm(p))
    return hs_norm(p - dagger(p)) <= tol * scale and hs_norm(p @ p - p) <= tol * scale


def rank_of_projector(p, tol: float = DEFAULT_TOL) -> int:
    p = np.asarray(p, dtype=complex)
    tr = np.trace(p)
    r = int(round(tr.real))
    if abs(tr - r) > tol * max(1, p.shape[0]):
        raise NotProjectorError(f"trace {tr:.6g} is not an integer")
    return r


# ---------------------------------------------------------------- JSON


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"dim": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        d = int(obj["dim"])
        re, im = obj["re"], obj.get("im")
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad matrix JSON: {exc}") from exc
    if im is None:
        im = [[0.0] * d for _ in range(d)]
    for part in (re, im):
        if not isinstance(part, list) or len(part) != d or any(
            not isinstance(row, list) or len(row) != d for row in part
        ):
            raise DimensionError(f"matrix JSON is not a {d}x{d} array")
    return as_matrix(np.array(re, dtype=float) + 1j * np.array(im, dtype=float))
