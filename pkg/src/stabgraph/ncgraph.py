"""Noncommutative graphs V = span{U M0 U^dagger} and their anticliques."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from stabgraph.exceptions import CoefficientError, DimensionError, NotNormalError, NotProjectorError, StabgraphError
from stabgraph.linalg import (
    CLUSTER_TOL,
    DEFAULT_TOL,
    OperatorSubspace,
    as_matrix,
    check_commuting,
    dagger,
    hs_norm,
    is_projector,
    joint_eigenprojectors,
    orthonormalize,
    rank_of_projector,
)
from stabgraph.pauli import PauliGroup, parse_pauli, to_matrix


@dataclass(frozen=True, eq=False)
class NcGraph:
    dim: int
    labels: tuple
    unitaries: tuple
    m0: np.ndarray
    conjugates: tuple
    space: OperatorSubspace


@dataclass(frozen=True, eq=False)
class AnticliqueCertificate:
    projector: np.ndarray
    rank: int
    scalars: dict
    residual: float
    eigenvalues: tuple = ()


@dataclass(frozen=True, eq=False)
class AnticliqueSearch:
    """Result of :func:`find_anticliques`.

    ``counterexamples`` holds joint eigenprojectors of rank >= 2 that failed
    compression. For an abelian family spanning an operator system this list
    should always be empty; anything in it points at a tolerance problem.
    """

    certificates: list = field(default_factory=list)
    counterexamples: list = field(default_factory=list)
    joint_ranks: tuple = ()

    def __iter__(self):
        return iter(self.certificates)

    def __len__(self):
        return len(self.certificates)


def _labeled(unitaries) -> tuple[list[str], list[np.ndarray]]:
    if isinstance(unitaries, Mapping):
        items = list(unitaries.items())
    else:
        items = []
        for k, u in enumerate(unitaries):
            if isinstance(u, tuple) and len(u) == 2 and isinstance(u[0], str):
                items.append(u)
            else:
                items.append((str(k), u))
    if not items:
        raise ValueError("need at least one unitary")
    return [str(k) for k, _ in items], [as_matrix(u) for _, u in items]


def group_unitaries(group: PauliGroup) -> dict:
    """``{str(g): matrix}`` for every element of a Pauli group."""
    return {str(g): to_matrix(g) for g in group.elements}


def build_ncgraph(unitaries, m0, tol: float = DEFAULT_TOL) -> NcGraph:
    """Span of ``U m0 U^dagger`` over a labeled family of unitaries.

    ``unitaries`` is a mapping label -> matrix, a list of ``(label, matrix)``
    pairs, or a plain list (labels become list positions).
    """
    labels, mats = _labeled(unitaries)
    m0 = as_matrix(m0)
    d = m0.shape[0]
    eye = np.eye(d)
    worst, worst_label = 0.0, None
    for label, u in zip(labels, mats):
        if u.shape != m0.shape:
            raise DimensionError(f"unitary {label} has shape {u.shape}, M0 has {m0.shape}")
        r = hs_norm(dagger(u) @ u - eye)
        if r > worst:
            worst, worst_label = r, label
    if worst > tol * max(1.0, np.sqrt(d)):
        raise NotNormalError(f"unitary {worst_label} is not unitary (residual {worst:.3e})")
    conjugates = tuple(u @ m0 @ dagger(u) for u in mats)
    return NcGraph(
        dim=d,
        labels=tuple(labels),
        unitaries=tuple(mats),
        m0=m0,
        conjugates=conjugates,
        space=orthonormalize(conjugates, tol),
    )


def is_operator_system(space: OperatorSubspace, tol: float = DEFAULT_TOL) -> tuple[bool, dict | None]:
    """Check that ``space`` contains the identity and is closed under adjoints.

    The witness is ``None`` on success, otherwise a dict naming the first
    failing condition and its residual.
    """
    eye = np.eye(space.ambient_dim)
    r = space.residual(eye)
    if r > tol * max(1.0, hs_norm(eye)):
        return False, {"condition": "identity-missing", "residual": r}
    for k, b in enumerate(space.basis):
        r = space.residual(dagger(b))
        if r > tol:
            return False, {"condition": "adjoint-escape", "index": k, "residual": r}
    return True, None


def compression_scalars(p: np.ndarray, mats: Sequence[np.ndarray]) -> tuple[list[complex], float]:
    """Scalars tr(PAP)/tr(P) and the worst residual ||PAP - c P||_HS."""
    tr = np.trace(p).real
    scalars, worst = [], 0.0
    for a in mats:
        pap = p @ a @ p
        c = complex(np.trace(pap) / tr)
        scalars.append(c)
        worst = max(worst, hs_norm(pap - c * p))
    return scalars, worst


def verify_anticlique(p, space: OperatorSubspace, tol: float = DEFAULT_TOL) -> tuple[bool, list[complex]]:
    """Whether ``P B P`` is a multiple of ``P`` for every basis element ``B`` of ``space``."""
    p = np.asarray(p, dtype=complex)
    if not is_projector(p, tol):
        raise NotProjectorError("input is not an orthogonal projector")
    if rank_of_projector(p, tol) < 1:
        raise NotProjectorError("projector has rank 0")
    if p.shape[0] != space.ambient_dim:
        raise DimensionError(f"projector dim {p.shape[0]} vs space dim {space.ambient_dim}")
    scalars, worst = compression_scalars(p, list(space.basis))
    return worst <= tol * hs_norm(p), scalars


def find_anticliques(graph: NcGraph, tol: float = DEFAULT_TOL, cluster_tol: float = CLUSTER_TOL) -> AnticliqueSearch:
    """Certify every rank >= 2 joint eigenprojector of the unitary family as an anticlique."""
    ok, witness = is_operator_system(graph.space, tol)
    if not ok:
        raise StabgraphError(f"span is not an operator system: {witness}")
    check_commuting(graph.unitaries)
    certificates, counterexamples, ranks = [], [], []
    for eigenvalues, p in joint_eigenprojectors(graph.unitaries, cluster_tol):
        rank = rank_of_projector(p, 1e-6)
        ranks.append(rank)
        if rank < 2:
            continue
        c, res_conj = compression_scalars(p, graph.conjugates)
        _, res_basis = compression_scalars(p, list(graph.space.basis))
        residual = max(res_conj, res_basis)
        cert = AnticliqueCertificate(
            projector=p,
            rank=rank,
            scalars=dict(zip(graph.labels, c)),
            residual=residual,
            eigenvalues=tuple(eigenvalues),
        )
        if residual <= tol * max(1.0, hs_norm(p)):
            certificates.append(cert)
        else:
            counterexamples.append(cert)
    return AnticliqueSearch(certificates, counterexamples, tuple(ranks))


def kl_verify(p, errors: Sequence, tol: float = DEFAULT_TOL) -> tuple[bool, np.ndarray]:
    """Knill-Laflamme check ``P E_i^dagger E_j P = lambda_ij P`` with Hermitian ``lambda``."""
    p = as_matrix(p)
    if not is_projector(p, tol):
        raise NotProjectorError("input is not an orthogonal projector")
    es = [as_matrix(e) for e in errors]
    for e in es:
        if e.shape != p.shape:
            raise DimensionError(f"error of shape {e.shape} vs projector {p.shape}")
    tr = np.trace(p).real
    r = len(es)
    lam = np.zeros((r, r), dtype=complex)
    ok = True
    for i in range(r):
        for j in range(r):
            block = p @ dagger(es[i]) @ es[j] @ p
            lam[i, j] = np.trace(block) / tr
            if hs_norm(block - lam[i, j] * p) > tol:
                ok = False
    if hs_norm(lam - dagger(lam)) > tol:
        ok = False
    return ok, lam


def weaver_bounds(dim_v: int, d: int, k: int) -> tuple[bool, bool]:
    """Sufficient conditions for a k-dimensional anticlique in a d-dimensional space.

    Returns ``(general, commuting)`` where general is
    ``dim_v (dim_v + 1) <= d / k`` and commuting is ``dim_v <= (d - k)/(k - 1)``.
    The commuting bound is vacuous at ``k = 1``.
    """
    if min(dim_v, d, k) < 1:
        raise ValueError("arguments must be positive integers")
    if k > d:
        raise ValueError(f"code dimension {k} exceeds space dimension {d}")
    general = dim_v * (dim_v + 1) * k <= d
    commuting = True if k == 1 else dim_v * (k - 1) <= d - k
    return general, commuting


def finite_average_check(unitaries, m0, tol: float = DEFAULT_TOL) -> bool:
    """Whether the group average of ``U m0 U^dagger`` is the identity."""
    _, mats = _labeled(unitaries)
    m0 = as_matrix(m0)
    avg = sum(u @ m0 @ dagger(u) for u in mats) / len(mats)
    return hs_norm(avg - np.eye(m0.shape[0])) <= tol * max(1.0, hs_norm(avg))


def pauli_coeffs_to_matrix(coeffs: Mapping[str, object], n: int | None = None) -> np.ndarray:
    """Expand ``{"XIZ": [re, im] | complex, ...}`` into a dense matrix."""
    if not coeffs:
        raise CoefficientError("empty coefficient map")
    acc = None
    for text, value in coeffs.items():
        p = parse_pauli(text, n)
        if n is None:
            n = p.n
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise CoefficientError(f"coefficient for {text} must be [re, im]")
            c = complex(float(value[0]), float(value[1]))
        else:
            c = complex(value)
        term = c * to_matrix(p)
        acc = term if acc is None else acc + term
    return acc
