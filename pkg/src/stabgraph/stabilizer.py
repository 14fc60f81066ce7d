"""Operator-system structure of V_{M0} for Pauli stabilizer groups.

Coefficients of M0 are indexed by sigma indices ``(j_1, ..., j_n)`` with
``0=I, 1=Z, 2=X, 3=Y`` (see :mod:`stabgraph.pauli` for the sign of Y). For
``G = <Z_1, ..., Z_s>`` every index falls into a block ``u in {0,1}^s`` with
``u_r = 1`` exactly when ``j_r`` is X or Y, i.e. when sigma_{j_r}
anticommutes with Z.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from stabgraph.exceptions import CoefficientError, DimensionError, GroupError
from stabgraph.linalg import (
    DEFAULT_TOL,
    OperatorSubspace,
    contains,
    dagger,
    hs_norm,
    orthonormalize,
    subspace_equal,
)
from stabgraph.ncgraph import build_ncgraph, is_operator_system
from stabgraph.pauli import (
    LETTERS,
    PauliGroup,
    PauliString,
    all_paulis,
    clifford_canonicalize,
    codespace_projector,
    generate_group,
    gf2_rank,
    normalizer,
    require_stabilizer,
    to_matrix,
)

SPAN_MAX_QUBITS = 5
CLASSICAL_MAX_QUBITS = 4


def block_of(index: tuple, s: int) -> tuple:
    return tuple(int(j >= 2) for j in index[:s])


@dataclass(frozen=True, eq=False)
class M0Coefficients:
    """Pauli expansion ``M0 = sum alpha[j] sigma_{j_1} (x) ... (x) sigma_{j_n}``."""

    n: int
    s: int
    alpha: dict

    def __post_init__(self):
        if not 1 <= self.s <= self.n:
            raise CoefficientError(f"need 1 <= s <= n, got s={self.s}, n={self.n}")
        clean = {}
        for key, value in self.alpha.items():
            key = tuple(int(j) for j in key)
            if len(key) != self.n or any(j not in (0, 1, 2, 3) for j in key):
                raise CoefficientError(f"malformed index {key} for n={self.n}")
            clean[key] = clean.get(key, 0) + complex(value)
        object.__setattr__(self, "alpha", clean)

    @property
    def identity_coeff(self) -> complex:
        return self.alpha.get((0,) * self.n, 0j)

    def to_matrix(self) -> np.ndarray:
        d = 2**self.n
        out = np.zeros((d, d), dtype=complex)
        for key, a in self.alpha.items():
            if a != 0:
                out += a * to_matrix(PauliString.from_indices(key))
        return out

    def blocks(self) -> dict:
        """Nonzero-u blocks: ``{u: {index: alpha}}`` (only indices with a stored coefficient)."""
        out: dict = {}
        for key, a in sorted(self.alpha.items()):
            u = block_of(key, self.s)
            if any(u):
                out.setdefault(u, {})[key] = a
        return out

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "s": self.s,
            "alpha": {
                " ".join(map(str, k)): [a.real, a.imag] for k, a in sorted(self.alpha.items())
            },
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "M0Coefficients":
        try:
            n, s, raw = int(obj["n"]), int(obj["s"]), obj["alpha"]
            alpha = {}
            for key, value in raw.items():
                idx = tuple(int(t) for t in key.split())
                alpha[idx] = complex(float(value[0]), float(value[1]))
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise CoefficientError(f"bad coefficient JSON: {exc}") from exc
        return cls(n, s, alpha)

    @classmethod
    def from_letters(cls, coeffs: Mapping[str, complex], s: int) -> "M0Coefficients":
        """From ``{"XIZ": c, ...}``; letters map to sigma indices via ``IZXY``."""
        if not coeffs:
            raise CoefficientError("empty coefficient map")
        ns = {len(k) for k in coeffs}
        if len(ns) != 1:
            raise CoefficientError("coefficient keys have different lengths")
        alpha = {}
        for text, c in coeffs.items():
            if set(text) - set(LETTERS):
                raise CoefficientError(f"bad Pauli letters {text!r}")
            alpha[tuple(LETTERS.index(ch) for ch in text)] = complex(c)
        return cls(ns.pop(), s, alpha)


def valid_m0_check(coeffs: M0Coefficients, tol: float = DEFAULT_TOL) -> tuple[bool, list]:
    """Analytic test that V_{M0} over ``<Z_1..Z_s>`` is an operator system.

    Conditions: nonzero identity coefficient; no term whose first s factors
    all commute with Z (other than the identity); within each nonzero u-block
    the coefficient vector is a complex multiple of a real vector. The last is
    tested as ``|sum v_k^2| = ||v||^2``, which avoids dividing by any
    coefficient.
    """
    scale = max([1.0] + [abs(a) for a in coeffs.alpha.values()])
    violations = []
    if abs(coeffs.identity_coeff) <= tol * scale:
        violations.append({"condition": "identity-coefficient-zero"})
    zero = (0,) * coeffs.n
    for key, a in sorted(coeffs.alpha.items()):
        if key != zero and not any(block_of(key, coeffs.s)) and abs(a) > tol * scale:
            violations.append(
                {"condition": "commuting-term", "index": " ".join(map(str, key)), "value": a}
            )
    for u, block in coeffs.blocks().items():
        v = np.array(list(block.values()))
        norm2 = float(np.sum(np.abs(v) ** 2))
        if norm2 == 0:
            continue
        defect = (norm2 - abs(np.sum(v * v))) / norm2
        if defect > tol:
            violations.append(
                {"condition": "block-not-phase-aligned", "block": "".join(map(str, u)), "defect": defect}
            )
    return not violations, violations


def _block_indices(n: int, s: int, u: tuple) -> list[tuple]:
    heads = [(2, 3) if ur else (0, 1) for ur in u]
    return [h + t for h in itertools.product(*heads) for t in itertools.product(range(4), repeat=n - s)]


def _nonzero_blocks(s: int) -> list[tuple]:
    return [u for u in itertools.product((0, 1), repeat=s) if any(u)]


def _real_coefficient(rng: np.random.Generator) -> float:
    return float(rng.choice([-1, 1]) * rng.uniform(0.25, 2.0))


def valid_m0_sample(n: int, s: int, seed: int, max_terms: int = 3) -> M0Coefficients:
    """Random valid coefficients: one phase per block times sparse real coefficients."""
    if not 1 <= s <= n:
        raise CoefficientError(f"need 1 <= s <= n, got s={s}, n={n}")
    rng = np.random.default_rng(seed)
    alpha = {(0,) * n: rng.uniform(0.5, 2.0) * np.exp(2j * np.pi * rng.random())}
    for u in _nonzero_blocks(s):
        keys = _block_indices(n, s, u)
        count = int(rng.integers(1, min(max_terms, len(keys)) + 1))
        phase = np.exp(2j * np.pi * rng.random())
        for k in rng.choice(len(keys), size=count, replace=False):
            alpha[keys[int(k)]] = phase * _real_coefficient(rng)
    return M0Coefficients(n, s, alpha)


def invalid_m0_sample(n: int, s: int, seed: int) -> M0Coefficients:
    """A valid sample broken in exactly one of the three ways (chosen by ``seed``)."""
    base = valid_m0_sample(n, s, seed)
    rng = np.random.default_rng([seed, 1])
    alpha = dict(base.alpha)
    mode = int(rng.integers(3))
    if mode == 0:
        alpha[(0,) * n] = 0j
    elif mode == 1:
        keys = [k for k in _block_indices(n, s, (0,) * s) if any(k)]
        alpha[keys[int(rng.integers(len(keys)))]] = complex(_real_coefficient(rng), _real_coefficient(rng))
    else:
        u = _nonzero_blocks(s)[int(rng.integers(2**s - 1))]
        keys = _block_indices(n, s, u)
        anchor = next(k for k in keys if k in alpha)
        phase = alpha[anchor] / abs(alpha[anchor])
        other = [k for k in keys if k != anchor]
        # a quarter turn off the block's common phase
        alpha[other[int(rng.integers(len(other)))]] = 1j * phase * abs(_real_coefficient(rng))
    return M0Coefficients(n, s, alpha)


def vm0_characterize(coeffs: M0Coefficients, tol: float = DEFAULT_TOL) -> OperatorSubspace:
    """span{I} + span{block sums} built directly from the coefficients."""
    ok, violations = valid_m0_check(coeffs, tol)
    if not ok:
        raise CoefficientError(f"coefficients are not valid: {violations[0]}")
    d = 2**coeffs.n
    mats = [np.eye(d, dtype=complex)]
    for block in coeffs.blocks().values():
        mats.append(sum(a * to_matrix(PauliString.from_indices(k)) for k, a in block.items()))
    return orthonormalize(mats, tol, dim=d)


def z_form_matrices(n: int, s: int) -> list[np.ndarray]:
    """Matrices of every element of ``<Z_1, ..., Z_s>``."""
    return [
        to_matrix(PauliString.from_indices(tuple(bits) + (0,) * (n - s)))
        for bits in itertools.product((0, 1), repeat=s)
    ]


def independent_generators(gens) -> list[PauliString]:
    """Greedy subset of ``gens`` with the same GF(2) span."""
    kept: list[PauliString] = []
    for g in gens:
        if gf2_rank(p.symplectic() for p in kept + [g]) > len(kept):
            kept.append(g)
    return kept


def expected_span_rank(n: int, s: int) -> int:
    return 4**n - 2**s * 4 ** (n - s) + 1


class SpanIdentity(NamedTuple):
    lhs: OperatorSubspace
    rhs: OperatorSubspace
    equal: bool


def theorem2_span(group: PauliGroup, tol: float = DEFAULT_TOL) -> SpanIdentity:
    """Compare the span of all operator-system V_{M0} with span{I, Paulis outside N(G)}.

    The left side is generated by ``M0 = U (I + sigma) U^dagger`` for every
    Z-form Pauli sigma that anticommutes with some Z_r (r <= s), where U
    maps ``Z_r`` to the group's generators. Each of these graphs is checked
    to be an operator system before it is added.
    """
    require_stabilizer(group)
    n = group.n
    if n > SPAN_MAX_QUBITS:
        raise DimensionError(f"{n} qubits exceeds the span cap of {SPAN_MAX_QUBITS}")
    gens = independent_generators(group.generators)
    s = len(gens)
    if s == 0:
        raise GroupError("trivial group: need at least one generator")
    canonical = generate_group(gens, n)
    u, _ = clifford_canonicalize(canonical)
    d = 2**n
    eye = np.eye(d, dtype=complex)
    elements = group.matrices()

    pieces = []
    for sigma in all_paulis(n):
        if not any(j >= 2 for j in sigma.indices[:s]):
            continue
        m0 = u @ (eye + to_matrix(sigma)) @ dagger(u)
        graph = build_ncgraph(elements, m0, tol)
        ok, witness = is_operator_system(graph.space, tol)
        if not ok:
            raise GroupError(f"V_(I+{sigma}) is not an operator system: {witness}")
        pieces.extend(graph.space.basis)
    lhs = orthonormalize(pieces, tol, dim=d)

    inside = set(normalizer(group))
    rhs = orthonormalize([eye] + [to_matrix(p) for p in all_paulis(n) if p not in inside], tol, dim=d)
    return SpanIdentity(lhs, rhs, subspace_equal(lhs, rhs, tol))


@dataclass(frozen=True)
class ErrorVerdict:
    pauli: str
    compresses: bool
    in_span: bool
    scalar: complex

    @property
    def agree(self) -> bool:
        return self.compresses == self.in_span


def classical_stabilizer_check(group: PauliGroup, tol: float = DEFAULT_TOL, jobs: int = 1) -> tuple[bool, list]:
    """Brute-force both sides of ``PEP = c P  <=>  E in span{(P_n minus N(G)) and G}``.

    Every letter-form Pauli E is tested; the report lists one
    :class:`ErrorVerdict` per E, in :func:`all_paulis` order.
    """
    require_stabilizer(group)
    n = group.n
    if n > CLASSICAL_MAX_QUBITS:
        raise DimensionError(f"{n} qubits exceeds the brute-force cap of {CLASSICAL_MAX_QUBITS}")
    p = codespace_projector(group)
    tr = np.trace(p).real
    scale = max(1.0, hs_norm(p))
    inside = set(normalizer(group))
    span = orthonormalize(
        [to_matrix(e) for e in all_paulis(n) if e not in inside] + group.matrices(),
        tol,
        dim=2**n,
    )

    def judge(e: PauliString) -> ErrorVerdict:
        m = to_matrix(e)
        pep = p @ m @ p
        c = complex(np.trace(pep) / tr)
        return ErrorVerdict(str(e), hs_norm(pep - c * p) <= tol * scale, contains(span, m, tol), c)

    paulis = all_paulis(n)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            report = list(pool.map(judge, paulis))
    else:
        report = [judge(e) for e in paulis]
    return all(v.agree for v in report), report
