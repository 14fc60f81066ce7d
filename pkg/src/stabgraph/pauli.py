"""Symplectic n-qubit Pauli algebra.

A :class:`PauliString` stores ``i**phase_exp * X^x_1 Z^z_1 (x) ... (x) X^x_n Z^z_n``
with qubit 1 leftmost in every tensor product.

Single-qubit conventions (note the sign of Y)::

    sigma_0 = I,  sigma_1 = Z,  sigma_2 = X,  sigma_3 = Y = [[0, i], [-i, 0]]

This Y is the *negative* of the usual Pauli Y, so ``Y = -i XZ`` and the text
``"Y"`` parses to phase_exp 3 with both bits set. Strings printed or parsed by
this module always use this convention; convert before exchanging Pauli
labels with libraries that use ``Y = [[0, -i], [i, 0]]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from stabgraph.exceptions import DimensionError, GroupError, PauliParseError
from stabgraph.linalg import kron_all

MAX_QUBITS = 12

I2 = np.eye(2, dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SIGMA = (I2, Z, X, Y)
LETTERS = "IZXY"

# sigma index -> (x bit, z bit, phase exponent of sigma relative to X^x Z^z)
_INDEX_BITS = {0: (0, 0, 0), 1: (0, 1, 0), 2: (1, 0, 0), 3: (1, 1, 3)}
_PREFIXES = {"": 0, "+": 0, "-": 2, "i": 1, "+i": 1, "-i": 3}
_COEFF_TEXT = {0: "", 1: "i", 2: "-", 3: "-i"}


@dataclass(frozen=True)
class PauliString:
    n: int
    phase_exp: int
    x: tuple
    z: tuple

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError("a Pauli string needs at least one qubit")
        if len(self.x) != self.n or len(self.z) != self.n:
            raise DimensionError(f"bit vectors must have length {self.n}")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)
        object.__setattr__(self, "x", tuple(int(b) & 1 for b in self.x))
        object.__setattr__(self, "z", tuple(int(b) & 1 for b in self.z))

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, (0,) * n, (0,) * n)

    @classmethod
    def from_indices(cls, indices: Sequence[int], coeff_exp: int = 0) -> "PauliString":
        """``i**coeff_exp * sigma_{j_1} (x) ... (x) sigma_{j_n}``."""
        xs, zs, phase = [], [], coeff_exp
        for j in indices:
            if j not in _INDEX_BITS:
                raise PauliParseError(f"sigma index {j} not in 0..3")
            xb, zb, ph = _INDEX_BITS[j]
            xs.append(xb)
            zs.append(zb)
            phase += ph
        return cls(len(indices), phase, tuple(xs), tuple(zs))

    @property
    def indices(self) -> tuple:
        """sigma indices (0=I, 1=Z, 2=X, 3=Y) per qubit."""
        return tuple(2 * xb + zb for xb, zb in zip(self.x, self.z))

    @property
    def n_y(self) -> int:
        return sum(xb & zb for xb, zb in zip(self.x, self.z))

    @property
    def coeff_exp(self) -> int:
        """Exponent k such that this string is ``i**k`` times its letter form."""
        return (self.phase_exp + self.n_y) % 4

    @property
    def letters(self) -> str:
        return "".join(LETTERS[j] for j in self.indices)

    @property
    def is_identity_up_to_phase(self) -> bool:
        return not any(self.x) and not any(self.z)

    def phase_free(self) -> "PauliString":
        """Letter form with coefficient +1 (a Hermitian tensor product of sigmas)."""
        return PauliString(self.n, 3 * self.n_y, self.x, self.z)

    def symplectic(self) -> np.ndarray:
        return np.array(self.x + self.z, dtype=np.uint8)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_mul(self, other)

    def __str__(self) -> str:
        return _COEFF_TEXT[self.coeff_exp] + self.letters

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"


def parse_pauli(text: str, n: int | None = None) -> PauliString:
    """Parse ``[+|-|i|-i]`` followed by letters from ``IXYZ``."""
    s = text.strip()
    cut = len(s) - len(s.lstrip("+-i"))
    prefix, body = s[:cut], s[cut:]
    if prefix not in _PREFIXES:
        raise PauliParseError(f"bad phase prefix {prefix!r} in {text!r}")
    if not body:
        raise PauliParseError(f"no Pauli letters in {text!r}")
    bad = set(body) - set(LETTERS)
    if bad:
        raise PauliParseError(f"bad character(s) {''.join(sorted(bad))!r} in {text!r}")
    if n is not None and len(body) != n:
        raise PauliParseError(f"{text!r} has {len(body)} letters, expected {n}")
    return PauliString.from_indices([LETTERS.index(c) for c in body], _PREFIXES[prefix])


def parse_pauli_list(text: str, n: int | None = None) -> list[PauliString]:
    """Comma-separated Pauli strings; an empty string gives an empty list."""
    items = [t for t in (part.strip() for part in text.split(",")) if t]
    return [parse_pauli(t, n) for t in items]


def _check_n(p: PauliString, q: PauliString) -> None:
    if p.n != q.n:
        raise DimensionError(f"qubit-count mismatch: {p.n} vs {q.n}")


def pauli_mul(p: PauliString, q: PauliString) -> PauliString:
    """Exact product; moving ``Z^z`` past ``X^x'`` on a qubit costs ``(-1)^(z x')``."""
    _check_n(p, q)
    swaps = sum(zb & xb for zb, xb in zip(p.z, q.x))
    return PauliString(
        p.n,
        p.phase_exp + q.phase_exp + 2 * swaps,
        tuple(a ^ b for a, b in zip(p.x, q.x)),
        tuple(a ^ b for a, b in zip(p.z, q.z)),
    )


def commutes(p: PauliString, q: PauliString) -> bool:
    _check_n(p, q)
    form = sum(a & d for a, d in zip(p.x, q.z)) + sum(b & c for b, c in zip(p.z, q.x))
    return form % 2 == 0


def to_matrix(p: PauliString, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    if p.n > max_qubits:
        raise DimensionError(f"{p.n} qubits exceeds the dense-matrix cap of {max_qubits}")
    factors = [np.linalg.matrix_power(X, xb) @ np.linalg.matrix_power(Z, zb) for xb, zb in zip(p.x, p.z)]
    return (1j**p.phase_exp) * kron_all(factors)


def all_paulis(n: int) -> list[PauliString]:
    """All 4^n letter-form strings, ordered by sigma index with qubit 1 most significant."""
    return [PauliString.from_indices(idx) for idx in itertools.product(range(4), repeat=n)]


def gf2_rank(rows: Iterable[np.ndarray]) -> int:
    m = np.array(list(rows), dtype=np.uint8)
    if m.size == 0:
        return 0
    m = m.copy()
    rank = 0
    for col in range(m.shape[1]):
        pivot = next((r for r in range(rank, m.shape[0]) if m[r, col]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(m.shape[0]):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
    return rank


# ---------------------------------------------------------------- groups


@dataclass(frozen=True)
class PauliGroup:
    n: int
    generators: tuple
    elements: tuple
    is_abelian: bool
    minus_identity_free: bool

    @property
    def is_stabilizer(self) -> bool:
        return self.is_abelian and self.minus_identity_free

    @property
    def num_independent(self) -> int:
        """GF(2) rank of the generators' symplectic vectors."""
        return gf2_rank(g.symplectic() for g in self.generators)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, p: PauliString) -> bool:
        return p in self._element_set

    @property
    def _element_set(self) -> frozenset:
        return frozenset(self.elements)

    def matrices(self) -> list[np.ndarray]:
        return [to_matrix(g) for g in self.elements]


def generate_group(gens: Sequence[PauliString], n: int | None = None, cap: int | None = None) -> PauliGroup:
    """Close ``gens`` under multiplication (breadth first, elements in discovery order)."""
    gens = tuple(gens)
    if n is None:
        if not gens:
            raise GroupError("cannot infer the qubit count of an empty generator list")
        n = gens[0].n
    for g in gens:
        if g.n != n:
            raise DimensionError(f"generator {g} has {g.n} qubits, expected {n}")
    if cap is None:
        cap = 4 * 4**n
    identity = PauliString.identity(n)
    seen = {identity}
    order = [identity]
    frontier = [identity]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = pauli_mul(a, g)
                if b not in seen:
                    seen.add(b)
                    order.append(b)
                    nxt.append(b)
                    if len(order) > cap:
                        raise GroupError(f"group closure exceeds cap of {cap} elements")
        frontier = nxt
    abelian = all(commutes(a, b) for a, b in itertools.combinations(gens, 2))
    minus_identity = PauliString(n, 2, (0,) * n, (0,) * n)
    return PauliGroup(
        n=n,
        generators=gens,
        elements=tuple(order),
        is_abelian=abelian,
        minus_identity_free=minus_identity not in seen,
    )


def require_stabilizer(group: PauliGroup) -> None:
    if not group.is_abelian:
        raise GroupError("generators do not commute; not a stabilizer group")
    if not group.minus_identity_free:
        raise GroupError("-I is in the group; not a stabilizer group")


def normalizer(group: PauliGroup) -> list[PauliString]:
    """Letter-form Paulis commuting with every generator.

    For stabilizer groups this is the full normalizer up to phases, since
    there the normalizer and centralizer coincide.
    """
    require_stabilizer(group)
    return [p for p in all_paulis(group.n) if all(commutes(p, g) for g in group.generators)]


def codespace_projector(group: PauliGroup) -> np.ndarray:
    require_stabilizer(group)
    d = 2**group.n
    acc = np.zeros((d, d), dtype=complex)
    for g in group.elements:
        acc += to_matrix(g)
    return acc / len(group.elements)


# ---------------------------------------------------------------- Clifford gates
#
# A gate is a tuple ("H", q), ("S", q), ("CX", control, target) or ("X", q),
# with 0-based qubit indices.

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j])
_GATE_1Q = {"H": _H, "S": _S, "X": X}


def conjugate(p: PauliString, gate: tuple) -> PauliString:
    """``G p G^dagger`` for one elementary Clifford gate, phases tracked exactly."""
    x, z, phase = list(p.x), list(p.z), p.phase_exp
    kind = gate[0]
    if kind == "H":
        q = gate[1]
        # X^x Z^z -> Z^x X^z = (-1)^(xz) X^z Z^x
        phase += 2 * (x[q] & z[q])
        x[q], z[q] = z[q], x[q]
    elif kind == "S":
        q = gate[1]
        # S X S^dagger = i X Z, S Z S^dagger = Z
        phase += x[q]
        z[q] ^= x[q]
    elif kind == "X":
        q = gate[1]
        phase += 2 * z[q]
    elif kind == "CX":
        c, t = gate[1], gate[2]
        x[t] ^= x[c]
        z[c] ^= z[t]
    else:
        raise ValueError(f"unknown gate {gate!r}")
    return PauliString(p.n, phase, tuple(x), tuple(z))


def conjugate_all(p: PauliString, gates: Iterable[tuple]) -> PauliString:
    for g in gates:
        p = conjugate(p, g)
    return p


def gate_matrix(gate: tuple, n: int) -> np.ndarray:
    kind = gate[0]
    if kind in _GATE_1Q:
        return kron_all(_GATE_1Q[kind] if k == gate[1] else I2 for k in range(n))
    if kind == "CX":
        c, t = gate[1], gate[2]
        p0 = np.diag([1, 0]).astype(complex)
        p1 = np.diag([0, 1]).astype(complex)
        keep = kron_all(p0 if k == c else I2 for k in range(n))
        flip = kron_all(p1 if k == c else X if k == t else I2 for k in range(n))
        return keep + flip
    raise ValueError(f"unknown gate {gate!r}")


def circuit_matrix(gates: Sequence[tuple], n: int) -> np.ndarray:
    """Unitary of ``gates`` applied left to right (first gate acts first)."""
    if n > MAX_QUBITS:
        raise DimensionError(f"{n} qubits exceeds the dense-matrix cap of {MAX_QUBITS}")
    u = np.eye(2**n, dtype=complex)
    for g in gates:
        u = gate_matrix(g, n) @ u
    return u


def inverse_circuit(gates: Sequence[tuple]) -> list[tuple]:
    out = []
    for g in reversed(gates):
        if g[0] == "S":
            out.extend([g, g, g])
        else:
            out.append(g)
    return out


def random_clifford_circuit(n: int, rng: np.random.Generator, depth: int | None = None) -> list[tuple]:
    """Random H/S/CX word; not uniform over the Clifford group but mixes well at depth ~ 10 n^2."""
    if depth is None:
        depth = 10 * n * n + 10
    gates = []
    for _ in range(depth):
        r = rng.random()
        if n > 1 and r < 0.4:
            c, t = rng.choice(n, size=2, replace=False)
            gates.append(("CX", int(c), int(t)))
        elif r < 0.7:
            gates.append(("H", int(rng.integers(n))))
        else:
            gates.append(("S", int(rng.integers(n))))
    return gates


def z_generators(n: int, s: int) -> list[PauliString]:
    """Z_1, ..., Z_s on n qubits."""
    return [PauliString(n, 0, (0,) * n, tuple(int(k == r) for k in range(n))) for r in range(s)]


def random_stabilizer_group(n: int, s: int, rng: np.random.Generator) -> PauliGroup:
    gates = random_clifford_circuit(n, rng)
    gens = []
    for g in z_generators(n, s):
        img = conjugate_all(g, gates)
        if rng.random() < 0.5:
            img = PauliString(n, img.phase_exp + 2, img.x, img.z)
        gens.append(img)
    return generate_group(gens, n)


def _target_circuit(p: PauliString, i: int) -> list[tuple]:
    """Gates on qubits >= i mapping the tail of ``p`` to Z_i, then clearing Z on qubits < i.

    ``p`` must have no X part on qubits < i and a non-identity tail.
    """
    gates: list[tuple] = []
    n = p.n
    cur = p
    for k in range(i, n):
        if cur.x[k] and cur.z[k]:
            gates += [("S", k), ("H", k)]
        elif cur.x[k]:
            gates.append(("H", k))
    cur = conjugate_all(p, gates)
    support = [k for k in range(i, n) if cur.z[k]]
    pivot = support[0]
    for k in support[1:]:
        gates.append(("CX", k, pivot))
    if pivot != i:
        gates += [("CX", pivot, i), ("CX", i, pivot), ("CX", pivot, i)]
    cur = conjugate_all(p, gates)
    for k in range(i):
        if cur.z[k]:
            gates.append(("CX", k, i))
    return gates


def clifford_canonicalize(group: PauliGroup) -> tuple[np.ndarray, list[PauliString]]:
    """Clifford U with ``U Z_i U^dagger = g_i`` for the group's generators g_1..g_s.

    Returns ``(U, images)`` where ``images[i]`` is the generator that Z_{i+1}
    is mapped to. Generators must be independent.
    """
    u, images, _ = canonicalizing_circuit(group)
    return u, images


def canonicalizing_circuit(group: PauliGroup) -> tuple[np.ndarray, list[PauliString], list[tuple]]:
    """Like :func:`clifford_canonicalize`, also returning the gate list realizing U."""
    require_stabilizer(group)
    gens = list(group.generators)
    n = group.n
    if group.num_independent != len(gens):
        raise GroupError("generators are dependent over GF(2)")
    if n > MAX_QUBITS:
        raise DimensionError(f"{n} qubits exceeds the dense-matrix cap of {MAX_QUBITS}")
    # forward circuit V with V g_i V^dagger = Z_i
    forward: list[tuple] = []
    for i, g in enumerate(gens):
        cur = conjugate_all(g, forward)
        if any(cur.x[:i]) or not (any(cur.x[i:]) or any(cur.z[i:])):
            raise GroupError("generators are dependent or do not commute")
        forward += _target_circuit(cur, i)
    for i, g in enumerate(gens):
        img = conjugate_all(g, forward)
        if img.phase_exp == 2:
            forward.append(("X", i))
        elif img.phase_exp != 0:
            raise GroupError(f"generator {g} is not Hermitian")
    backward = inverse_circuit(forward)
    return circuit_matrix(backward, n), gens, backward
