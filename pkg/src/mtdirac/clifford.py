"""Dirac gamma-matrix algebra on multi-particle spinor spaces.

Operators for N particles act on the N-fold tensor product of 4-component
spinor factors.  Every 4x4 matrix expands uniquely over the 16-element
basis alpha^mu, gamma5*alpha^mu, gamma^mu, gamma5*gamma^mu (mu = 0..3),
and products of such factors form an orthogonal basis of the full
16^N-dimensional operator space under the Hilbert-Schmidt pairing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import reduce

import numpy as np

MINKOWSKI_METRIC = np.diag([1.0, -1.0, -1.0, -1.0])

#: Frobenius-norm tolerance for exact algebraic identities.
ALGEBRA_TOL = 1e-12

_SIGMA = np.array(
    [
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, -1.0j], [1.0j, 0.0]],
        [[1.0, 0.0], [0.0, -1.0]],
    ],
    dtype=complex,
)

# Totally antisymmetric symbol on spatial indices 1..3, stored 0-based,
# normalized so that eps(1,2,3) = +1.
EPSILON3 = np.zeros((3, 3, 3))
for _perm, _sign in [
    ((0, 1, 2), 1.0), ((1, 2, 0), 1.0), ((2, 0, 1), 1.0),
    ((2, 1, 0), -1.0), ((0, 2, 1), -1.0), ((1, 0, 2), -1.0),
]:
    EPSILON3[_perm] = _sign


def frobenius(matrix: np.ndarray) -> float:
    """Frobenius norm, the default size measure for residual matrices."""
    return float(np.linalg.norm(matrix))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


@dataclass(frozen=True)
class GammaRep:
    """A concrete 4x4 realization of the Dirac algebra.

    ``gammas`` stacks gamma^0..gamma^3 along the first axis; ``alphas``
    stacks alpha^mu = gamma^0 gamma^mu (so alpha^0 is the identity) and
    ``gamma5`` is i gamma^0 gamma^1 gamma^2 gamma^3.
    """

    name: str
    gammas: np.ndarray
    gamma5: np.ndarray
    alphas: np.ndarray

    def gamma(self, mu: int) -> np.ndarray:
        return self.gammas[mu]

    def alpha(self, mu: int) -> np.ndarray:
        return self.alphas[mu]


def _finalize_rep(name: str, gammas) -> GammaRep:
    gammas = np.asarray(gammas, dtype=complex)
    gamma5 = 1j * gammas[0] @ gammas[1] @ gammas[2] @ gammas[3]
    alphas = np.stack([gammas[0] @ gammas[mu] for mu in range(4)])
    return GammaRep(name=name, gammas=gammas, gamma5=gamma5, alphas=alphas)


def build_dirac_rep() -> GammaRep:
    """Standard (Dirac-Pauli) representation: gamma^0 diagonal."""
    eye2 = np.eye(2, dtype=complex)
    zero2 = np.zeros((2, 2), dtype=complex)
    gamma0 = np.block([[eye2, zero2], [zero2, -eye2]])
    spatial = [
        np.block([[zero2, _SIGMA[a]], [-_SIGMA[a], zero2]]) for a in range(3)
    ]
    return _finalize_rep("dirac", [gamma0] + spatial)


def build_weyl_rep() -> GammaRep:
    """Chiral (Weyl) representation: gamma5 diagonal."""
    eye2 = np.eye(2, dtype=complex)
    zero2 = np.zeros((2, 2), dtype=complex)
    gamma0 = np.block([[zero2, eye2], [eye2, zero2]])
    spatial = [
        np.block([[zero2, _SIGMA[a]], [-_SIGMA[a], zero2]]) for a in range(3)
    ]
    return _finalize_rep("weyl", [gamma0] + spatial)


def conjugate_rep(rep: GammaRep, u: np.ndarray, name: str = "") -> GammaRep:
    """Similarity-transform a representation by a unitary u (gamma -> u gamma u^dag)."""
    uh = u.conj().T
    gammas = np.stack([u @ rep.gammas[mu] @ uh for mu in range(4)])
    return _finalize_rep(name or (rep.name + "-conjugated"), gammas)


def verify_clifford(rep: GammaRep) -> dict[str, float]:
    """Residuals of the defining identities of a representation.

    Returns a map from identity name to Frobenius residual; all entries
    are expected below ALGEBRA_TOL for a valid representation.
    """
    eye = np.eye(4)
    anticomm = 0.0
    for mu in range(4):
        for nu in range(4):
            lhs = anticommutator(rep.gammas[mu], rep.gammas[nu])
            anticomm = max(
                anticomm, frobenius(lhs - 2.0 * MINKOWSKI_METRIC[mu, nu] * eye)
            )
    hermitian0 = frobenius(rep.gammas[0] - rep.gammas[0].conj().T)
    antiherm = max(
        frobenius(rep.gammas[a] + rep.gammas[a].conj().T) for a in (1, 2, 3)
    )
    g5 = rep.gamma5
    g5_def = frobenius(
        g5 - 1j * rep.gammas[0] @ rep.gammas[1] @ rep.gammas[2] @ rep.gammas[3]
    )
    g5_sq = frobenius(g5 @ g5 - eye)
    g5_anti = max(frobenius(anticommutator(g5, rep.gammas[mu])) for mu in range(4))
    alpha0 = frobenius(rep.alphas[0] - eye)
    return {
        "anticommutation": anticomm,
        "gamma0_hermitian": hermitian0,
        "spatial_antihermitian": antiherm,
        "gamma5_definition": g5_def,
        "gamma5_squares_to_one": g5_sq,
        "gamma5_anticommutes": g5_anti,
        "alpha0_is_identity": alpha0,
    }


# ---------------------------------------------------------------------------
# 16-element operator basis and tensor embeddings
# ---------------------------------------------------------------------------

class BasisClass(Enum):
    ALPHA = "alpha"
    G5ALPHA = "g5alpha"
    GAMMA = "gamma"
    G5GAMMA = "g5gamma"


@dataclass(frozen=True)
class BasisElement:
    """One of the 16 single-particle basis matrices, tagged (class, mu)."""

    cls: BasisClass
    mu: int

    def label(self) -> str:
        return f"{self.cls.value}{self.mu}"


IDENTITY_ELEMENT = BasisElement(BasisClass.ALPHA, 0)
GAMMA5_ELEMENT = BasisElement(BasisClass.G5ALPHA, 0)


def single_matrix(element: BasisElement, rep: GammaRep) -> np.ndarray:
    """Realize a basis element as a 4x4 matrix in the given representation."""
    mu = element.mu
    if element.cls is BasisClass.ALPHA:
        return rep.alphas[mu]
    if element.cls is BasisClass.G5ALPHA:
        return rep.gamma5 @ rep.alphas[mu]
    if element.cls is BasisClass.GAMMA:
        return rep.gammas[mu]
    return rep.gamma5 @ rep.gammas[mu]


def basis16(rep: GammaRep) -> list[tuple[BasisElement, np.ndarray]]:
    """The 16 basis elements with their matrices, in canonical order."""
    out = []
    for cls in BasisClass:
        for mu in range(4):
            element = BasisElement(cls, mu)
            out.append((element, single_matrix(element, rep)))
    return out


@dataclass(frozen=True)
class TensorBasisElement:
    """A product-basis element: one BasisElement per spinor factor."""

    factors: tuple[BasisElement, ...]

    @property
    def n_particles(self) -> int:
        return len(self.factors)

    def label(self) -> str:
        return "*".join(f.label() for f in self.factors)


def tensor_element(*factors: BasisElement) -> TensorBasisElement:
    return TensorBasisElement(tuple(factors))


def realize(element: TensorBasisElement, rep: GammaRep) -> np.ndarray:
    """Kronecker-product realization of a tensor-basis element."""
    mats = [single_matrix(f, rep) for f in element.factors]
    return reduce(np.kron, mats)


def embed(matrix: np.ndarray, k: int, n_particles: int) -> np.ndarray:
    """Let a one-particle matrix act on spinor factor k (1-based) of N factors."""
    if not 1 <= k <= n_particles:
        raise ValueError(f"particle index {k} outside 1..{n_particles}")
    left = np.eye(4 ** (k - 1), dtype=complex)
    right = np.eye(4 ** (n_particles - k), dtype=complex)
    return np.kron(np.kron(left, matrix), right)


# Stacked product bases are memoized per representation object so that
# repeated decompose/reconstruct calls avoid rebuilding 16^N Kronecker
# products.  Keys use id(rep) — GammaRep is frozen and the cached entry
# keeps the rep alive, so ids stay valid.  Only N <= 2 is stacked; the
# N >= 3 arrays would be too large to keep around.
_STACK_CACHE: dict = {}


def _stacked_basis(rep: GammaRep, n_particles: int):
    key = (id(rep), n_particles)
    hit = _STACK_CACHE.get(key)
    if hit is not None:
        return hit[1], hit[2], hit[3]
    single = basis16(rep)
    elements = []
    mats = []
    for combo in itertools.product(single, repeat=n_particles):
        elements.append(TensorBasisElement(tuple(be for be, _ in combo)))
        mats.append(reduce(np.kron, [m for _, m in combo]))
    elements = tuple(elements)
    stacked = np.stack(mats)
    index = {element: i for i, element in enumerate(elements)}
    if len(_STACK_CACHE) >= 8:
        _STACK_CACHE.clear()
    _STACK_CACHE[key] = (rep, elements, stacked, index)
    return elements, stacked, index


def decompose(
    matrix: np.ndarray, n_particles: int, rep: GammaRep
) -> dict[TensorBasisElement, complex]:
    """Hilbert-Schmidt coefficients of a matrix over the product basis.

    Every basis matrix B satisfies tr(B^dag B) = 4^N, so the coefficient
    of B is tr(B^dag M) / 4^N.  The returned map contains all 16^N keys.
    """
    dim = 4**n_particles
    matrix = np.asarray(matrix)
    if matrix.shape != (dim, dim):
        raise ValueError(f"expected {(dim, dim)} matrix, got {matrix.shape}")
    if n_particles > 2:
        single = basis16(rep)
        coeffs: dict[TensorBasisElement, complex] = {}
        for combo in itertools.product(single, repeat=n_particles):
            element = TensorBasisElement(tuple(be for be, _ in combo))
            mat = reduce(np.kron, [m for _, m in combo])
            coeffs[element] = complex(np.trace(mat.conj().T @ matrix) / dim)
        return coeffs
    elements, stacked, _ = _stacked_basis(rep, n_particles)
    values = np.einsum("kji,ji->k", stacked.conj(), matrix) / dim
    return {element: complex(value)
            for element, value in zip(elements, values)}


def reconstruct(
    coeffs: dict[TensorBasisElement, complex], n_particles: int, rep: GammaRep
) -> np.ndarray:
    dim = 4**n_particles
    if n_particles > 2:
        out = np.zeros((dim, dim), dtype=complex)
        for element, value in coeffs.items():
            if value != 0:
                out += value * realize(element, rep)
        return out
    _, stacked, index = _stacked_basis(rep, n_particles)
    values = np.zeros(len(stacked), dtype=complex)
    out = np.zeros((dim, dim), dtype=complex)
    for element, value in coeffs.items():
        position = index.get(element)
        if position is not None:
            values[position] = value
        elif value != 0:  # hand-built key outside the cached ordering
            out += value * realize(element, rep)
    out += np.tensordot(values, stacked, axes=1)
    return out


def basis_gram(rep: GammaRep) -> np.ndarray:
    """Gram matrix tr(B_i^dag B_j) of the 16-element single-particle basis."""
    mats = [m for _, m in basis16(rep)]
    gram = np.empty((16, 16), dtype=complex)
    for i, a in enumerate(mats):
        for j, b in enumerate(mats):
            gram[i, j] = np.trace(a.conj().T @ b)
    return gram


# ---------------------------------------------------------------------------
# Commutators of alpha^a with the basis
# ---------------------------------------------------------------------------

def commutator_table(rep: GammaRep) -> list[tuple[str, np.ndarray, float]]:
    """All commutators [alpha^a, B] against their closed forms.

    Returns one (description, commutator matrix, residual) triple per
    concrete (a, B) instance, covering the eight identity families:

        [alpha^a, alpha^0]        = 0
        [alpha^a, alpha^b]        = 2i eps_abc gamma5 alpha^c
        [alpha^a, gamma5 alpha^0] = 0
        [alpha^a, gamma5 alpha^b] = 2i eps_abc alpha^c
        [alpha^a, gamma^0]        = -2 gamma^a
        [alpha^a, gamma^b]        = -2 delta_ab gamma^0
        [alpha^a, gamma5 gamma^0] = -2 gamma5 gamma^a
        [alpha^a, gamma5 gamma^b] = -2 delta_ab gamma5 gamma^0
    """
    g5 = rep.gamma5
    rows: list[tuple[str, np.ndarray, float]] = []

    def expected(b: BasisElement, a: int) -> np.ndarray:
        zero = np.zeros((4, 4), dtype=complex)
        if b.cls is BasisClass.ALPHA:
            if b.mu == 0:
                return zero
            out = zero.copy()
            for c in (1, 2, 3):
                eps = EPSILON3[a - 1, b.mu - 1, c - 1]
                if eps:
                    out += 2j * eps * (g5 @ rep.alphas[c])
            return out
        if b.cls is BasisClass.G5ALPHA:
            if b.mu == 0:
                return zero
            out = zero.copy()
            for c in (1, 2, 3):
                eps = EPSILON3[a - 1, b.mu - 1, c - 1]
                if eps:
                    out += 2j * eps * rep.alphas[c]
            return out
        if b.cls is BasisClass.GAMMA:
            if b.mu == 0:
                return -2.0 * rep.gammas[a]
            return -2.0 * rep.gammas[0] if b.mu == a else zero
        if b.mu == 0:
            return -2.0 * (g5 @ rep.gammas[a])
        return -2.0 * (g5 @ rep.gammas[0]) if b.mu == a else zero

    for a in (1, 2, 3):
        for element, mat in basis16(rep):
            actual = commutator(rep.alphas[a], mat)
            residual = frobenius(actual - expected(element, a))
            rows.append((f"[alpha{a}, {element.label()}]", actual, residual))
    return rows
