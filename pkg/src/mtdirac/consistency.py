"""Compatibility analysis for multi-time evolution systems.

A pair of evolution equations i d/dt_j psi = H_j psi admits joint
solutions for arbitrary initial data only when the operator-valued
curvature

    F_jk = dH_j/dt_k - dH_k/dt_j - i [H_j, H_k]

vanishes identically.  For first-order Hamiltonians the curvature
splits into first-order pieces, proportional to the commutators
[alpha^a_j, V_k] (j != k), and a zeroth-order matrix residual.  This
module computes both, extracts the sixteen-field coefficient form of a
two-particle potential pair when it exists, and evaluates the scalar
compatibility conditions (cc1..cc16) that characterize consistency in
that form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .clifford import (
    GAMMA5_ELEMENT,
    IDENTITY_ELEMENT,
    BasisClass,
    BasisElement,
    GammaRep,
    TensorBasisElement,
    embed,
    tensor_element,
)
from .dsl import Add, Const, Expr, differentiate, evaluate, is_zero
from .potential import (
    COEFFICIENT_FIELDS_1,
    COEFFICIENT_FIELDS_2,
    MultiTimeSystem,
    Potential,
    PotentialTerm,
    Region,
    SpecError,
    differentiate_potential,
    evaluate_potential,
    sample_configs,
)

VERDICT_CONSISTENT = "CONSISTENT"
VERDICT_INCONSISTENT = "INCONSISTENT"


class CoefficientFormError(Exception):
    """The potential pair does not satisfy the coefficient-form shape."""


# ---------------------------------------------------------------------------
# Matrix-level residuals
# ---------------------------------------------------------------------------

def _batched_potential(potential: Potential, samples: np.ndarray,
                       rep: GammaRep) -> np.ndarray:
    """Evaluate a potential at a stack of configurations -> (S, D, D)."""
    coords = [[samples[:, k, mu] for mu in range(4)]
              for k in range(potential.n_particles)]
    out = evaluate_potential(potential, coords, rep)
    if out.ndim == 2:
        out = np.broadcast_to(out, (samples.shape[0], *out.shape))
    return out


def _commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def zeroth_order_residual(system: MultiTimeSystem, coords: np.ndarray,
                          rep: GammaRep, j: int = 1, k: int = 2) -> np.ndarray:
    """Zeroth-order compatibility residual of the (j, k) equation pair.

    E(j,k) = [V_k, V_j] + m_k [gamma0_k, V_j] - m_j [gamma0_j, V_k]
             - i alpha^mu_k (d_{k,mu} V_j) + i alpha^nu_j (d_{j,nu} V_k)

    coords may be a single (N, 4) configuration or a stack (S, N, 4);
    the result is (D, D) or (S, D, D) accordingly.
    """
    coords = np.asarray(coords, float)
    single = coords.ndim == 2
    samples = coords[None] if single else coords
    n = system.n_particles
    pot_j, pot_k = system.potential(j), system.potential(k)
    v_j = _batched_potential(pot_j, samples, rep)
    v_k = _batched_potential(pot_k, samples, rep)
    g0_j = embed(rep.gamma(0), j, n)
    g0_k = embed(rep.gamma(0), k, n)

    residual = (_commutator(v_k, v_j)
                + system.mass(k) * _commutator(g0_k, v_j)
                - system.mass(j) * _commutator(g0_j, v_k))
    for mu in range(4):
        dv_j = _batched_potential(differentiate_potential(pot_j, k, mu),
                                  samples, rep)
        dv_k = _batched_potential(differentiate_potential(pot_k, j, mu),
                                  samples, rep)
        residual = (residual
                    - 1j * embed(rep.alpha(mu), k, n) @ dv_j
                    + 1j * embed(rep.alpha(mu), j, n) @ dv_k)
    return residual[0] if single else residual


def derivative_coefficient_matrices(
        system: MultiTimeSystem, coords: np.ndarray,
        rep: GammaRep) -> dict[tuple[int, int], np.ndarray]:
    """First-order obstruction matrices [alpha^a_j, V_other(j)].

    Keyed by (j, a) for particles j and spatial directions a in 1..3;
    every one of them must vanish identically for consistency.
    """
    coords = np.asarray(coords, float)
    single = coords.ndim == 2
    samples = coords[None] if single else coords
    n = system.n_particles
    out: dict[tuple[int, int], np.ndarray] = {}
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            if j == k:
                continue
            v_k = _batched_potential(system.potential(k), samples, rep)
            for a in (1, 2, 3):
                alpha = embed(rep.alpha(a), j, n)
                value = _commutator(alpha, v_k)
                out[(j, a)] = value[0] if single else value
    return out


def _sup_frobenius(batch: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(batch, axis=(-2, -1))))


# ---------------------------------------------------------------------------
# Coefficient form
# ---------------------------------------------------------------------------

_FIELDS_BY_SECTOR_1 = {
    (BasisClass.ALPHA, 0): "W1", (BasisClass.G5ALPHA, 0): "Y1",
    (BasisClass.GAMMA, 0): "A", (BasisClass.G5GAMMA, 0): "B",
    (BasisClass.ALPHA, 1): "X1", (BasisClass.G5ALPHA, 1): "Z1",
    (BasisClass.GAMMA, 1): "C", (BasisClass.G5GAMMA, 1): "D",
}
_FIELDS_BY_SECTOR_2 = {
    (BasisClass.ALPHA, 0): "W2", (BasisClass.G5ALPHA, 0): "X2",
    (BasisClass.GAMMA, 0): "E", (BasisClass.G5GAMMA, 0): "F",
    (BasisClass.ALPHA, 1): "Y2", (BasisClass.G5ALPHA, 1): "Z2",
    (BasisClass.GAMMA, 1): "G", (BasisClass.G5GAMMA, 1): "H",
}

FIELD_NAMES = COEFFICIENT_FIELDS_1 + COEFFICIENT_FIELDS_2


@dataclass(frozen=True)
class CoefficientSet:
    """The sixteen 4-component coefficient fields of a two-particle pair.

    Particle-1 potential fields (indexed by mu): W1, X1, Y1, Z1 multiply
    alpha-type structures; A, B, C, D multiply gamma-type structures.
    Particle-2 potential fields (indexed by nu): W2, X2, Y2, Z2 and
    E, F, G, H correspondingly.  Mass shifts are NOT folded in here;
    the compatibility conditions apply them where required.
    """

    W1: tuple[Expr, ...]
    X1: tuple[Expr, ...]
    Y1: tuple[Expr, ...]
    Z1: tuple[Expr, ...]
    A: tuple[Expr, ...]
    B: tuple[Expr, ...]
    C: tuple[Expr, ...]
    D: tuple[Expr, ...]
    W2: tuple[Expr, ...]
    X2: tuple[Expr, ...]
    Y2: tuple[Expr, ...]
    Z2: tuple[Expr, ...]
    E: tuple[Expr, ...]
    F: tuple[Expr, ...]
    G: tuple[Expr, ...]
    H: tuple[Expr, ...]

    def field(self, name: str) -> tuple[Expr, ...]:
        if name not in FIELD_NAMES:
            raise KeyError(name)
        return getattr(self, name)


def _accumulate(a: Expr, b: Expr) -> Expr:
    if is_zero(a):
        return b
    if is_zero(b):
        return a
    return Add(a, b)


def to_coefficient_form(system: MultiTimeSystem) -> CoefficientSet:
    """Extract the sixteen coefficient fields of a two-particle pair.

    Requires every V_1 term to act on particle 2 only through 1 or
    gamma5, and every V_2 term to act on particle 1 only through 1 or
    gamma5; raises CoefficientFormError otherwise.
    """
    if system.n_particles != 2:
        raise CoefficientFormError("coefficient form requires two particles")
    fields: dict[str, list[Expr]] = {
        name: [Const(0j)] * 4 for name in FIELD_NAMES}

    for term in system.potential(1).terms:
        own, other = term.structure.factors
        if other == IDENTITY_ELEMENT:
            sector = 0
        elif other == GAMMA5_ELEMENT:
            sector = 1
        else:
            raise CoefficientFormError(
                f"V_1 term acts on particle 2 through {other.label()}")
        name = _FIELDS_BY_SECTOR_1[(own.cls, sector)]
        fields[name][own.mu] = _accumulate(fields[name][own.mu],
                                           term.coefficient)

    for term in system.potential(2).terms:
        other, own = term.structure.factors
        if other == IDENTITY_ELEMENT:
            sector = 0
        elif other == GAMMA5_ELEMENT:
            sector = 1
        else:
            raise CoefficientFormError(
                f"V_2 term acts on particle 1 through {other.label()}")
        name = _FIELDS_BY_SECTOR_2[(own.cls, sector)]
        fields[name][own.mu] = _accumulate(fields[name][own.mu],
                                           term.coefficient)

    return CoefficientSet(**{name: tuple(values)
                             for name, values in fields.items()})


_STRUCTURE_1 = {
    "W1": (BasisClass.ALPHA, IDENTITY_ELEMENT),
    "Y1": (BasisClass.G5ALPHA, IDENTITY_ELEMENT),
    "A": (BasisClass.GAMMA, IDENTITY_ELEMENT),
    "B": (BasisClass.G5GAMMA, IDENTITY_ELEMENT),
    "X1": (BasisClass.ALPHA, GAMMA5_ELEMENT),
    "Z1": (BasisClass.G5ALPHA, GAMMA5_ELEMENT),
    "C": (BasisClass.GAMMA, GAMMA5_ELEMENT),
    "D": (BasisClass.G5GAMMA, GAMMA5_ELEMENT),
}
_STRUCTURE_2 = {
    "W2": (BasisClass.ALPHA, IDENTITY_ELEMENT),
    "X2": (BasisClass.G5ALPHA, IDENTITY_ELEMENT),
    "E": (BasisClass.GAMMA, IDENTITY_ELEMENT),
    "F": (BasisClass.G5GAMMA, IDENTITY_ELEMENT),
    "Y2": (BasisClass.ALPHA, GAMMA5_ELEMENT),
    "Z2": (BasisClass.G5ALPHA, GAMMA5_ELEMENT),
    "G": (BasisClass.GAMMA, GAMMA5_ELEMENT),
    "H": (BasisClass.G5GAMMA, GAMMA5_ELEMENT),
}


def coefficient_set_to_system(coefficients: CoefficientSet,
                              masses: tuple[float, float] = (1.0, 1.0),
                              name: str = "coefficient_form",
                              hermitian: bool = False) -> MultiTimeSystem:
    """Rebuild the potential pair encoded by a coefficient set."""
    terms_1 = []
    for field_name in COEFFICIENT_FIELDS_1:
        cls, sector = _STRUCTURE_1[field_name]
        for mu, expr in enumerate(coefficients.field(field_name)):
            if not is_zero(expr):
                terms_1.append(PotentialTerm(
                    tensor_element(BasisElement(cls, mu), sector), expr))
    terms_2 = []
    for field_name in COEFFICIENT_FIELDS_2:
        cls, sector = _STRUCTURE_2[field_name]
        for nu, expr in enumerate(coefficients.field(field_name)):
            if not is_zero(expr):
                terms_2.append(PotentialTerm(
                    tensor_element(sector, BasisElement(cls, nu)), expr))
    return MultiTimeSystem(
        name=name, n_particles=2, masses=masses,
        potentials=(Potential(1, 2, tuple(terms_1)),
                    Potential(2, 2, tuple(terms_2))),
        hermitian=hermitian)


# ---------------------------------------------------------------------------
# Scalar compatibility conditions
# ---------------------------------------------------------------------------

def cc_residuals(coefficients: CoefficientSet,
                 masses: tuple[float, float],
                 samples: np.ndarray) -> dict[str, float]:
    """Sup of each scalar compatibility condition over the samples.

    Sixteen families cc1..cc16, each a 4x4 grid over the component
    indices (mu for particle-1 fields, nu for particle-2 fields); the
    reported value is the sup of |residual| over components and sample
    configurations.  Mass shifts m1 delta_{0 mu} and m2 delta_{0 nu}
    enter through the shifted fields A and E.
    """
    samples = np.asarray(samples, float)
    coords = [[samples[:, k, mu] for mu in range(4)] for k in range(2)]
    m1, m2 = masses

    def ev(expr: Expr) -> np.ndarray:
        return np.asarray(evaluate(expr, coords))

    def ev_d(expr: Expr, k: int, mu: int) -> np.ndarray:
        return ev(differentiate(expr, k, mu))

    val = {name: [ev(expr) for expr in coefficients.field(name)]
           for name in FIELD_NAMES}
    # shifted time components: the mass term joins the gamma0 coefficient
    shifted_a = [val["A"][mu] + (m1 if mu == 0 else 0.0) for mu in range(4)]
    shifted_e = [val["E"][nu] + (m2 if nu == 0 else 0.0) for nu in range(4)]

    d1 = {name: [[ev_d(coefficients.field(name)[comp], 1, mu)
                  for comp in range(4)] for mu in range(4)]
          for name in ("W2", "X2", "Y2", "Z2", "E", "F", "G", "H")}
    d2 = {name: [[ev_d(coefficients.field(name)[comp], 2, nu)
                  for comp in range(4)] for nu in range(4)]
          for name in ("W1", "X1", "Y1", "Z1", "A", "B", "C", "D")}

    half_i = 0.5j

    def residual(mu: int, nu: int, family: str):
        v = val
        if family == "cc1":
            return d1["W2"][mu][nu] - d2["W1"][nu][mu]
        if family == "cc2":
            return d1["X2"][mu][nu] - d2["X1"][nu][mu]
        if family == "cc3":
            return d1["Y2"][mu][nu] - d2["Y1"][nu][mu]
        if family == "cc4":
            return d1["Z2"][mu][nu] - d2["Z1"][nu][mu]
        if family == "cc5":
            return (v["B"][mu] * v["Y2"][nu] + v["D"][mu] * v["Z2"][nu]
                    - half_i * d2["A"][nu][mu])
        if family == "cc6":
            return (shifted_a[mu] * v["Y2"][nu] + v["C"][mu] * v["Z2"][nu]
                    - half_i * d2["B"][nu][mu])
        if family == "cc7":
            return (-v["B"][mu] * v["Z2"][nu] - v["D"][mu] * v["Y2"][nu]
                    - half_i * d2["C"][nu][mu])
        if family == "cc8":
            return (-shifted_a[mu] * v["Z2"][nu] - v["C"][mu] * v["Y2"][nu]
                    - half_i * d2["D"][nu][mu])
        if family == "cc9":
            return (v["F"][nu] * v["X1"][mu] + v["H"][nu] * v["Z1"][mu]
                    - half_i * d1["E"][mu][nu])
        if family == "cc10":
            return (shifted_e[nu] * v["X1"][mu] + v["G"][nu] * v["Z1"][mu]
                    - half_i * d1["F"][mu][nu])
        if family == "cc11":
            return (-v["F"][nu] * v["Z1"][mu] - v["H"][nu] * v["X1"][mu]
                    - half_i * d1["G"][mu][nu])
        if family == "cc12":
            return (-shifted_e[nu] * v["Z1"][mu] - v["G"][nu] * v["X1"][mu]
                    - half_i * d1["H"][mu][nu])
        if family == "cc13":
            return v["B"][mu] * v["G"][nu] - v["C"][mu] * v["F"][nu]
        if family == "cc14":
            return v["B"][mu] * v["H"][nu] - v["C"][mu] * shifted_e[nu]
        if family == "cc15":
            return shifted_a[mu] * v["G"][nu] - v["D"][mu] * v["F"][nu]
        if family == "cc16":
            return shifted_a[mu] * v["H"][nu] - v["D"][mu] * shifted_e[nu]
        raise KeyError(family)

    out = {}
    for index in range(1, 17):
        family = f"cc{index}"
        worst = 0.0
        for mu in range(4):
            for nu in range(4):
                worst = max(worst,
                            float(np.max(np.abs(residual(mu, nu, family)))))
        out[family] = worst
    return out


# ---------------------------------------------------------------------------
# Consistency verdicts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConsistencyReport:
    """Sampled compatibility analysis of a two-particle system.

    deriv_coeff_sup holds six values ordered (j=1, a=1..3) then
    (j=2, a=1..3), each the sup over samples of ||[alpha^a_j, V_k]||_F
    for the opposite particle k.
    """

    pair: tuple[int, int]
    deriv_coeff_sup: tuple[float, ...]
    zeroth_sup: float
    cc: dict[str, float] | None
    verdict: str
    tol: float
    region: str
    nsamples: int

    def as_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "deriv_coeff_sup": list(self.deriv_coeff_sup),
            "zeroth_sup": self.zeroth_sup,
            "cc": dict(self.cc) if self.cc is not None else None,
            "verdict": self.verdict,
            "tol": self.tol,
            "region": self.region,
            "nsamples": self.nsamples,
        }


def check_consistency(system: MultiTimeSystem, rep: GammaRep, *,
                      nsamples: int = 100,
                      region: Region = Region.ALL,
                      tol: float = 1e-9,
                      rng: np.random.Generator | None = None,
                      samples: np.ndarray | None = None,
                      include_cc: bool = True) -> ConsistencyReport:
    """Sample-based compatibility verdict for a two-particle system.

    The verdict is CONSISTENT when every first-order obstruction and
    the zeroth-order residual stay below tol in Frobenius norm at all
    sampled configurations.  When the pair admits the coefficient form,
    the scalar condition sups are attached as a cross-check.
    """
    if system.n_particles != 2:
        raise SpecError("consistency checking requires exactly two particles")
    if samples is None:
        rng = rng or np.random.default_rng(0)
        samples = sample_configs(nsamples, rng, system.n_particles, region)
    else:
        samples = np.asarray(samples, float)

    matrices = derivative_coefficient_matrices(system, samples, rep)
    deriv_sup = tuple(
        _sup_frobenius(matrices[(j, a)])
        for j in (1, 2) for a in (1, 2, 3))
    zeroth_sup = _sup_frobenius(
        zeroth_order_residual(system, samples, rep))

    cc: dict[str, float] | None = None
    if include_cc:
        try:
            coefficients = to_coefficient_form(system)
        except CoefficientFormError:
            cc = None
        else:
            cc = cc_residuals(coefficients, system.masses, samples)

    worst = max([*deriv_sup, zeroth_sup])
    verdict = VERDICT_CONSISTENT if worst < tol else VERDICT_INCONSISTENT
    return ConsistencyReport(
        pair=(1, 2), deriv_coeff_sup=deriv_sup, zeroth_sup=zeroth_sup,
        cc=cc, verdict=verdict, tol=tol, region=region.value,
        nsamples=len(samples))


# ---------------------------------------------------------------------------
# Curvature operator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurvatureOperator:
    """First-order differential operator F_12 at one configuration.

    F_12 = zeroth + sum_{k,a} first[(k, a)] d/dx_{k,a}; consistency of
    the pair is exactly F_12 = 0 for all configurations.
    """

    zeroth: np.ndarray
    first: dict[tuple[int, int], np.ndarray]


def curvature_operator(system: MultiTimeSystem, coords: np.ndarray,
                       rep: GammaRep) -> CurvatureOperator:
    """Assemble F_12 directly from the commutator of the Hamiltonians.

    Independent of zeroth_order_residual: expands
    F_12 = dH_1/dt_2 - dH_2/dt_1 - i [H_1, H_2] term by term.  The
    zeroth-order part must equal i * E(1,2) and the first-order
    coefficients -[alpha^a_1, V_2] and +[alpha^a_2, V_1].
    """
    if system.n_particles != 2:
        raise SpecError("curvature requires exactly two particles")
    coords = np.asarray(coords, float)
    n = 2
    pot_1, pot_2 = system.potential(1), system.potential(2)
    v_1 = evaluate_potential(pot_1, coords, rep)
    v_2 = evaluate_potential(pot_2, coords, rep)
    m_1, m_2 = system.masses

    def d_pot(potential, k, mu):
        return evaluate_potential(
            differentiate_potential(potential, k, mu), coords, rep)

    # dH_1/dt_2 - dH_2/dt_1 (only the potentials depend on the times)
    zeroth = d_pot(pot_1, 2, 0) - d_pot(pot_2, 1, 0)

    # -i [H_1, H_2]: cross terms of kinetic, mass, and potential parts.
    commutator_zeroth = (
        _commutator(v_1, v_2)
        + m_1 * _commutator(embed(rep.gamma(0), 1, n), v_2)
        - m_2 * _commutator(embed(rep.gamma(0), 2, n), v_1))
    for a in (1, 2, 3):
        commutator_zeroth = (
            commutator_zeroth
            - 1j * embed(rep.alpha(a), 1, n) @ d_pot(pot_2, 1, a)
            + 1j * embed(rep.alpha(a), 2, n) @ d_pot(pot_1, 2, a))
    zeroth = zeroth + (-1j) * commutator_zeroth

    first = {}
    for a in (1, 2, 3):
        first[(1, a)] = -_commutator(embed(rep.alpha(a), 1, n), v_2)
        first[(2, a)] = _commutator(embed(rep.alpha(a), 2, n), v_1)
    return CurvatureOperator(zeroth=zeroth, first=first)
