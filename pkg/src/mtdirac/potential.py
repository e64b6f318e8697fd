"""Multi-time systems: matrix-valued potentials over configuration spacetime.

A system couples N Dirac particles, each with its own time.  Particle k
evolves under H_k = -i sum_a alpha^a_k d/dx_{k,a} + m_k gamma0_k + V_k,
where V_k is a sum of tensor-product spinor structures weighted by
scalar coefficient expressions of all N spacetime coordinates.
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .clifford import (
    GAMMA5_ELEMENT,
    IDENTITY_ELEMENT,
    BasisClass,
    BasisElement,
    GammaRep,
    TensorBasisElement,
    frobenius,
    realize,
    tensor_element,
)
from .dsl import (
    Add,
    Call,
    Const,
    Coord,
    Div,
    Expr,
    Mul,
    Sub,
    differentiate,
    evaluate,
    is_zero,
    parse,
    to_source,
)


class DomainError(Exception):
    """Numerical-domain failure: a coefficient guard was violated."""


class SpecError(Exception):
    """Malformed system description."""


# ---------------------------------------------------------------------------
# Potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Guard:
    """Evaluation precondition: |expr| must stay >= threshold."""

    expr: Expr
    threshold: float = 1e-6
    description: str = ""


@dataclass(frozen=True)
class PotentialTerm:
    structure: TensorBasisElement
    coefficient: Expr


@dataclass(frozen=True)
class Potential:
    """Matrix potential entering particle `particle`'s evolution equation."""

    particle: int
    n_particles: int
    terms: tuple[PotentialTerm, ...]
    guards: tuple[Guard, ...] = ()

    def __post_init__(self):
        if not 1 <= self.particle <= self.n_particles:
            raise SpecError(
                f"particle index {self.particle} outside 1..{self.n_particles}")
        for term in self.terms:
            if term.structure.n_particles != self.n_particles:
                raise SpecError("term structure has wrong particle count")

    def is_zero(self) -> bool:
        return all(is_zero(term.coefficient) for term in self.terms)


def zero_potential(particle: int, n_particles: int = 2) -> Potential:
    return Potential(particle, n_particles, ())


def check_guards(potential: Potential, coords) -> None:
    for guard in potential.guards:
        value = np.abs(np.asarray(evaluate(guard.expr, coords)))
        if np.any(value < guard.threshold):
            what = guard.description or to_source(guard.expr)
            raise DomainError(
                f"guard violated: |{what}| < {guard.threshold}")


def evaluate_potential(potential: Potential, coords,
                       rep: GammaRep) -> np.ndarray:
    """Potential matrix at a configuration; coords indexed coords[k-1][mu].

    Coordinate entries may be arrays, in which case the result has the
    broadcast shape as leading axes followed by the (4^N, 4^N) matrix.
    """
    check_guards(potential, coords)
    dim = 4 ** potential.n_particles
    total = np.zeros((dim, dim), complex)
    for term in potential.terms:
        if is_zero(term.coefficient):
            continue
        coeff = np.asarray(evaluate(term.coefficient, coords))
        matrix = realize(term.structure, rep)
        total = total + coeff[..., None, None] * matrix
    return total


def differentiate_potential(potential: Potential, k: int, mu: int) -> Potential:
    """Coefficient-wise partial derivative with respect to x_{k,mu}."""
    terms = []
    for term in potential.terms:
        derivative = differentiate(term.coefficient, k, mu)
        if not is_zero(derivative):
            terms.append(PotentialTerm(term.structure, derivative))
    return Potential(potential.particle, potential.n_particles, tuple(terms),
                     potential.guards)


# ---------------------------------------------------------------------------
# Systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MultiTimeSystem:
    """N coupled single-time Dirac equations with potentials V_1..V_N."""

    name: str
    n_particles: int
    masses: tuple[float, ...]
    potentials: tuple[Potential, ...]
    hermitian: bool
    params: Mapping[str, complex] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.masses) != self.n_particles:
            raise SpecError("one mass per particle required")
        if len(self.potentials) != self.n_particles:
            raise SpecError("one potential per particle required")
        for k, potential in enumerate(self.potentials, start=1):
            if potential.particle != k:
                raise SpecError("potentials must be ordered by particle")
            if potential.n_particles != self.n_particles:
                raise SpecError("potential particle count mismatch")

    def potential(self, k: int) -> Potential:
        return self.potentials[k - 1]

    def mass(self, k: int) -> float:
        return self.masses[k - 1]


def hermiticity_residual(system: MultiTimeSystem, configs: np.ndarray,
                         rep: GammaRep) -> float:
    """sup over samples and particles of ||V_k - V_k^dagger||_F."""
    worst = 0.0
    for coords in configs:
        for k in range(1, system.n_particles + 1):
            matrix = evaluate_potential(system.potential(k), coords, rep)
            worst = max(worst, frobenius(matrix - matrix.conj().T))
    return worst


# ---------------------------------------------------------------------------
# Sampling regions
# ---------------------------------------------------------------------------

class Region(enum.Enum):
    ALL = "all"
    SPACELIKE = "spacelike"


def is_spacelike(coords: np.ndarray) -> bool:
    """True when every particle pair is spacelike separated."""
    coords = np.asarray(coords, float)
    n = coords.shape[0]
    for j in range(n):
        for k in range(j + 1, n):
            dt = coords[j, 0] - coords[k, 0]
            dx = coords[j, 1:] - coords[k, 1:]
            if dt * dt >= float(dx @ dx):
                return False
    return True


def sample_configs(n_samples: int, rng: np.random.Generator,
                   n_particles: int = 2, region: Region = Region.ALL,
                   box: float = 2.0, max_tries: int = 10000) -> np.ndarray:
    """Draw configurations uniformly from [-box, box]^(N*4).

    With region SPACELIKE, rejection-sample until every pair is
    spacelike separated (bounded by max_tries draws per sample).
    """
    if region is Region.ALL:
        return rng.uniform(-box, box, size=(n_samples, n_particles, 4))
    out = np.empty((n_samples, n_particles, 4))
    for i in range(n_samples):
        for _ in range(max_tries):
            candidate = rng.uniform(-box, box, size=(n_particles, 4))
            if is_spacelike(candidate):
                out[i] = candidate
                break
        else:
            raise RuntimeError("rejection sampling failed to find a "
                               "spacelike configuration")
    return out


# ---------------------------------------------------------------------------
# Builtin systems
# ---------------------------------------------------------------------------

def _as_fourvector(value, name: str) -> tuple[complex, complex, complex, complex]:
    try:
        items = tuple(complex(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise SpecError(
            f"{name} must be a 4-component numeric sequence") from exc
    if len(items) != 4:
        raise SpecError(f"{name} must have exactly 4 components")
    return items


def _only_keys(params: Mapping, allowed: set[str], builtin: str) -> None:
    unknown = set(params) - allowed
    if unknown:
        raise SpecError(
            f"unknown parameters for {builtin}: {sorted(unknown)}")


def _particle1(element: BasisElement) -> TensorBasisElement:
    return tensor_element(element, IDENTITY_ELEMENT)


def _particle2(element: BasisElement) -> TensorBasisElement:
    return tensor_element(IDENTITY_ELEMENT, element)


def build_free(params: Mapping | None = None) -> MultiTimeSystem:
    """Two non-interacting Dirac particles."""
    params = dict(params or {})
    _only_keys(params, {"m1", "m2"}, "free")
    masses = (float(params.get("m1", 1.0)), float(params.get("m2", 1.0)))
    return MultiTimeSystem(
        name="free", n_particles=2, masses=masses,
        potentials=(zero_potential(1), zero_potential(2)),
        hermitian=True)


def build_example1_vector(params: Mapping | None = None) -> MultiTimeSystem:
    """Constant vector-type cross coupling: V_1 = A_mu alpha_2^mu,
    V_2 = B_mu alpha_1^mu.

    Generically inconsistent: the second equation's mass term fails to
    commute with the first equation's potential.
    """
    params = dict(params or {})
    _only_keys(params, {"A", "B", "m1", "m2"}, "example1_vector")
    vec_a = _as_fourvector(params.get("A", (0, 0, 0, 1)), "A")
    vec_b = _as_fourvector(params.get("B", (0, 0, 0, 0)), "B")
    masses = (float(params.get("m1", 1.0)), float(params.get("m2", 1.0)))

    terms_1 = tuple(
        PotentialTerm(_particle2(BasisElement(BasisClass.ALPHA, mu)),
                      Const(vec_a[mu]))
        for mu in range(4) if vec_a[mu] != 0)
    terms_2 = tuple(
        PotentialTerm(_particle1(BasisElement(BasisClass.ALPHA, mu)),
                      Const(vec_b[mu]))
        for mu in range(4) if vec_b[mu] != 0)
    hermitian = all(v.imag == 0 for v in vec_a + vec_b)
    return MultiTimeSystem(
        name="example1_vector", n_particles=2, masses=masses,
        potentials=(Potential(1, 2, terms_1), Potential(2, 2, terms_2)),
        hermitian=hermitian,
        params={f"A{mu}": vec_a[mu] for mu in range(4)}
        | {f"B{mu}": vec_b[mu] for mu in range(4)})


def _relative_phase(coeffs: Sequence[complex]) -> Expr:
    """2 * sum_mu c_mu (x2_mu - x1_mu) as an expression."""
    total: Expr | None = None
    for mu, c in enumerate(coeffs):
        if c == 0:
            continue
        piece = Mul(Const(2 * c), Sub(Coord(2, mu), Coord(1, mu)))
        total = piece if total is None else Add(total, piece)
    return total if total is not None else Const(0j)


def build_hoho(params: Mapping | None = None) -> MultiTimeSystem:
    """Exactly consistent interacting pair built from a relative-coordinate
    exponential.

    V_1 = C_mu gamma1^mu cos(phi) - i C_mu gamma5_1 gamma1^mu sin(phi)
          - m1 gamma0_1,      phi = 2 c.(x2 - x1),
    V_2 = c_nu gamma5_1 alpha_2^nu.

    With real C_0, c and imaginary spatial C the potentials are
    hermitian; the defaults C = c = (1, 0, 0, 0) qualify.
    """
    params = dict(params or {})
    _only_keys(params, {"C", "c", "m1", "m2"}, "hoho")
    big_c = _as_fourvector(params.get("C", (1, 0, 0, 0)), "C")
    small_c = _as_fourvector(params.get("c", (1, 0, 0, 0)), "c")
    masses = (float(params.get("m1", 1.0)), float(params.get("m2", 1.0)))

    phase = _relative_phase(small_c)
    cos_phase = Call("cos", phase)
    sin_phase = Call("sin", phase)

    terms_1: list[PotentialTerm] = []
    for mu in range(4):
        if big_c[mu] == 0:
            continue
        terms_1.append(PotentialTerm(
            _particle1(BasisElement(BasisClass.GAMMA, mu)),
            Mul(Const(big_c[mu]), cos_phase)))
        terms_1.append(PotentialTerm(
            _particle1(BasisElement(BasisClass.G5GAMMA, mu)),
            Mul(Const(-1j * big_c[mu]), sin_phase)))
    terms_1.append(PotentialTerm(
        _particle1(BasisElement(BasisClass.GAMMA, 0)),
        Const(complex(-masses[0]))))

    terms_2 = tuple(
        PotentialTerm(
            tensor_element(GAMMA5_ELEMENT, BasisElement(BasisClass.ALPHA, nu)),
            Const(small_c[nu]))
        for nu in range(4) if small_c[nu] != 0)

    hermitian = (big_c[0].imag == 0
                 and all(c.real == 0 for c in big_c[1:])
                 and all(c.imag == 0 for c in small_c))
    return MultiTimeSystem(
        name="hoho", n_particles=2, masses=masses,
        potentials=(Potential(1, 2, tuple(terms_1)),
                    Potential(2, 2, terms_2)),
        hermitian=hermitian,
        params={f"C{mu}": big_c[mu] for mu in range(4)}
        | {f"c{mu}": small_c[mu] for mu in range(4)})


COEFFICIENT_FIELDS_1 = ("W1", "X1", "Y1", "Z1", "A", "B", "C", "D")
COEFFICIENT_FIELDS_2 = ("W2", "X2", "Y2", "Z2", "E", "F", "G", "H")

_SECTOR_1 = {
    # (particle-1 class, particle-2 sector element) per field of V_1
    "W1": (BasisClass.ALPHA, IDENTITY_ELEMENT),
    "Y1": (BasisClass.G5ALPHA, IDENTITY_ELEMENT),
    "A": (BasisClass.GAMMA, IDENTITY_ELEMENT),
    "B": (BasisClass.G5GAMMA, IDENTITY_ELEMENT),
    "X1": (BasisClass.ALPHA, GAMMA5_ELEMENT),
    "Z1": (BasisClass.G5ALPHA, GAMMA5_ELEMENT),
    "C": (BasisClass.GAMMA, GAMMA5_ELEMENT),
    "D": (BasisClass.G5GAMMA, GAMMA5_ELEMENT),
}
_SECTOR_2 = {
    # (particle-2 class, particle-1 sector element) per field of V_2
    "W2": (BasisClass.ALPHA, IDENTITY_ELEMENT),
    "X2": (BasisClass.G5ALPHA, IDENTITY_ELEMENT),
    "E": (BasisClass.GAMMA, IDENTITY_ELEMENT),
    "F": (BasisClass.G5GAMMA, IDENTITY_ELEMENT),
    "Y2": (BasisClass.ALPHA, GAMMA5_ELEMENT),
    "Z2": (BasisClass.G5ALPHA, GAMMA5_ELEMENT),
    "G": (BasisClass.GAMMA, GAMMA5_ELEMENT),
    "H": (BasisClass.G5GAMMA, GAMMA5_ELEMENT),
}


def _parse_field(value, name: str, params: Mapping[str, complex]) -> tuple[Expr, ...]:
    if value is None:
        return (Const(0j),) * 4
    try:
        items = list(value)
    except TypeError as exc:
        raise SpecError(f"{name} must be a 4-component sequence") from exc
    if len(items) != 4:
        raise SpecError(f"{name} must have exactly 4 components")
    out = []
    for item in items:
        if isinstance(item, str):
            out.append(parse(item, n_particles=2, params=params))
        else:
            out.append(Const(complex(item)))
    return tuple(out)


def build_coefficient_form(params: Mapping | None = None) -> MultiTimeSystem:
    """General N=2 potential pair with purely first-order couplings.

    Sixteen coefficient fields (each a 4-component family of scalar
    expressions in both coordinates) populate the tensor structures

        V_1 = [alpha1.W1 + g5 alpha1.Y1 + gamma1.A + g5 gamma1.B]       x 1
            + [alpha1.X1 + g5 alpha1.Z1 + gamma1.C + g5 gamma1.D]       x g5
        V_2 = 1  x [alpha2.W2 + g5 alpha2.X2 + gamma2.E + g5 gamma2.F]
            + g5 x [alpha2.Y2 + g5 alpha2.Z2 + gamma2.G + g5 gamma2.H]

    Field values are 4-sequences of numbers or coefficient-language
    strings.
    """
    params = dict(params or {})
    allowed = (set(COEFFICIENT_FIELDS_1) | set(COEFFICIENT_FIELDS_2)
               | {"m1", "m2", "hermitian", "name"})
    _only_keys(params, allowed, "coefficient_form")
    masses = (float(params.get("m1", 1.0)), float(params.get("m2", 1.0)))
    dsl_params = {"m1": complex(masses[0]), "m2": complex(masses[1])}

    terms_1: list[PotentialTerm] = []
    for name in COEFFICIENT_FIELDS_1:
        cls, sector = _SECTOR_1[name]
        for mu, expr in enumerate(_parse_field(params.get(name), name, dsl_params)):
            if is_zero(expr):
                continue
            terms_1.append(PotentialTerm(
                tensor_element(BasisElement(cls, mu), sector), expr))
    terms_2: list[PotentialTerm] = []
    for name in COEFFICIENT_FIELDS_2:
        cls, sector = _SECTOR_2[name]
        for nu, expr in enumerate(_parse_field(params.get(name), name, dsl_params)):
            if is_zero(expr):
                continue
            terms_2.append(PotentialTerm(
                tensor_element(sector, BasisElement(cls, nu)), expr))

    return MultiTimeSystem(
        name=str(params.get("name", "coefficient_form")), n_particles=2,
        masses=masses,
        potentials=(Potential(1, 2, tuple(terms_1)),
                    Potential(2, 2, tuple(terms_2))),
        hermitian=bool(params.get("hermitian", False)))


def build_coulomb_like(params: Mapping | None = None) -> MultiTimeSystem:
    """Scalar 1/r pair coupling; singular at coincident spatial points."""
    params = dict(params or {})
    _only_keys(params, {"q", "m1", "m2"}, "coulomb_like")
    charge = complex(params.get("q", 1.0))
    masses = (float(params.get("m1", 1.0)), float(params.get("m2", 1.0)))
    distance = parse(
        "sqrt((x1_1 - x2_1)^2 + (x1_2 - x2_2)^2 + (x1_3 - x2_3)^2)")
    coeff = Div(Const(charge), distance)
    guard = Guard(distance, 1e-6, "interparticle distance")
    identity = tensor_element(IDENTITY_ELEMENT, IDENTITY_ELEMENT)
    return MultiTimeSystem(
        name="coulomb_like", n_particles=2, masses=masses,
        potentials=(
            Potential(1, 2, (PotentialTerm(identity, coeff),), (guard,)),
            Potential(2, 2, (PotentialTerm(identity, coeff),), (guard,)),
        ),
        hermitian=charge.imag == 0,
        params={"q": charge})


BUILTIN_SYSTEMS = {
    "free": build_free,
    "example1_vector": build_example1_vector,
    "hoho": build_hoho,
    "coefficient_form": build_coefficient_form,
    "coulomb_like": build_coulomb_like,
}


def make_builtin(name: str, params: Mapping | None = None) -> MultiTimeSystem:
    try:
        factory = BUILTIN_SYSTEMS[name]
    except KeyError:
        raise SpecError(
            f"unknown builtin system {name!r}; available: "
            f"{sorted(BUILTIN_SYSTEMS)}") from None
    return factory(params)


# ---------------------------------------------------------------------------
# JSON system descriptions
# ---------------------------------------------------------------------------

_CLASS_NAMES = {
    "alpha": BasisClass.ALPHA,
    "g5alpha": BasisClass.G5ALPHA,
    "gamma": BasisClass.GAMMA,
    "g5gamma": BasisClass.G5GAMMA,
}


def system_from_dict(data: Mapping) -> MultiTimeSystem:
    """Build a system from its JSON-object description."""
    try:
        n_particles = int(data["N"])
        masses = tuple(float(m) for m in data["masses"])
        hermitian = bool(data.get("hermitian", False))
        raw_potentials = list(data["potentials"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed system description: {exc}") from exc
    if n_particles < 1:
        raise SpecError("N must be at least 1")
    if len(masses) != n_particles:
        raise SpecError("masses must list one mass per particle")

    params: dict[str, complex] = {}
    for name, value in dict(data.get("params", {})).items():
        if isinstance(value, Mapping):
            params[name] = complex(float(value.get("re", 0.0)),
                                   float(value.get("im", 0.0)))
        else:
            params[name] = complex(value)

    potentials: dict[int, Potential] = {}
    for entry in raw_potentials:
        try:
            particle = int(entry["particle"])
            raw_terms = list(entry.get("terms", []))
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"malformed potential entry: {exc}") from exc
        if particle in potentials:
            raise SpecError(f"duplicate potential for particle {particle}")
        terms = []
        for raw in raw_terms:
            factors = raw.get("factors")
            if (isinstance(factors, str) or not isinstance(factors, Sequence)
                    or len(factors) != n_particles):
                raise SpecError("each term needs one factor per particle")
            elements = []
            for factor in factors:
                if not isinstance(factor, Mapping):
                    raise SpecError("each factor must be an object")
                cls_name = str(factor.get("cls", "id"))
                if cls_name == "id":
                    elements.append(IDENTITY_ELEMENT)
                    continue
                if cls_name not in _CLASS_NAMES:
                    raise SpecError(f"unknown factor class {cls_name!r}")
                mu = int(factor.get("mu", 0))
                if not 0 <= mu <= 3:
                    raise SpecError("factor component must be in 0..3")
                elements.append(BasisElement(_CLASS_NAMES[cls_name], mu))
            coeff_src = raw.get("coeff", "0")
            if isinstance(coeff_src, str):
                coeff = parse(coeff_src, n_particles, params)
            else:
                coeff = Const(complex(coeff_src))
            terms.append(PotentialTerm(tensor_element(*elements), coeff))
        potentials[particle] = Potential(particle, n_particles, tuple(terms))

    ordered = tuple(
        potentials.get(k, zero_potential(k, n_particles))
        for k in range(1, n_particles + 1))
    return MultiTimeSystem(
        name=str(data.get("name", "custom")), n_particles=n_particles,
        masses=masses, potentials=ordered, hermitian=hermitian,
        params=params)


def system_to_dict(system: MultiTimeSystem) -> dict:
    """Serialize a system to its JSON-object description."""
    potentials = []
    for potential in system.potentials:
        terms = []
        for term in potential.terms:
            factors = []
            for element in term.structure.factors:
                if element == IDENTITY_ELEMENT:
                    factors.append({"cls": "id"})
                else:
                    factors.append(
                        {"cls": element.cls.value, "mu": element.mu})
            terms.append({"factors": factors,
                          "coeff": to_source(term.coefficient)})
        potentials.append({"particle": potential.particle, "terms": terms})
    return {
        "name": system.name,
        "N": system.n_particles,
        "masses": list(system.masses),
        "hermitian": system.hermitian,
        "params": {name: {"re": complex(value).real, "im": complex(value).imag}
                   for name, value in dict(system.params).items()},
        "potentials": potentials,
    }


def load_system(path: str | os.PathLike) -> MultiTimeSystem:
    with open(path, encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, Mapping):
        raise SpecError("system description must be a JSON object")
    return system_from_dict(data)


def save_system(system: MultiTimeSystem, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(system_to_dict(system), handle, indent=2, sort_keys=True)
        handle.write("\n")
