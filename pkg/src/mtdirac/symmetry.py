"""Spacetime symmetries and interaction classification.

Three services for two-particle multi-time systems:

* Poincare transforms (boosts, rotations, translations) with their
  spinor lifts, and sampled residuals measuring how far a potential
  pair is from covariant under a given transform.

* A gauge classifier for the alpha-sector coefficient fields: decides
  whether the cross-particle part of the first-order couplings is the
  gradient of a shared phase function (hence removable), reconstructs
  that function by path integration, and cross-checks it by path
  independence and finite differences.

* Structure probes for the exponential interaction family: the
  second-order ODEs its gamma-sector coefficients must satisfy when
  the alpha-sector fields are constant, and a pointwise witness that
  certifies genuine interaction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .clifford import GammaRep, frobenius
from .consistency import CoefficientFormError, CoefficientSet, to_coefficient_form
from .dsl import Expr, differentiate, evaluate, is_constant
from .potential import MultiTimeSystem, SpecError, evaluate_potential

GAUGE_REMOVABLE = "GAUGE_REMOVABLE"
INTERACTING = "INTERACTING"
UNDECIDED = "UNDECIDED"


# ---------------------------------------------------------------------------
# Poincare transforms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PoincareTransform:
    """x -> Lambda x + a with spinor lift S gamma^mu S^-1 = Lambda^mu_nu gamma^nu."""

    name: str
    lorentz: np.ndarray
    spinor: np.ndarray
    translation: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Transform coordinates; x has shape (..., 4)."""
        return np.asarray(x) @ self.lorentz.T + self.translation


def _unit(axis: Sequence[float]) -> np.ndarray:
    axis = np.asarray(axis, float)
    norm = float(np.linalg.norm(axis))
    if norm == 0:
        raise ValueError("axis must be nonzero")
    return axis / norm


def _match_spinor(lorentz: np.ndarray, candidates: Sequence[np.ndarray],
                  rep: GammaRep, tol: float = 1e-10) -> np.ndarray:
    for s in candidates:
        s_inv = np.linalg.inv(s)
        worst = max(
            frobenius(s @ rep.gamma(mu) @ s_inv
                      - sum(lorentz[mu, nu] * rep.gamma(nu)
                            for nu in range(4)))
            for mu in range(4))
        if worst < tol:
            return s
    raise RuntimeError("no spinor lift reproduced the vector transform")


def identity_transform() -> PoincareTransform:
    return PoincareTransform("identity", np.eye(4), np.eye(4, dtype=complex),
                             np.zeros(4))


def make_translation(offset: Sequence[float]) -> PoincareTransform:
    offset = np.asarray(offset, float)
    if offset.shape != (4,):
        raise ValueError("translation needs a 4-vector")
    return PoincareTransform("translation", np.eye(4),
                             np.eye(4, dtype=complex), offset.copy())


def make_boost(axis: Sequence[float], rapidity: float,
               rep: GammaRep) -> PoincareTransform:
    """Pure boost with the given rapidity along a spatial axis."""
    n = _unit(axis)
    generator = np.zeros((4, 4))
    generator[0, 1:] = n
    generator[1:, 0] = n
    lorentz = expm(rapidity * generator)
    alpha_n = sum(n[a - 1] * rep.alpha(a) for a in (1, 2, 3))
    candidates = [expm(0.5 * rapidity * alpha_n),
                  expm(-0.5 * rapidity * alpha_n)]
    spinor = _match_spinor(lorentz, candidates, rep)
    return PoincareTransform(f"boost({n[0]:g},{n[1]:g},{n[2]:g});chi={rapidity:g}",
                             lorentz, spinor, np.zeros(4))


def make_rotation(axis: Sequence[float], angle: float,
                  rep: GammaRep) -> PoincareTransform:
    """Spatial rotation by `angle` about a spatial axis."""
    n = _unit(axis)
    generator = np.zeros((4, 4))
    for a in range(3):
        for b in range(3):
            for c in range(3):
                if (a, b, c) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
                    sign = 1.0
                elif (a, b, c) in ((0, 2, 1), (2, 1, 0), (1, 0, 2)):
                    sign = -1.0
                else:
                    continue
                generator[1 + a, 1 + b] += -sign * n[c]
    lorentz = expm(angle * generator)
    sigma_n = rep.gamma5 @ sum(n[a - 1] * rep.alpha(a) for a in (1, 2, 3))
    candidates = [expm(-0.5j * angle * sigma_n), expm(0.5j * angle * sigma_n)]
    spinor = _match_spinor(lorentz, candidates, rep)
    return PoincareTransform(f"rotation({n[0]:g},{n[1]:g},{n[2]:g});theta={angle:g}",
                             lorentz, spinor, np.zeros(4))


def compose(outer: PoincareTransform,
            inner: PoincareTransform) -> PoincareTransform:
    """The transform x -> outer(inner(x))."""
    return PoincareTransform(
        f"{outer.name}*{inner.name}",
        outer.lorentz @ inner.lorentz,
        outer.spinor @ inner.spinor,
        outer.translation + outer.lorentz @ inner.translation)


def inverse(transform: PoincareTransform) -> PoincareTransform:
    lam_inv = np.linalg.inv(transform.lorentz)
    return PoincareTransform(
        f"inverse({transform.name})", lam_inv,
        np.linalg.inv(transform.spinor),
        -lam_inv @ transform.translation)


def _tensor_power(matrix: np.ndarray, n: int) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for _ in range(n):
        out = np.kron(out, matrix)
    return out


def poincare_residual(system: MultiTimeSystem,
                      transform: PoincareTransform,
                      samples: np.ndarray, rep: GammaRep) -> float:
    """sup over samples and particles of the covariance defect

        || V_k(X) - (S x..x S) V_k(Lambda^-1(x_1 - a), ...) (S^-1 x..x S^-1) ||_F
    """
    samples = np.asarray(samples, float)
    lam_inv = np.linalg.inv(transform.lorentz)
    big_s = _tensor_power(transform.spinor, system.n_particles)
    big_s_inv = np.linalg.inv(big_s)
    worst = 0.0
    for coords in samples:
        pulled_back = (coords - transform.translation) @ lam_inv.T
        for k in range(1, system.n_particles + 1):
            v_here = evaluate_potential(system.potential(k), coords, rep)
            v_there = evaluate_potential(system.potential(k), pulled_back, rep)
            worst = max(worst,
                        frobenius(v_here - big_s @ v_there @ big_s_inv))
    return worst


def translation_residual(system: MultiTimeSystem, offset: Sequence[float],
                         samples: np.ndarray, rep: GammaRep) -> float:
    return poincare_residual(system, make_translation(offset), samples, rep)


# ---------------------------------------------------------------------------
# Exponential-family structure: coefficient ODEs
# ---------------------------------------------------------------------------

def exponential_form_residual(coefficients: CoefficientSet,
                              masses: tuple[float, float],
                              samples: np.ndarray) -> dict[str, float]:
    """Second-order structure conditions for constant alpha-sector fields.

    When all of W, X, Y, Z are constant, every consistent pair has
    gamma-sector coefficients obeying

        d_{2,nu} d_{2,lam} P_mu = 4 (Z2_lam Z2_nu - Y2_lam Y2_nu) P_mu

    for P in {A + m1 delta_0, B, C, D}, the mirrored equations in the
    particle-1 derivatives for {E + m2 delta_0, F, G, H} driven by
    (X1, Z1), and the rank conditions Y2_nu Z2_lam = Y2_lam Z2_nu
    (branch_2) and X1_mu Z1_lam = X1_lam Z1_mu (branch_1).

    Raises CoefficientFormError when an alpha-sector field is not
    constant.
    """
    for name in ("W1", "X1", "Y1", "Z1", "W2", "X2", "Y2", "Z2"):
        for component in coefficients.field(name):
            if not is_constant(component):
                raise CoefficientFormError(
                    f"field {name} is not constant")
    samples = np.asarray(samples, float)
    coords = [[samples[:, k, mu] for mu in range(4)] for k in range(2)]
    m1, m2 = masses

    def ev(expr: Expr) -> np.ndarray:
        return np.asarray(evaluate(expr, coords))

    x1 = [ev(e) for e in coefficients.X1]
    z1 = [ev(e) for e in coefficients.Z1]
    y2 = [ev(e) for e in coefficients.Y2]
    z2 = [ev(e) for e in coefficients.Z2]

    out: dict[str, float] = {}
    for label, exprs, shift in (("A", coefficients.A, m1),
                                ("B", coefficients.B, 0.0),
                                ("C", coefficients.C, 0.0),
                                ("D", coefficients.D, 0.0)):
        worst = 0.0
        for mu in range(4):
            base_value = ev(exprs[mu]) + (shift if mu == 0 else 0.0)
            for nu in range(4):
                first = differentiate(exprs[mu], 2, nu)
                for lam in range(4):
                    second = ev(differentiate(first, 2, lam))
                    rhs = 4.0 * (z2[lam] * z2[nu] - y2[lam] * y2[nu]) * base_value
                    worst = max(worst, float(np.max(np.abs(second - rhs))))
        out[f"ode_{label}"] = worst

    for label, exprs, shift in (("E", coefficients.E, m2),
                                ("F", coefficients.F, 0.0),
                                ("G", coefficients.G, 0.0),
                                ("H", coefficients.H, 0.0)):
        worst = 0.0
        for nu in range(4):
            base_value = ev(exprs[nu]) + (shift if nu == 0 else 0.0)
            for mu in range(4):
                first = differentiate(exprs[nu], 1, mu)
                for lam in range(4):
                    second = ev(differentiate(first, 1, lam))
                    rhs = 4.0 * (z1[lam] * z1[mu] - x1[lam] * x1[mu]) * base_value
                    worst = max(worst, float(np.max(np.abs(second - rhs))))
        out[f"ode_{label}"] = worst

    out["branch_1"] = max(
        float(np.max(np.abs(x1[mu] * z1[lam] - x1[lam] * z1[mu])))
        for mu in range(4) for lam in range(4))
    out["branch_2"] = max(
        float(np.max(np.abs(y2[nu] * z2[lam] - y2[lam] * z2[nu])))
        for nu in range(4) for lam in range(4))
    return out


def interaction_witness_hoho(
        system: MultiTimeSystem, rep: GammaRep,
        relatives: Sequence[Sequence[float]] = ((0.0, 0.0, 0.0, 0.0),),
) -> float:
    """Pointwise obstruction certifying the exponential pair interacts.

    || (c . alpha_2) * 2i gamma5_1 (C . gamma_1) exp(2i gamma5_1 c.x) ||_F
    evaluated at relative separations x = x_2 - x_1; returns the inf
    over the given separations.  A value bounded away from zero rules
    out gauge removal of the gamma-sector coupling.
    """
    if system.name != "hoho":
        raise SpecError("the interaction witness applies to the exponential pair")
    params = dict(system.params)
    big_c = np.array([params[f"C{mu}"] for mu in range(4)])
    small_c = np.array([params[f"c{mu}"] for mu in range(4)])
    c_gamma = sum(big_c[mu] * rep.gamma(mu) for mu in range(4))
    particle_2 = sum(small_c[nu] * rep.alpha(nu) for nu in range(4))
    worst = np.inf
    for relative in relatives:
        phase = complex(2.0 * (small_c @ np.asarray(relative, float)))
        rotor = (np.cos(phase) * np.eye(4, dtype=complex)
                 + 1j * np.sin(phase) * rep.gamma5)
        particle_1 = 2j * rep.gamma5 @ c_gamma @ rotor
        worst = min(worst, frobenius(np.kron(particle_1, particle_2)))
    return float(worst)


# ---------------------------------------------------------------------------
# Gauge classification of the alpha-sector
# ---------------------------------------------------------------------------

def _default_values() -> tuple[float, ...]:
    return tuple(np.linspace(-1.0, 1.0, 9))


def _default_base() -> tuple[tuple[float, ...], ...]:
    return ((0.0, 0.0, 0.0, 0.0), (0.0, 0.0, 0.0, 0.0))


@dataclass(frozen=True)
class ConfigGrid:
    """Rectangular probe grid varying two coordinates around a base point."""

    axes: tuple[tuple[int, int], tuple[int, int]] = ((1, 0), (2, 3))
    values: tuple[float, ...] = field(default_factory=_default_values)
    base: tuple[tuple[float, ...], ...] = field(default_factory=_default_base)

    def base_array(self) -> np.ndarray:
        return np.asarray(self.base, float)

    def configs(self) -> np.ndarray:
        """All grid configurations, shape (n, n, 2, 4)."""
        n = len(self.values)
        out = np.tile(self.base_array(), (n, n, 1, 1))
        (k1, mu1), (k2, mu2) = self.axes
        values = np.asarray(self.values, float)
        out[:, :, k1 - 1, mu1] = values[:, None]
        out[:, :, k2 - 1, mu2] = values[None, :]
        return out


# sector label -> (particle-1 field, particle-2 field) of the alpha-part
_SECTOR_FIELDS = (
    ("unit", "W1", "W2"),
    ("gamma5_2", "X1", "X2"),
    ("gamma5_1", "Y1", "Y2"),
    ("gamma5_12", "Z1", "Z2"),
)


def _eval_field(expr: Expr, points: np.ndarray) -> np.ndarray:
    """Evaluate on stacked configurations (..., 2, 4) -> (...) array."""
    coords = [[points[..., k, mu] for mu in range(4)] for k in range(2)]
    value = evaluate(expr, coords)
    if not isinstance(value, np.ndarray) or value.shape != points.shape[:-2]:
        value = np.broadcast_to(np.asarray(value), points.shape[:-2])
    return value


@dataclass(frozen=True, eq=False)
class GaugeReport:
    """Outcome of the alpha-sector gauge analysis on a probe grid."""

    verdict: str
    integrability_sup: float
    cross_curl_sup: float
    locality_sup: float
    triangle_sup: float
    gradient_match_sup: float
    tol: float
    fd_tol: float
    gauge_components: dict[str, np.ndarray]

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "integrability_sup": self.integrability_sup,
            "cross_curl_sup": self.cross_curl_sup,
            "locality_sup": self.locality_sup,
            "triangle_sup": self.triangle_sup,
            "gradient_match_sup": self.gradient_match_sup,
            "tol": self.tol,
            "fd_tol": self.fd_tol,
        }


def classify_gauge(system: MultiTimeSystem | CoefficientSet,
                   rep: GammaRep | None = None,
                   grid: ConfigGrid | None = None,
                   tol: float = 1e-9, fd_tol: float = 2e-2,
                   nodes: int = 200) -> GaugeReport:
    """Decide whether the cross-particle alpha-sector is a pure gauge.

    The four commuting sectors (1, gamma5_2, gamma5_1, gamma5_1 gamma5_2)
    of the first-order coupling fields f_{j,mu} are treated as scalar
    1-forms over configuration space.  The removable candidate is
    h = f - f_ext, where f_ext freezes the other particle at the grid
    base point.  GAUGE_REMOVABLE requires the exactness conditions
    (cross curls of f, and base-point independence of the in-particle
    curls) below tol, plus two quadrature-scale sanity checks on the
    reconstructed potential: path independence across a triangle of
    paths and a finite-difference gradient match, both below fd_tol
    (the line integral itself carries O(nodes^-2) error, so these
    cannot resolve tol).  Integrability defects inside [tol, 10*tol)
    are reported UNDECIDED rather than interacting.
    """
    del rep  # the analysis is representation-independent
    grid = grid or ConfigGrid()
    if isinstance(system, CoefficientSet):
        coefficients = system
    else:
        coefficients = to_coefficient_form(system)
    base = grid.base_array()
    configs = grid.configs()
    n = len(grid.values)

    sectors: dict[str, tuple[tuple[Expr, ...], tuple[Expr, ...]]] = {
        label: (coefficients.field(name1), coefficients.field(name2))
        for label, name1, name2 in _SECTOR_FIELDS}

    # --- exactness conditions -------------------------------------------
    cross_curl = 0.0
    locality = 0.0
    for f1, f2 in sectors.values():
        for mu in range(4):
            for nu in range(4):
                defect = _eval_field(differentiate(f2[nu], 1, mu), configs) \
                    - _eval_field(differentiate(f1[mu], 2, nu), configs)
                cross_curl = max(cross_curl, float(np.max(np.abs(defect))))
        for exprs, own, other in ((f1, 1, 2), (f2, 2, 1)):
            for mu in range(4):
                for nu in range(mu + 1, 4):
                    curl = differentiate(exprs[nu], own, mu)
                    curl_swapped = differentiate(exprs[mu], own, nu)
                    for lam in range(4):
                        moved = _eval_field(
                            differentiate(curl, other, lam), configs) \
                            - _eval_field(
                                differentiate(curl_swapped, other, lam), configs)
                        locality = max(locality, float(np.max(np.abs(moved))))
    integrability = max(cross_curl, locality)

    # --- cross-only part h and its path integral -------------------------
    def h_value(sector: str, j: int, mu: int, points: np.ndarray) -> np.ndarray:
        expr = sectors[sector][j - 1][mu]
        frozen = np.array(points, copy=True)
        other = 2 if j == 1 else 1
        frozen[..., other - 1, :] = base[other - 1]
        return _eval_field(expr, points) - _eval_field(expr, frozen)

    s_nodes = np.linspace(0.0, 1.0, nodes)

    def path_integral(sector: str, start: np.ndarray,
                      end: np.ndarray) -> np.ndarray:
        """Integrate h along straight segments start -> end (batched)."""
        delta = end - start
        path = start + np.multiply.outer(s_nodes, delta)
        integrand = np.zeros(path.shape[:-2], complex)
        for j in (1, 2):
            for mu in range(4):
                step = delta[..., j - 1, mu]
                if np.all(step == 0):
                    continue
                integrand = integrand + h_value(sector, j, mu, path) * step
        return np.trapezoid(integrand, s_nodes, axis=0)

    gauge_components = {
        sector: path_integral(sector, base, configs)
        for sector in sectors}

    # --- path independence (straight vs corner polyline) -----------------
    probes = [(0, 0), (0, n - 1), (n - 1, 0), (n - 1, n - 1), (n // 2, n // 2)]
    triangle = 0.0
    for sector in sectors:
        for i, j in probes:
            target = configs[i, j]
            corner = np.array(target, copy=True)
            corner[1] = base[1]
            straight = path_integral(sector, base, target)
            bent = (path_integral(sector, base, corner)
                    + path_integral(sector, corner, target))
            triangle = max(triangle, float(abs(straight - bent)))

    # --- finite-difference gradient match --------------------------------
    fd_step = 1e-2
    fd_probes = [configs[n // 4, (3 * n) // 4], configs[(3 * n) // 4, n // 4]]
    gradient_match = 0.0
    for sector in sectors:
        for point in fd_probes:
            for j in (1, 2):
                for mu in range(4):
                    up = np.array(point, copy=True)
                    dn = np.array(point, copy=True)
                    up[j - 1, mu] += fd_step
                    dn[j - 1, mu] -= fd_step
                    slope = (path_integral(sector, base, up)
                             - path_integral(sector, base, dn)) / (2 * fd_step)
                    here = h_value(sector, j, mu, point[None])[0]
                    gradient_match = max(gradient_match,
                                         float(abs(slope - here)))

    if integrability < tol and triangle < fd_tol and gradient_match < fd_tol:
        verdict = GAUGE_REMOVABLE
    elif tol <= integrability < 10 * tol:
        verdict = UNDECIDED
    else:
        verdict = INTERACTING
    return GaugeReport(
        verdict=verdict, integrability_sup=integrability,
        cross_curl_sup=cross_curl, locality_sup=locality,
        triangle_sup=triangle, gradient_match_sup=gradient_match,
        tol=tol, fd_tol=fd_tol, gauge_components=gauge_components)


@dataclass(frozen=True, eq=False)
class ClassificationReport:
    """Combined interaction classification of a two-particle pair."""

    verdict: str
    gamma_sector_sup: float
    gauge: GaugeReport
    witness: float | None
    tol: float

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "gamma_sector_sup": self.gamma_sector_sup,
            "f_sector": self.gauge.as_dict(),
            "witness": self.witness,
            "tol": self.tol,
        }


def classify_interaction(system: MultiTimeSystem, rep: GammaRep,
                         grid: ConfigGrid | None = None,
                         tol: float = 1e-9,
                         fd_tol: float = 2e-2) -> ClassificationReport:
    """Classify a pair as gauge-removable, interacting, or undecided.

    When the gamma-sector fields (A..H) vanish on the probe grid the
    alpha-sector gauge analysis decides.  A nonzero gamma sector is
    beyond the gradient argument: the exponential pair is then settled
    by its interaction witness, anything else stays UNDECIDED.
    """
    grid = grid or ConfigGrid()
    coefficients = to_coefficient_form(system)
    configs = grid.configs()
    gamma_sup = 0.0
    for name in ("A", "B", "C", "D", "E", "F", "G", "H"):
        for expr in coefficients.field(name):
            value = _eval_field(expr, configs)
            gamma_sup = max(gamma_sup, float(np.max(np.abs(value))))

    gauge = classify_gauge(system, rep, grid=grid, tol=tol, fd_tol=fd_tol)
    witness: float | None = None
    if gamma_sup < tol:
        verdict = gauge.verdict
    elif system.name == "hoho":
        witness = interaction_witness_hoho(system, rep)
        verdict = INTERACTING if witness > tol else UNDECIDED
    else:
        verdict = UNDECIDED
    return ClassificationReport(
        verdict=verdict, gamma_sector_sup=gamma_sup, gauge=gauge,
        witness=witness, tol=tol)
