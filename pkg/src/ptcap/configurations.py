"""Point configurations, their residual systems and the driver :func:`solve_pt`.

Every problem is reduced to an interior problem: a map ``f`` of the unit disk
with ``f(0) = 0`` onto the complement of a continuum that joins the anchors to
infinity, with ``f(1) = infinity``.  Exterior problems are inverted about one
of their anchors that is a leaf of the continuum.

Solving runs in three stages.

1. Period stage.  In the coordinate ``w = 1/z`` (for exterior problems: the
   original plane shifted so the leaf sits at 0) the branch points solve the
   real period conditions ``Re int sqrt(R) dz = 0`` along the edges of the
   expected tree.  The Robin constant then gives ``f'(0)`` and the edge
   lengths give every angle of the boundary word.
2. Harmonic stage.  Starting from that seed, the harmonic-symmetry residuals
   (values of ``f`` at mirrored boundary points, evaluated by Taylor rays)
   are solved with the hybrid method.
3. Verification at twice the series order.

The angle names follow the cyclic boundary word of each configuration, for
example ``beta1, alpha1, beta2, alpha2, beta3`` for three points: ``f`` maps
``e^{i alpha_k}`` to the k-th anchor and ``e^{i beta}`` to branch points.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (ModeGuardError, NearPoleError, NoConvergenceError, PTError,
                     StagnationError, TopologyMismatchError, TracingError)
from .periods import connection_residuals, edge_length, robin_lead
from .quadratic import QuadraticDifferential
from .series import DEFAULT_ORDER, inner_constant
from .solver import SolveReport, continuation, solve_system
from .tracer import Stop, ray_inner, ray_outer, trace_trajectory

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
CONFIG_IDS = ("three_point", "six_sym_1", "six_sym_2", "outer_two", "outer_three_sym", "outer_six_sym")
MODES = ("auto", "harmonic", "periods", "critical_orbit")
LENGTH_SUM_TOL = 1e-8
CRITICAL_ORBIT_MIN_ANGLE = 0.2
CRITICAL_ORBIT_ANGLE = 0.1


# --------------------------------------------------------------------------
# problems and solutions


def _is_real(z: complex, tol: float = 1e-12) -> bool:
    return abs(z.imag) <= tol * max(1.0, abs(z))


def _close(z: complex, w: complex, tol: float = 1e-12) -> bool:
    return abs(z - w) <= tol * max(1.0, abs(z), abs(w))


@dataclass(frozen=True)
class PTProblem:
    """Anchors of a minimal-capacity problem and the expected topology.

    Inner problems list the finite points ``a_k`` (the point at infinity is
    implicit).  Anchor orders:

    * ``three_point``: ``[a1, a2]``
    * ``six_sym_1`` and ``six_sym_2``: ``[a1, a2, a3, a4, a5]`` with ``a3`` real,
      ``a4 = conj(a2)`` and ``a5 = conj(a1)``
    * ``outer_two``: ``[p0, p1]``
    * ``outer_three_sym``: ``[p0, p, conj(p)]`` with ``p0`` real
    * ``outer_six_sym``: ``[p0, p3, a1, a2, conj(a2), conj(a1)]`` with ``p0`` and
      ``p3`` real.  ``p0`` must be a leaf whose neighbouring branch point also
      carries the ``a1`` branch; ``topology`` selects 1 or 2 (see the
      interior configurations), ``None`` tries 1 and then 2.
    """

    config_id: str
    anchors: Tuple[complex, ...]
    formulation: str = ""
    symmetric: bool = False
    topology: Optional[int] = None

    def __post_init__(self):
        if self.config_id not in CONFIG_IDS:
            raise ValueError(f"unknown configuration {self.config_id!r}; expected one of {CONFIG_IDS}")
        anchors = tuple(complex(a) for a in self.anchors)
        object.__setattr__(self, "anchors", anchors)
        outer = self.config_id.startswith("outer")
        form = self.formulation or ("outer" if outer else "inner")
        if form != ("outer" if outer else "inner"):
            raise ValueError(f"{self.config_id} is an {'outer' if outer else 'inner'} configuration")
        object.__setattr__(self, "formulation", form)
        expected = {"three_point": 2, "six_sym_1": 5, "six_sym_2": 5, "outer_two": 2,
                    "outer_three_sym": 3, "outer_six_sym": 6}[self.config_id]
        if len(anchors) != expected:
            raise ValueError(f"{self.config_id} needs {expected} anchors, got {len(anchors)}")
        if not all(np.isfinite(a.real) and np.isfinite(a.imag) for a in anchors):
            raise ValueError("anchors must be finite")
        for i in range(len(anchors)):
            for j in range(i):
                if _close(anchors[i], anchors[j], 1e-12):
                    raise ValueError("anchors must be distinct")
        if form == "inner" and any(abs(a) < 1e-300 for a in anchors):
            raise ValueError("interior anchors must differ from the origin")
        sym = self.config_id in ("six_sym_1", "six_sym_2", "outer_three_sym", "outer_six_sym")
        if sym:
            self._check_symmetry(anchors)
            object.__setattr__(self, "symmetric", True)
        elif self.symmetric and not _closed_under_conjugation(anchors):
            raise ValueError("a symmetric problem needs anchors closed under conjugation")
        topo = self.topology
        if self.config_id in ("six_sym_1", "six_sym_2"):
            topo = int(self.config_id[-1])
        if topo not in (None, 1, 2):
            raise ValueError("topology is 1, 2 or None")
        object.__setattr__(self, "topology", topo)

    def _check_symmetry(self, a):
        cid = self.config_id
        if cid in ("six_sym_1", "six_sym_2"):
            ok = _is_real(a[2]) and _close(a[3], a[1].conjugate()) and _close(a[4], a[0].conjugate())
            ok = ok and not _is_real(a[0]) and not _is_real(a[1])
        elif cid == "outer_three_sym":
            ok = _is_real(a[0]) and _close(a[2], a[1].conjugate()) and not _is_real(a[1])
        else:
            ok = (_is_real(a[0]) and _is_real(a[1]) and _close(a[4], a[3].conjugate())
                  and _close(a[5], a[2].conjugate()) and not _is_real(a[2]) and not _is_real(a[3]))
        if not ok:
            raise ValueError(f"anchors do not have the conjugation-symmetric layout of {cid}")

    @property
    def inner_points(self) -> Tuple[complex, ...]:
        """Finite anchors of the interior problem (after inversion if exterior)."""
        return self.inverted()[0].anchors if self.formulation == "outer" else self.anchors

    @property
    def center(self) -> complex:
        """Anchor used as inversion centre (0 for interior problems)."""
        return self.anchors[0] if self.formulation == "outer" else 0j

    def inverted(self) -> Tuple["PTProblem", complex]:
        """Interior problem obtained by ``z -> 1/(z - p0)`` and the centre ``p0``."""
        if self.formulation == "inner":
            return self, 0j
        p0 = self.anchors[0]
        inv = [1.0 / (p - p0) for p in self.anchors[1:]]
        if self.config_id == "outer_two":
            return _InnerOnePoint(inv), p0
        if self.config_id == "outer_three_sym":
            return _InnerSymThree([inv[0], inv[0].conjugate()]), p0
        p3, a1, a2 = inv[:3]
        cid = "six_sym_2" if self.topology == 2 else "six_sym_1"
        return PTProblem(cid, (a1, a2, complex(p3.real, 0.0), a2.conjugate(), a1.conjugate())), p0

    def scaled(self, s: complex, c: complex = 0j) -> "PTProblem":
        return replace(self, anchors=tuple(s * a + c for a in self.anchors))

    def conjugate(self) -> "PTProblem":
        return replace(self, anchors=tuple(a.conjugate() for a in self.anchors))


def _closed_under_conjugation(points) -> bool:
    return all(any(_close(p.conjugate(), q) for q in points) for p in points)


class _InnerOnePoint:
    """Interior companion of the two-point exterior problem (one finite anchor)."""

    config_id = "one_point"
    formulation = "inner"
    symmetric = False
    topology = None

    def __init__(self, anchors):
        self.anchors = tuple(complex(a) for a in anchors)

    @property
    def inner_points(self):
        return self.anchors


class _InnerSymThree(_InnerOnePoint):
    """Interior companion of the symmetric three-point exterior problem."""

    config_id = "three_point_sym"
    symmetric = True


@dataclass
class PTSolution:
    """Solved branch points, leading coefficient and boundary angles.

    ``lead`` is ``f'(0)`` for interior problems and the capacity for
    exterior ones.  ``b_points`` are the distinct branch points with their
    orders in ``multiplicities``.  ``angles`` are angles on the unit circle of
    the solved map (the exterior map ``g`` with ``g'(infinity) > 0`` for
    exterior problems).
    """

    config_id: str
    anchors: Tuple[complex, ...]
    b_points: List[complex]
    multiplicities: List[int]
    lead: complex
    angles: Dict[str, float]
    residual_norm: float
    mode: str = "harmonic"
    formulation: str = "inner"
    tolerance: float = 1e-12
    topology: Optional[int] = None
    alpha_anchor: Dict[str, int] = field(default_factory=dict)
    companion: Optional["PTSolution"] = None
    center: complex = 0j
    report: Optional[SolveReport] = field(default=None, repr=False)

    @property
    def b_roots(self) -> List[complex]:
        out = []
        for b, m in zip(self.b_points, self.multiplicities):
            out.extend([b] * m)
        return out

    @property
    def capacity(self) -> float:
        return float(abs(self.lead)) if self.formulation == "outer" else 1.0 / abs(self.lead)

    @property
    def C(self) -> complex:
        """The constant of the interior equation (derived, never stored)."""
        if self.formulation == "outer":
            return self.companion.C
        return inner_constant(self.anchors, self.b_roots)


# --------------------------------------------------------------------------
# configuration shapes


class _Shape:
    """Unknown layout, boundary word and residual equations of an interior shape."""

    name = ""
    word: Tuple[str, ...] = ()
    n_unknowns = 0

    def unpack(self, x):
        raise NotImplementedError

    def pack(self, lead, b_points, ang):
        raise NotImplementedError

    def equations(self, f, ang) -> List[float]:
        raise NotImplementedError

    # period stage, in the coordinate w = 1/z where the leaf infinity sits at 0
    def period_seed(self, P) -> np.ndarray:
        return np.zeros(0)

    def period_b(self, y):
        return [], []

    def period_pairs(self, P, B):
        return []

    def edges(self, P, B):
        """(name, p, q, weight); weight counts the copies under symmetry."""
        raise NotImplementedError

    def angle_candidates(self, L) -> List[Dict[str, float]]:
        raise NotImplementedError

    def full_angles(self, ang: Dict[str, float]) -> Dict[str, float]:
        return ang


def _pair(f, g1, g2):
    d = f(g1) - f(g2)
    return [d.real, d.imag]


class _OnePoint(_Shape):
    name = "one_point"
    word = ("alpha1",)
    n_unknowns = 2

    def unpack(self, x):
        return complex(x[0], x[1]), [], [], {"alpha1": math.pi}

    def pack(self, lead, b_points, ang):
        return np.array([lead.real, lead.imag])

    def equations(self, f, ang):
        return _pair(f, 0.5 * math.pi, 1.5 * math.pi)

    def edges(self, P, B):
        return [("L0", 0j, P["a1"], 1)]

    def angle_candidates(self, L):
        return [{"alpha1": L["L0"]}]


class _ThreePoint(_Shape):
    name = "three_point"
    word = ("beta1", "alpha1", "beta2", "alpha2", "beta3")
    n_unknowns = 6

    def unpack(self, x):
        lead = complex(x[0], x[1])
        b = complex(x[2], x[3])
        b1, b2 = float(x[4]), float(x[5])
        return lead, [b], [1], self.full_angles({"beta1": b1, "beta2": b2})

    def full_angles(self, ang):
        b1, b2 = ang["beta1"], ang["beta2"]
        b3 = TWO_PI - b1
        return {"beta1": b1, "alpha1": 0.5 * (b1 + b2), "beta2": b2,
                "alpha2": 0.5 * (b2 + b3), "beta3": b3}

    def pack(self, lead, b_points, ang):
        b = b_points[0]
        return np.array([lead.real, lead.imag, b.real, b.imag, ang["beta1"], ang["beta2"]])

    def equations(self, f, a):
        return (_pair(f, 0.5 * a["beta1"], TWO_PI - 0.5 * a["beta1"])
                + _pair(f, 0.5 * (a["alpha1"] + a["beta1"]), 0.5 * (a["alpha1"] + a["beta2"]))
                + _pair(f, 0.5 * (a["alpha2"] + a["beta2"]), 0.5 * (a["alpha2"] + a["beta3"])))

    def period_seed(self, P):
        c = (P["a1"] + P["a2"]) / 3.0
        return np.array([c.real, c.imag])

    def period_b(self, y):
        return [complex(y[0], y[1])], [1]

    def period_pairs(self, P, B):
        return [(P["a1"], B[0]), (P["a2"], B[0])]

    def edges(self, P, B):
        return [("L0", 0j, B[0], 1), ("L1", P["a1"], B[0], 1), ("L2", P["a2"], B[0], 1)]

    def angle_candidates(self, L):
        b1 = L["L0"]
        return [self.full_angles({"beta1": b1, "beta2": b1 + 2 * L["L1"]}),
                self.full_angles({"beta1": b1, "beta2": b1 + 2 * L["L2"]})]


class _ThreePointSym(_Shape):
    name = "three_point_sym"
    word = ("beta1", "alpha1", "beta2", "alpha2", "beta3")
    n_unknowns = 3

    def unpack(self, x):
        return complex(x[0]), [complex(x[1])], [1], self.full_angles({"beta1": float(x[2])})

    def full_angles(self, ang):
        b1 = ang["beta1"]
        a1 = 0.5 * (b1 + math.pi)
        return {"beta1": b1, "alpha1": a1, "beta2": math.pi, "alpha2": TWO_PI - a1, "beta3": TWO_PI - b1}

    def pack(self, lead, b_points, ang):
        return np.array([lead.real, b_points[0].real, ang["beta1"]])

    def equations(self, f, a):
        return ([f(0.5 * a["beta1"]).imag]
                + _pair(f, 0.5 * (a["alpha1"] + a["beta1"]), 0.5 * (a["alpha1"] + a["beta2"])))

    def period_seed(self, P):
        return np.array([2.0 * P["a1"].real / 3.0])

    def period_b(self, y):
        return [complex(y[0])], [1]

    def period_pairs(self, P, B):
        return [(P["a1"], B[0])]

    def edges(self, P, B):
        return [("L0", 0j, B[0], 1), ("L1", P["a1"], B[0], 2)]

    def angle_candidates(self, L):
        return [self.full_angles({"beta1": L["L0"]})]


class _SixSym1(_Shape):
    """b1 joins infinity, a1, a5 and b2; b2 joins a2, a3 and a4."""

    name = "six_sym_1"
    word = ("beta1_1", "alpha1", "beta1_2", "beta2_1", "alpha2", "beta2_2", "alpha3",
            "beta2_3", "alpha4", "beta2_4", "beta1_3", "alpha5", "beta1_4")
    n_unknowns = 7

    def unpack(self, x):
        lead = complex(x[0])
        ang = dict(zip(("beta1_1", "beta1_2", "beta2_1", "beta2_2"), map(float, x[3:7])))
        return lead, [complex(x[1]), complex(x[2])], [2, 2], self.full_angles(ang)

    def full_angles(self, ang):
        a = dict(ang)
        a["alpha1"] = 0.5 * (a["beta1_1"] + a["beta1_2"])
        a["alpha2"] = 0.5 * (a["beta2_1"] + a["beta2_2"])
        a["alpha3"] = math.pi
        a["beta2_3"] = TWO_PI - a["beta2_2"]
        a["beta2_4"] = TWO_PI - a["beta2_1"]
        a["beta1_3"] = TWO_PI - a["beta1_2"]
        a["beta1_4"] = TWO_PI - a["beta1_1"]
        a["alpha4"] = TWO_PI - a["alpha2"]
        a["alpha5"] = TWO_PI - a["alpha1"]
        return a

    def pack(self, lead, b_points, ang):
        return np.array([lead.real, b_points[0].real, b_points[1].real, ang["beta1_1"],
                         ang["beta1_2"], ang["beta2_1"], ang["beta2_2"]])

    def equations(self, f, a):
        return ([f(0.5 * a["beta1_1"]).imag]
                + _pair(f, 0.5 * (a["alpha1"] + a["beta1_1"]), 0.5 * (a["alpha1"] + a["beta1_2"]))
                + [f(0.5 * (a["beta1_2"] + a["beta2_1"])).imag]
                + _pair(f, 0.5 * (a["alpha2"] + a["beta2_1"]), 0.5 * (a["alpha2"] + a["beta2_2"]))
                + [f(0.5 * (a["alpha3"] + a["beta2_2"])).imag])

    def period_seed(self, P):
        return np.array([P["a1"].real, P["a2"].real])

    def period_b(self, y):
        return [complex(y[0]), complex(y[1])], [2, 2]

    def period_pairs(self, P, B):
        return [(P["a1"], B[0]), (P["a2"], B[1])]

    def edges(self, P, B):
        return [("L0", 0j, B[0], 1), ("L1", P["a1"], B[0], 2), ("Lm", B[0], B[1], 1),
                ("L2", P["a2"], B[1], 2), ("L3", P["a3"], B[1], 1)]

    def angle_candidates(self, L):
        b11 = L["L0"]
        b12 = b11 + 2 * L["L1"]
        b21 = b12 + L["Lm"]
        b22 = b21 + 2 * L["L2"]
        return [self.full_angles({"beta1_1": b11, "beta1_2": b12, "beta2_1": b21, "beta2_2": b22})]


class _SixSym2(_Shape):
    """b1 joins infinity, a3, b2 and conj(b2); b2 joins a1 and a2."""

    name = "six_sym_2"
    word = ("beta1_1", "beta2_1", "alpha1", "beta2_2", "alpha2", "beta2_3", "beta1_2", "alpha3",
            "beta1_3", "beta3_1", "alpha4", "beta3_2", "alpha5", "beta3_3", "beta1_4")
    n_unknowns = 8

    def unpack(self, x):
        lead = complex(x[0])
        b2 = complex(x[2], x[3])
        ang = dict(zip(("beta1_1", "beta2_1", "beta2_2", "beta2_3"), map(float, x[4:8])))
        return lead, [complex(x[1]), b2, b2.conjugate()], [2, 1, 1], self.full_angles(ang)

    def full_angles(self, ang):
        a = dict(ang)
        a["beta1_2"] = a["beta2_1"] - a["beta1_1"] + a["beta2_3"]
        a["alpha1"] = 0.5 * (a["beta2_1"] + a["beta2_2"])
        a["alpha2"] = 0.5 * (a["beta2_2"] + a["beta2_3"])
        a["alpha3"] = math.pi
        a["beta1_3"] = TWO_PI - a["beta1_2"]
        a["beta1_4"] = TWO_PI - a["beta1_1"]
        for i in (1, 2, 3):
            a[f"beta3_{i}"] = TWO_PI - a[f"beta2_{4 - i}"]
        a["alpha4"] = TWO_PI - a["alpha2"]
        a["alpha5"] = TWO_PI - a["alpha1"]
        return a

    def pack(self, lead, b_points, ang):
        b2 = b_points[1]
        return np.array([lead.real, b_points[0].real, b2.real, b2.imag, ang["beta1_1"],
                         ang["beta2_1"], ang["beta2_2"], ang["beta2_3"]])

    def equations(self, f, a):
        # the fourth group is the printed condition Im f(e^{i(alpha3 + beta2_3)/2}) = 0,
        # a point of the a3 edge only when that edge is longer than the b1-b2 edge
        return ([f(0.5 * a["beta1_1"]).imag]
                + _pair(f, 0.5 * (a["alpha1"] + a["beta2_1"]), 0.5 * (a["alpha1"] + a["beta2_2"]))
                + _pair(f, 0.5 * (a["alpha2"] + a["beta2_2"]), 0.5 * (a["alpha2"] + a["beta2_3"]))
                + [f(0.5 * (a["alpha3"] + a["beta2_3"])).imag]
                + _pair(f, 0.5 * (a["beta1_1"] + a["beta2_1"]), 0.5 * (a["beta2_3"] + a["beta1_2"])))

    def period_seed(self, P):
        m = 0.5 * (P["a1"] + P["a2"])
        return np.array([m.real, m.real, 0.5 * m.imag])

    def period_b(self, y):
        b2 = complex(y[1], y[2])
        return [complex(y[0]), b2, b2.conjugate()], [2, 1, 1]

    def period_pairs(self, P, B):
        return [(P["a1"], B[1]), (P["a2"], B[1]), (B[0], B[1])]

    def edges(self, P, B):
        return [("L0", 0j, B[0], 1), ("Lm", B[0], B[1], 2), ("L1", P["a1"], B[1], 2),
                ("L2", P["a2"], B[1], 2), ("L3", P["a3"], B[0], 1)]

    def angle_candidates(self, L):
        b11 = L["L0"]
        b21 = b11 + L["Lm"]
        b22 = b21 + 2 * L["L1"]
        b23 = b22 + 2 * L["L2"]
        return [self.full_angles({"beta1_1": b11, "beta2_1": b21, "beta2_2": b22, "beta2_3": b23})]


SHAPES = {s.name: s for s in (_OnePoint(), _ThreePoint(), _ThreePointSym(), _SixSym1(), _SixSym2())}


def _shape_of(problem) -> _Shape:
    return SHAPES[problem.config_id]


# --------------------------------------------------------------------------
# residual systems


def _evaluator(points, lead, b_roots, order) -> Callable[[float], complex]:
    C = inner_constant(points, b_roots)

    def f(gamma):
        return ray_inner(points, b_roots, lead, gamma % TWO_PI, order=order, C=C).value
    return f


def harmonic_residuals(problem, x, *, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Harmonic-symmetry residuals of an interior problem at the unknown vector ``x``."""
    shape = _shape_of(problem)
    x = np.asarray(x, dtype=float)
    if x.size != shape.n_unknowns:
        raise ValueError(f"{shape.name} has {shape.n_unknowns} unknowns, got {x.size}")
    lead, bp, mult, ang = shape.unpack(x)
    roots = [b for b, m in zip(bp, mult) for _ in range(m)]
    f = _evaluator(problem.inner_points, lead, roots, order)
    return np.array(shape.equations(f, ang), dtype=float)


def residuals_3pt(problem, x, *, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Six residuals of the three-point system; ``x = (Re f'(0), Im f'(0), Re b, Im b, beta1, beta2)``."""
    if problem.config_id != "three_point":
        raise ValueError("residuals_3pt needs a three_point problem")
    return harmonic_residuals(problem, x, order=order)


def residuals_6pt_sym(problem, config: int, x, *, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Residuals of the symmetric six-point systems (7 for topology 1, 8 for topology 2)."""
    if config not in (1, 2):
        raise ValueError("config is 1 or 2")
    if problem.config_id not in ("six_sym_1", "six_sym_2"):
        raise ValueError("residuals_6pt_sym needs a six_sym problem")
    if problem.topology != config:
        problem = replace(problem, config_id=f"six_sym_{config}", topology=config)
    return harmonic_residuals(problem, x, order=order)


def leaf_angle(problem, b1: float, b2: float) -> float:
    """Angle ``beta1_1`` of the topology-1 continuum with real branch points b1, b2."""
    qd = _outer_qd(problem.inner_points, [1.0 / b1] * 2 + [1.0 / b2] * 2)
    return edge_length(qd, 0j, 1.0 / b1)


def residuals_critical_orbit(problem, x, *, min_leaf_angle: float = CRITICAL_ORBIT_MIN_ANGLE,
                             order: int = DEFAULT_ORDER, step: float = 1e-3) -> np.ndarray:
    """Critical-orbit residuals for topology 1, ``x = (f'(0), b1, b2)`` real.

    The trajectories from a1 and from b1 (the arc pointing at a1) are traced
    down to the level ``Im a1 / 2`` and their real parts compared; likewise
    for a2 and b2.  The third residual is ``Im f(e^{0.1 i})``, which vanishes
    only while ``e^{0.1 i}`` lies on the arc mapped to the leaf edge; the
    guard demands ``beta1_1 >= min_leaf_angle``.
    """
    if problem.config_id != "six_sym_1":
        raise ValueError("the critical-orbit mode is defined for topology 1")
    lead, b1, b2 = (float(v) for v in x)
    theta = leaf_angle(problem, b1, b2)
    if theta < min_leaf_angle:
        raise ModeGuardError(
            f"leaf arc {theta:.3g} is shorter than {min_leaf_angle:g}: the anchors are too close to "
            "the leaf for the critical-orbit residuals")
    a = problem.inner_points
    roots = [b1, b1, b2, b2]
    qd = QuadraticDifferential.inner(a, roots, inner_constant(a, roots))
    out = []
    for pole, zero in ((a[0], b1), (a[1], b2)):
        level = 0.5 * pole.imag
        stop = Stop(im_level=level)
        t_pole = trace_trajectory(None, None, pole, stop, qd=qd, step=step)
        t_zero = trace_trajectory(None, None, complex(zero), stop, toward=pole, qd=qd, step=step)
        if t_pole.stop_reason != "im_threshold" or t_zero.stop_reason != "im_threshold":
            raise NoConvergenceError("critical orbit missed the matching level")
        out.append(t_pole.points[-1].real - t_zero.points[-1].real)
    f = _evaluator(a, lead, roots, order)
    out.append(f(CRITICAL_ORBIT_ANGLE).imag)
    return np.array(out)


# --------------------------------------------------------------------------
# period stage


def _outer_qd(inner_points, b_outer) -> QuadraticDifferential:
    pts = [0j] + [1.0 / a for a in inner_points]
    return QuadraticDifferential.outer(pts, b_outer)


def _labels(inner_points):
    return {f"a{k + 1}": 1.0 / a for k, a in enumerate(inner_points)}


@dataclass
class _Seed:
    lead: complex
    b_inner: List[complex]
    mult: List[int]
    candidates: List[Dict[str, float]]
    qd: QuadraticDifferential
    period_norm: float
    length_sum: float
    b_outer: List[complex]


def period_stage(shape: _Shape, inner_points, y0=None, tol: float = 1e-13) -> _Seed:
    """Branch points from the period conditions, then lead and angles."""
    P = _labels(inner_points)

    def roots_of(y):
        bp, mult = shape.period_b(y)
        return bp, mult, [b for b, m in zip(bp, mult) for _ in range(m)]

    def res(y):
        bp, _, roots = roots_of(y)
        return connection_residuals(_outer_qd(inner_points, roots), shape.period_pairs(P, bp))

    y = shape.period_seed(P) if y0 is None else np.asarray(y0, dtype=float)
    norm = 0.0
    if y.size:
        rep = solve_system(res, y, tol, raise_on_failure=False, max_iter=100)
        y, norm = rep.root, rep.residual_norm
        if not rep.converged and norm > 1e-10:
            raise StagnationError(f"period conditions stalled at {norm:.3e}", rep)
    bp, mult, roots = roots_of(y)
    qd = _outer_qd(inner_points, roots)
    lead = 1.0 / robin_lead(qd, 0j)
    L = {}
    total = 0.0
    for name, p, q, w in shape.edges(P, bp):
        L[name] = edge_length(qd, p, q)
        total += 2 * w * L[name]
    b_inner = [1.0 / b for b in bp]
    if isinstance(shape, (_ThreePointSym, _SixSym1)):
        b_inner = [complex(b.real) for b in b_inner]
    return _Seed(complex(lead), b_inner, mult, shape.angle_candidates(L), qd, norm, total, bp)


def _check_word(shape: _Shape, ang: Dict[str, float], cid: str):
    vals = [ang[k] for k in shape.word]
    if not (0.0 < vals[0] and vals[-1] < TWO_PI and all(u < v for u, v in zip(vals, vals[1:]))):
        raise TopologyMismatchError(
            f"angles of {cid} collapse or reorder; try the other configuration")


# --------------------------------------------------------------------------
# driver


def solve_pt(problem: PTProblem, seed="auto", *, mode: str = "auto", tol: float = 1e-12,
             order: int = DEFAULT_ORDER, fallback: bool = True, verify: bool = True) -> PTSolution:
    """Solve a configuration.

    ``seed`` is ``"auto"`` (period stage), a previous :class:`PTSolution` of a
    nearby problem, or an unknown vector of the interior system.  ``mode``
    selects the final system: ``harmonic`` (ray residuals), ``periods``
    (period conditions only), ``critical_orbit`` (topology 1 only) or
    ``auto`` (periods for the exterior six-point problem, harmonic
    otherwise).  With ``fallback`` a topology-1 six-point problem that fails
    the topology checks is retried as topology 2.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    if problem.config_id in ("six_sym_1", "outer_six_sym") and problem.topology in (None, 1) and fallback:
        try:
            return _solve(replace(problem, topology=1) if problem.config_id == "outer_six_sym" else problem,
                          seed, mode, tol, order, verify)
        except (TopologyMismatchError, StagnationError) as exc:
            log.info("topology 1 rejected (%s); trying topology 2", exc)
            if problem.config_id == "outer_six_sym":
                other = replace(problem, topology=2)
            else:
                other = PTProblem("six_sym_2", problem.anchors)
            return _solve(other, "auto" if not isinstance(seed, PTSolution) else seed, mode, tol, order, verify)
    return _solve(problem, seed, mode, tol, order, verify)


def _solve(problem, seed, mode, tol, order, verify):
    inner, center = problem.inverted()
    shape = _shape_of(inner)
    if mode == "auto":
        mode = "periods" if problem.config_id == "outer_six_sym" else "harmonic"
    if mode == "critical_orbit" and shape.name != "six_sym_1":
        raise ValueError("the critical-orbit mode is defined for topology 1")

    x0 = None
    y0 = None
    if isinstance(seed, PTSolution):
        base = seed.companion if seed.companion is not None else seed
        if base.config_id != shape.name:
            seed = "auto"
        else:
            x0 = shape.pack(complex(base.lead), list(base.b_points), base.angles)
            y0 = _period_vector(shape, [1.0 / b for b in base.b_points])
    elif not (isinstance(seed, str) and seed == "auto"):
        x0 = np.asarray(seed, dtype=float)
        if x0.size != shape.n_unknowns:
            raise ValueError(f"seed for {shape.name} needs {shape.n_unknowns} entries")
        lead, bp, _, _ = shape.unpack(x0)
        y0 = _period_vector(shape, [1.0 / b for b in bp])

    pts = inner.inner_points
    if mode in ("periods", "critical_orbit") or x0 is None:
        try:
            sd = period_stage(shape, pts, y0, tol=min(tol, 1e-13))
        except StagnationError as exc:
            if shape.name not in ("six_sym_1", "six_sym_2"):
                raise
            other = 2 if shape.name == "six_sym_1" else 1
            raise TopologyMismatchError(
                f"the period conditions of {shape.name} have no solution near the seed ({exc}); "
                f"try topology {other}") from exc
        if abs(sd.length_sum - TWO_PI) > LENGTH_SUM_TOL:
            raise TopologyMismatchError(
                f"edge lengths of {shape.name} add up to {sd.length_sum:.12g}, not 2 pi; "
                "the continuum has another topology")
    if mode == "periods":
        ang = _pick_candidate(shape, pts, sd, order) if len(sd.candidates) > 1 else sd.candidates[0]
        inner_sol = PTSolution(shape.name, tuple(pts), list(sd.b_inner), list(sd.mult), sd.lead, ang,
                               sd.period_norm, "periods", "inner", tol, getattr(inner, "topology", None))
    elif mode == "critical_orbit":
        inner_sol = _solve_critical_orbit(inner, shape, sd, tol, order)
    else:
        if x0 is None:
            x0 = shape.pack(sd.lead, sd.b_inner, _pick_candidate(shape, pts, sd, order))
        inner_sol = _solve_harmonic(inner, shape, x0, tol, order, verify)
    _check_word(shape, inner_sol.angles, shape.name)
    inner_sol.alpha_anchor = _alpha_labels(shape, inner_sol)
    if problem.formulation == "inner":
        inner_sol.config_id = problem.config_id if problem.config_id not in ("six_sym_1", "six_sym_2") \
            else shape.name
        return inner_sol
    return _to_outer(problem, inner_sol, center)


def _period_vector(shape, b_outer):
    if isinstance(shape, _ThreePoint):
        return np.array([b_outer[0].real, b_outer[0].imag])
    if isinstance(shape, _ThreePointSym):
        return np.array([b_outer[0].real])
    if isinstance(shape, _SixSym1):
        return np.array([b_outer[0].real, b_outer[1].real])
    if isinstance(shape, _SixSym2):
        return np.array([b_outer[0].real, b_outer[1].real, b_outer[1].imag])
    return np.zeros(0)


def _pick_candidate(shape, pts, sd, order):
    if len(sd.candidates) == 1:
        return sd.candidates[0]
    best, best_norm = None, math.inf
    for ang in sd.candidates:
        x = shape.pack(sd.lead, sd.b_inner, ang)
        try:
            r = harmonic_residuals(_Bare(shape.name, pts), x, order=order)
        except PTError:
            continue
        n = float(np.max(np.abs(r)))
        if n < best_norm:
            best, best_norm = ang, n
    return best if best is not None else sd.candidates[0]


class _Bare:
    def __init__(self, cid, pts):
        self.config_id = cid
        self.inner_points = tuple(pts)


def _solve_harmonic(inner, shape, x0, tol, order, verify):
    pts = inner.inner_points
    bare = _Bare(shape.name, pts)
    rep = solve_system(lambda v: harmonic_residuals(bare, v, order=order), x0, tol)
    lead, bp, mult, ang = shape.unpack(rep.root)
    norm = rep.residual_norm
    if verify:
        check = float(np.max(np.abs(harmonic_residuals(bare, rep.root, order=2 * order))))
        if check > 10 * tol:
            raise NoConvergenceError(
                f"verification at order {2 * order} gave residual {check:.3e} > {10 * tol:.1e}")
        norm = max(norm, check)
    return PTSolution(shape.name, tuple(pts), bp, mult, lead, ang, norm, "harmonic", "inner", tol,
                      getattr(inner, "topology", None), report=rep)


def _solve_critical_orbit(inner, shape, sd, tol, order):
    x0 = np.array([sd.lead.real, sd.b_inner[0].real, sd.b_inner[1].real])
    rep = solve_system(lambda v: residuals_critical_orbit(inner, v, order=order), x0, tol)
    lead, b1, b2 = rep.root
    # angles from the edge lengths of the orbit solution
    sd2 = period_stage(shape, inner.inner_points, np.array([1.0 / b1, 1.0 / b2]), tol=1e300)
    return PTSolution(shape.name, tuple(inner.inner_points), [complex(b1), complex(b2)], [2, 2],
                      complex(lead), sd2.candidates[0], rep.residual_norm, "critical_orbit", "inner",
                      tol, 1, report=rep)


def _alpha_labels(shape, sol) -> Dict[str, int]:
    """Which anchor each alpha angle is mapped to (nearest by a ray evaluation)."""
    pts = sol.anchors
    out = {}
    for name in shape.word:
        if not name.startswith("alpha"):
            continue
        try:
            v = ray_inner(pts, sol.b_roots, sol.lead, sol.angles[name]).value
        except PTError:
            continue
        out[name] = int(np.argmin([abs(v - a) for a in pts]))
    return out


def _wrap(theta: float) -> float:
    theta %= TWO_PI
    return 0.0 if TWO_PI - theta < 1e-13 else theta


def _to_outer(problem, inner_sol, center) -> PTSolution:
    lam = complex(inner_sol.lead)
    phase = cmath.phase(lam)
    b_out = [center + 1.0 / b for b in inner_sol.b_points]
    if problem.symmetric:
        b_out = [complex(b.real, 0.0) if abs(b.imag) < 1e-13 * max(1.0, abs(b)) else b for b in b_out]
    angles = {k: _wrap(-v - phase) for k, v in inner_sol.angles.items()}
    # anchor 0 of the exterior problem is the inversion centre
    index = [2, 3, 1, 4, 5] if problem.config_id == "outer_six_sym" else [1, 2]
    labels = {name: index[k] for name, k in inner_sol.alpha_anchor.items()}
    return PTSolution(problem.config_id, problem.anchors, b_out, list(inner_sol.multiplicities),
                      complex(1.0 / abs(lam)), angles, inner_sol.residual_norm, inner_sol.mode,
                      "outer", inner_sol.tolerance, problem.topology or inner_sol.topology, labels,
                      inner_sol, center, inner_sol.report)


def leaf_angle_outer(solution: PTSolution) -> float:
    """Angle of the exterior map at which the inversion centre (a leaf) is reached."""
    return (-cmath.phase(complex(solution.companion.lead))) % TWO_PI


def outer_value(solution: PTSolution, gamma: float, t_end: float = 1.0, **options) -> complex:
    """``g(e^{i gamma}/t_end)`` for a solved exterior problem."""
    return ray_outer(solution.anchors, solution.b_roots, solution.capacity, gamma, t_end, **options).value


def verify_topology(solution: PTSolution, step: float = 1e-3) -> bool:
    """Trace every leaf trajectory and confirm it ends at the expected branch point."""
    base = solution.companion if solution.companion is not None else solution
    shape = SHAPES[base.config_id]
    pts = base.anchors
    b_out = [1.0 / b for b in base.b_points]
    roots = [b for b, m in zip(b_out, base.multiplicities) for _ in range(m)]
    qd = _outer_qd(pts, roots)
    P = _labels(pts)
    for name, p, q, _ in shape.edges(P, b_out):
        ends = [p, q]
        start = next((e for e in ends if qd.order_at(e, 1e-9) == -1), None)
        if start is None:
            continue
        target = q if start == p else p
        others = [c for c in qd.singular_points if abs(c - start) > 1e-12]
        try:
            tr = trace_trajectory(None, None, start, Stop(meet=others, meet_tol=1e-7), qd=qd, step=step)
        except PTError:
            return False
        if tr.end_anchor is None or abs(tr.end_anchor - target) > 1e-9 * max(1.0, abs(target)):
            return False
    return True


def solution_residuals(solution: PTSolution, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Harmonic residuals re-evaluated at a stored solution."""
    base = solution.companion if solution.companion is not None else solution
    shape = SHAPES[base.config_id if base.config_id in SHAPES else solution.config_id]
    x = shape.pack(complex(base.lead), list(base.b_points), base.angles)
    return harmonic_residuals(_Bare(shape.name, base.anchors), x, order=order)


def continuum_arcs(solution: PTSolution, step: float = 1e-3) -> List[np.ndarray]:
    """Polylines of every edge of the extremal continuum, in the problem's plane.

    Edges are traced in the coordinate ``w = 1/z`` of the interior problem,
    where the leaf of the solution sits at 0.  For exterior problems the
    plane point is ``center + w``; for interior ones it is ``1/w``, and the
    edge reaching infinity is cut where ``|w|`` falls below ``1e-9``.
    """
    base = solution.companion if solution.companion is not None else solution
    shape = SHAPES[base.config_id]
    pts = base.anchors
    b_out = [1.0 / b for b in base.b_points]
    qd = _outer_qd(pts, [b for b, m in zip(b_out, base.multiplicities) for _ in range(m)])
    arcs = []
    for name, p, q, weight in shape.edges(_labels(pts), b_out):
        if qd.order_at(p, 1e-9) == -1:
            start, target = p, q
        elif qd.order_at(q, 1e-9) == -1:
            start, target = q, p
        else:
            start, target = p, q
        tr = trace_trajectory(None, None, start, Stop(meet=[target], meet_tol=1e-7),
                              toward=target, qd=qd, step=step)
        if tr.end_anchor is None:
            raise TracingError(f"edge {name} did not reach its end point")
        w = np.asarray(tr.points)
        copies = [w, np.conj(w)] if weight == 2 else [w]
        for c in copies:
            if solution.formulation == "outer":
                arcs.append(solution.center + c)
            else:
                keep = np.abs(c) > 1e-9
                arcs.append(1.0 / c[keep])
    return arcs


# --------------------------------------------------------------------------
# continuation between problems


def solve_pt_path(problems: Sequence[PTProblem], seed="auto", **options) -> List[PTSolution]:
    """Solve a sequence of nearby problems, seeding each from the previous solution."""
    out: List[PTSolution] = []
    current = seed
    for prob in problems:
        sol = solve_pt(prob, current, **options)
        out.append(sol)
        current = sol
    return out


def continue_anchors(start: PTProblem, target_anchors: Sequence[complex], steps: int = 10,
                     seed="auto", **options) -> List[PTSolution]:
    """Move anchors linearly from ``start`` to ``target_anchors`` with halving on failure.

    Built on :func:`ptcap.solver.continuation` applied to the period
    conditions; the returned list holds the solution at every accepted step.
    """
    a0 = np.array(start.anchors)
    a1 = np.array([complex(a) for a in target_anchors])
    first = solve_pt(start, seed, **options)
    sols = {0.0: first}

    def family(y, t):
        prob = replace(start, anchors=tuple(a0 + t * (a1 - a0)))
        inner, _ = prob.inverted()
        shape = _shape_of(inner)
        bp, mult = shape.period_b(y)
        roots = [b for b, m in zip(bp, mult) for _ in range(m)]
        return connection_residuals(_outer_qd(inner.inner_points, roots),
                                    shape.period_pairs(_labels(inner.inner_points), bp))

    inner0, _ = start.inverted()
    shape0 = _shape_of(inner0)
    base = first.companion if first.companion is not None else first
    y_start = _period_vector(shape0, [1.0 / b for b in base.b_points])
    if y_start.size == 0:
        return [first, solve_pt(replace(start, anchors=tuple(a1)), **options)]
    path = continuation(family, y_start, steps, tol=1e-13, predictor="secant")
    out = [first]
    prev = first
    for rep in path[1:]:
        prob = replace(start, anchors=tuple(a0 + rep.param * (a1 - a0)))
        sol = solve_pt(prob, prev, **options)
        sols[rep.param] = sol
        out.append(sol)
        prev = sol
    return out
