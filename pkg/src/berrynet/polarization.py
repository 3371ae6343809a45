"""Jones calculus, Poincare-sphere geometry, and the rail waveplate programs.

Conventions (all phase signs downstream depend on these, so they are pinned
here once):

* Jones basis ``(h, v)`` with ``|H> = (1, 0)``, ``|V> = (0, 1)``,
  ``|D> = (1, 1)/sqrt2``, ``|A> = (1, -1)/sqrt2``, ``|R> = (1, -i)/sqrt2``,
  ``|L> = (1, i)/sqrt2``.
* A linear retarder of retardance ``delta`` with optic axis at angle ``axis``
  is the symmetric form ``Rot(-axis) @ diag(e^{-i delta/2}, e^{+i delta/2})
  @ Rot(axis)`` with ``Rot`` the real 2x2 rotation.  Half plates have
  ``delta = pi``, quarter plates ``pi/2``; every retarder is in SU(2).
* Stokes map ``s = (|h|^2 - |v|^2, 2 Re(h conj(v)), 2 Im(h conj(v)))`` so
  that R sits at the north pole (0, 0, 1) and L at the south pole.
* Solid angles are signed positive for counterclockwise circulation seen
  from outside the sphere; the geometric phase of a closed loop is -Omega/2.

The three rail presets realize, over the six-plate stack
[quarter, half(alpha), quarter, quarter, half(alpha), quarter]:

* ``rail-top``     -> -i X                       (polarization flip, fixed phase)
* ``rail-middle``  -> -I                         (identity up to a fixed phase)
* ``rail-bottom``  -> -i [[0, e^{-i4a}], [e^{+i4a}, 0]]   (flip + variable phase)

The bottom-rail quarter-plate axes are the unique +-45 degree assignment for
which the traced traversal from |V> visits V, R, P(alpha), L, H, R, P(alpha),
L, H in order; the top/middle assignments are then fixed by their composite
targets and by sharing the bottom rail's fixed off-diagonal phase -pi/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "HALF",
    "QUARTER",
    "JONES_STATES",
    "RetarderSpec",
    "RailProgram",
    "SpherePath",
    "GeometricPhaseReport",
    "DegenerateStepError",
    "DegenerateGeodesicError",
    "jones_vector",
    "stokes_vector",
    "jones_from_stokes",
    "retarder_matrix",
    "waveplate_matrix",
    "rail_composite",
    "trace_path",
    "path_arc_length",
    "pancharatnam_phase",
    "solid_angle",
    "parallel_transport_residual",
    "geodesic_path",
    "lune_vertices",
    "geometric_phase_report",
    "RAIL_PRESETS",
    "RAIL_INPUTS",
    "rail_program",
    "wrap_angle",
]

HALF = "half"
QUARTER = "quarter"

_RETARDANCE = {HALF: math.pi, QUARTER: math.pi / 2.0}

# Minimum |<psi_k|psi_k+1>| below which the discrete phase product is
# meaningless and the caller must refine the discretization.
_OVERLAP_FLOOR = 1e-6


class DegenerateStepError(ValueError):
    """Consecutive path states are (numerically) orthogonal."""


class DegenerateGeodesicError(ValueError):
    """Consecutive polygon vertices are identical or antipodal."""


def jones_vector(h, v) -> np.ndarray:
    """Normalized Jones state (h, v)."""
    state = np.array([h, v], dtype=np.complex128)
    norm = np.linalg.norm(state)
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("Jones vector must be nonzero and finite")
    return state / norm


JONES_STATES = {
    "H": jones_vector(1.0, 0.0),
    "V": jones_vector(0.0, 1.0),
    "D": jones_vector(1.0, 1.0),
    "A": jones_vector(1.0, -1.0),
    "R": jones_vector(1.0, -1.0j),
    "L": jones_vector(1.0, 1.0j),
}


def stokes_vector(state) -> np.ndarray:
    """Unit Stokes 3-vector (s1, s2, s3) of a Jones state."""
    s = np.asarray(state, dtype=np.complex128)
    h, v = s[0], s[1]
    cross = h * np.conj(v)
    out = np.array([abs(h) ** 2 - abs(v) ** 2, 2.0 * cross.real, 2.0 * cross.imag])
    norm = np.linalg.norm(out)
    if norm == 0.0:
        raise ValueError("Stokes vector of the zero state is undefined")
    return out / norm


def jones_from_stokes(point) -> np.ndarray:
    """Canonical Jones representative of a point on the sphere.

    Smooth gauge section except at the V point (-1, 0, 0); the representative
    of H, V, D, A, R, L is the canonical state of that label.
    """
    p = np.asarray(point, dtype=float)
    p = p / np.linalg.norm(p)
    beta = math.acos(min(1.0, max(-1.0, p[0])))
    # snap to the canonical representative near the s1 poles, where the
    # azimuth is pure rounding noise (V is the section's singular point)
    xi = math.atan2(-p[2], p[1]) if math.hypot(p[1], p[2]) > 1e-9 else 0.0
    return np.array(
        [math.cos(beta / 2.0), math.sin(beta / 2.0) * np.exp(1j * xi)],
        dtype=np.complex128,
    )


@dataclass(frozen=True)
class RetarderSpec:
    """One waveplate: kind ("half" or "quarter") plus optic-axis angle.

    ``alpha_linked`` marks the rotatable plates whose axis follows the shared
    sweep angle alpha; for those the ``axis`` field is an offset added to
    alpha (0 for the presets).
    """

    kind: str
    axis: float = 0.0
    alpha_linked: bool = False

    def __post_init__(self):
        if self.kind not in _RETARDANCE:
            raise ValueError(f"unknown retarder kind {self.kind!r}")
        if not math.isfinite(self.axis):
            raise ValueError("retarder axis must be finite")

    @property
    def retardance(self) -> float:
        return _RETARDANCE[self.kind]

    def resolve_axis(self, alpha: float) -> float:
        return self.axis + alpha if self.alpha_linked else self.axis


@dataclass(frozen=True)
class RailProgram:
    """Ordered waveplate sequence for one rail (first plate hit first)."""

    plates: tuple[RetarderSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "plates", tuple(self.plates))


def _rotation(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, s], [-s, c]])


def retarder_matrix(delta: float, axis: float) -> np.ndarray:
    """Jones matrix of a linear retarder (symmetric SU(2) convention)."""
    core = np.diag([np.exp(-0.5j * delta), np.exp(0.5j * delta)])
    return _rotation(-axis) @ core @ _rotation(axis)


def waveplate_matrix(spec: RetarderSpec, alpha: float = 0.0) -> np.ndarray:
    """Jones matrix of a waveplate; alpha resolves alpha-linked axes."""
    return retarder_matrix(spec.retardance, spec.resolve_axis(alpha))


def rail_composite(program: RailProgram, alpha: float) -> np.ndarray:
    """Ordered product of the program's plate matrices (last plate leftmost)."""
    if not program.plates:
        raise ValueError("rail program must contain at least one plate")
    out = np.eye(2, dtype=np.complex128)
    for spec in program.plates:
        out = waveplate_matrix(spec, alpha) @ out
    return out


@dataclass
class SpherePath:
    """Discretized polarization trajectory: Jones states + Stokes images."""

    states: np.ndarray  # (N, 2) complex
    points: np.ndarray  # (N, 3) float

    def __len__(self) -> int:
        return self.states.shape[0]


def trace_path(
    program: RailProgram,
    input_state,
    alpha: float = 0.0,
    steps_per_plate: int = 256,
) -> SpherePath:
    """Trace a state through the program, each plate cut into partial retarders.

    The path holds 1 + len(plates) * steps_per_plate states; consecutive
    states differ by one partial-retarder step, so every sample lies exactly
    on the great-circle arc its plate generates.
    """
    if steps_per_plate < 1:
        raise ValueError("steps_per_plate must be >= 1")
    state = jones_vector(*np.asarray(input_state, dtype=np.complex128))
    states = [state]
    for spec in program.plates:
        step = retarder_matrix(spec.retardance / steps_per_plate, spec.resolve_axis(alpha))
        for _ in range(steps_per_plate):
            state = step @ state
            states.append(state)
    arr = np.array(states)
    points = np.array([stokes_vector(s) for s in arr])
    return SpherePath(states=arr, points=points)


def path_arc_length(path: SpherePath) -> float:
    """Total great-circle arc length of the discretized trajectory."""
    dots = np.sum(path.points[:-1] * path.points[1:], axis=1)
    return float(np.sum(np.arccos(np.clip(dots, -1.0, 1.0))))


def _overlap_chain(states: np.ndarray, close: bool) -> complex:
    prod = 1.0 + 0.0j
    pairs = zip(states[:-1], states[1:])
    for a, b in pairs:
        ov = complex(np.vdot(a, b))
        if abs(ov) <= _OVERLAP_FLOOR:
            raise DegenerateStepError(
                "consecutive path states are orthogonal; refine the discretization"
            )
        prod *= ov
    if close:
        ov = complex(np.vdot(states[-1], states[0]))
        if abs(ov) <= _OVERLAP_FLOOR:
            raise DegenerateStepError(
                "endpoints are orthogonal; the closed-loop phase is undefined"
            )
        prod *= ov
    return prod


def pancharatnam_phase(path, close: bool = False) -> float:
    """Discrete geometric phase arg prod_k <psi_k|psi_k+1> in (-pi, pi].

    With ``close`` the closure overlap <psi_N|psi_0> is appended.  For a
    closed loop discretized along geodesics this converges to -Omega/2 with
    Omega the signed solid angle (octant loop H -> D -> R -> H gives -pi/4).
    """
    states = path.states if isinstance(path, SpherePath) else np.asarray(path)
    if states.shape[0] < 2:
        return 0.0
    return float(np.angle(_overlap_chain(states, close)))


def _depart_direction(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Unit tangent at a along the geodesic toward b."""
    t = b - np.dot(a, b) * a
    norm = np.linalg.norm(t)
    if norm < 1e-12:
        raise DegenerateGeodesicError(
            "consecutive vertices are identical or antipodal; geodesic undefined"
        )
    return t / norm


def solid_angle(vertices) -> float:
    """Signed solid angle of the closed geodesic polygon through ``vertices``.

    Spherical excess via the turning-angle (Gauss-Bonnet) sum: Omega = 2 pi -
    sum of signed exterior angles, wrapped to (-2 pi, 2 pi].  Positive for
    counterclockwise circulation viewed from outside the sphere.  Exact
    reversals (out-and-back spurs) count a turning angle of +pi each, which
    makes retraced paths measure zero.
    """
    pts = np.asarray(vertices, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 3:
        raise ValueError("need at least 3 vertices of shape (n, 3)")
    norms = np.linalg.norm(pts, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise ValueError("vertices must be unit vectors")
    pts = pts / norms[:, None]
    n = pts.shape[0]
    turning = 0.0
    for k in range(n):
        prev_v = pts[(k - 1) % n]
        here = pts[k]
        next_v = pts[(k + 1) % n]
        d_in = -_depart_direction(here, prev_v)
        d_out = _depart_direction(here, next_v)
        s = float(np.dot(here, np.cross(d_in, d_out)))
        c = float(np.dot(d_in, d_out))
        if abs(s) < 1e-12 and c < 0.0:
            turning += math.pi  # pinned sign for exact reversals
        else:
            turning += math.atan2(s, c)
    omega = 2.0 * math.pi - turning
    # principal value: polygons are reported in (-2 pi, 2 pi]
    omega = math.fmod(omega, 4.0 * math.pi)
    if omega > 2.0 * math.pi:
        omega -= 4.0 * math.pi
    elif omega <= -2.0 * math.pi:
        omega += 4.0 * math.pi
    return omega


def parallel_transport_residual(path: SpherePath) -> float:
    """Max per-step transport defect, |Im <psi_k|psi_k+1>| / ||psi_k+1 - psi_k||.

    Zero (to rounding) for parallel-transported evolution; of order one for a
    pure dynamical phase such as a plate acting on its own eigenstate, where
    the state moves in Hilbert space but not on the sphere.
    """
    states = path.states
    if states.shape[0] < 2:
        return 0.0
    worst = 0.0
    for a, b in zip(states[:-1], states[1:]):
        denom = float(np.linalg.norm(b - a))
        if denom < 1e-15:
            continue
        worst = max(worst, abs(complex(np.vdot(a, b)).imag) / denom)
    return worst


def _slerp(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    dot = float(np.clip(np.dot(a, b), -1.0, 1.0))
    ang = math.acos(dot)
    if ang < 1e-12:
        return a
    if math.pi - ang < 1e-9:
        raise DegenerateGeodesicError("antipodal endpoints have no unique geodesic")
    return (math.sin((1.0 - t) * ang) * a + math.sin(t * ang) * b) / math.sin(ang)


def geodesic_path(vertices, steps_per_edge: int = 64, close: bool = True) -> SpherePath:
    """Geodesic polyline through ``vertices`` discretized on the sphere.

    States are taken from the canonical gauge (``jones_from_stokes``).  With
    ``close`` the edge back to the first vertex is included, so the returned
    path ends where it started.
    """
    pts = [np.asarray(v, dtype=float) / np.linalg.norm(v) for v in vertices]
    if close:
        pts = pts + [pts[0]]
    samples = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        for k in range(1, steps_per_edge + 1):
            samples.append(_slerp(a, b, k / steps_per_edge))
    points = np.array(samples)
    states = np.array([jones_from_stokes(p) for p in points])
    return SpherePath(states=states, points=points)


def lune_vertices(width: float) -> np.ndarray:
    """Vertices R, P, L, H of the meridian lune of the given signed width.

    P sits on the equator at longitude ``-width`` from H (toward the A
    state); with that orientation the circulation R -> P -> L -> H -> R has
    signed solid angle +2*width for 0 < width < pi.
    """
    return np.array(
        [
            [0.0, 0.0, 1.0],
            [math.cos(width), -math.sin(width), 0.0],
            [0.0, 0.0, -1.0],
            [1.0, 0.0, 0.0],
        ]
    )


def wrap_angle(phi: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    return float(np.angle(np.exp(1j * phi)))


@dataclass
class GeometricPhaseReport:
    """Geometric-phase summary of one rail traversal at one sweep angle.

    ``pancharatnam`` is the open-path discrete product phase referenced to
    the same rail at alpha = 0 (the canonical-gauge closure handles the
    orthogonal-endpoint rails); ``solid_angle`` is the area of the equivalent
    meridian lune in [0, 4 pi) with -solid_angle/2 matching ``pancharatnam``
    mod 2 pi; ``dynamical_residual`` is the transport defect of the traced
    path.
    """

    pancharatnam: float
    solid_angle: float
    dynamical_residual: float


def _referenced_product_phase(path: SpherePath) -> float:
    """Phase of the open-path overlap product closed onto the canonical gauge."""
    chain = _overlap_chain(path.states, close=False)
    anchor = complex(np.vdot(jones_from_stokes(path.points[-1]), path.states[-1]))
    if abs(anchor) <= _OVERLAP_FLOOR:
        raise DegenerateStepError("final state has no overlap with its gauge anchor")
    return float(np.angle(chain * anchor))


def geometric_phase_report(
    program: RailProgram,
    input_state,
    alpha: float,
    steps_per_plate: int = 256,
) -> GeometricPhaseReport:
    """Trace the rail and report its variable geometric phase and lune area.

    The variable phase is the alpha = 0 referenced product phase, which
    strips the rail's fixed calibration phase; the reported lune reproduces
    that phase as -Omega/2 and is checked through ``solid_angle``.
    """
    path = trace_path(program, input_state, alpha, steps_per_plate)
    residual = parallel_transport_residual(path)
    base = trace_path(program, input_state, 0.0, steps_per_plate)
    dphi = wrap_angle(_referenced_product_phase(path) - _referenced_product_phase(base))
    if abs(dphi) < 1e-12:
        omega = 0.0
    else:
        omega = solid_angle(lune_vertices(-dphi))
        if omega < 0.0:
            omega += 4.0 * math.pi
    return GeometricPhaseReport(
        pancharatnam=dphi, solid_angle=omega, dynamical_residual=residual
    )


def _quarter(sign: int) -> RetarderSpec:
    return RetarderSpec(QUARTER, sign * math.pi / 4.0)


def _alpha_half() -> RetarderSpec:
    return RetarderSpec(HALF, 0.0, alpha_linked=True)


RAIL_PRESETS = {
    "rail-top": RailProgram(
        (_quarter(-1), _alpha_half(), _quarter(+1), _quarter(-1), _alpha_half(), _quarter(-1))
    ),
    "rail-middle": RailProgram(
        (_quarter(+1), _alpha_half(), _quarter(+1), _quarter(-1), _alpha_half(), _quarter(-1))
    ),
    "rail-bottom": RailProgram(
        (_quarter(-1), _alpha_half(), _quarter(+1), _quarter(+1), _alpha_half(), _quarter(+1))
    ),
}

# Canonical input state for each rail: the top rail receives horizontally
# polarized light, the bottom rail vertically polarized light.
RAIL_INPUTS = {
    "rail-top": JONES_STATES["H"],
    "rail-middle": JONES_STATES["H"],
    "rail-bottom": JONES_STATES["V"],
}


def rail_program(name: str) -> RailProgram:
    """Look up a built-in rail preset by its public name."""
    try:
        return RAIL_PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown rail preset {name!r}; choose from {sorted(RAIL_PRESETS)}")
