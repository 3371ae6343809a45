"""Mode circuits, the four-mode complex Hadamard family, the physical
rail-and-polarization layout, and a triangular mesh compiler.

Beamsplitter convention: reflectivity r gives [[sqrt(1-r), i sqrt(r)],
[i sqrt(r), sqrt(1-r)]] (symmetric i-reflection).  Circuit unitaries act as
``out_amplitudes = U @ in_amplitudes`` with U[out, in] ordering.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .linalg import DEFAULT_EPS, ShapeError, is_unitary
from .polarization import RAIL_PRESETS, rail_composite, waveplate_matrix, RetarderSpec, HALF

__all__ = [
    "Beamsplitter",
    "PhaseShift",
    "Swap",
    "CircuitElement",
    "ModeCircuit",
    "MeshPlan",
    "beamsplitter_matrix",
    "circuit_unitary",
    "h4",
    "h4_circuit",
    "is_complex_hadamard",
    "path_count",
    "physical_unitary",
    "theta_prime_of",
    "reck_decompose",
    "recompose",
    "circuit_to_json",
    "circuit_from_json",
]


@dataclass(frozen=True)
class Beamsplitter:
    mode_a: int
    mode_b: int
    reflectivity: float = 0.5


@dataclass(frozen=True)
class PhaseShift:
    mode: int
    phi: float


@dataclass(frozen=True)
class Swap:
    mode_a: int
    mode_b: int


CircuitElement = Union[Beamsplitter, PhaseShift, Swap]


def _check_element(elem: CircuitElement, modes: int) -> None:
    if isinstance(elem, Beamsplitter):
        if not (0 <= elem.mode_a < modes and 0 <= elem.mode_b < modes):
            raise ValueError(f"beamsplitter modes {elem.mode_a},{elem.mode_b} out of range")
        if elem.mode_a == elem.mode_b:
            raise ValueError("beamsplitter modes must be distinct")
        if not (0.0 <= elem.reflectivity <= 1.0):
            raise ValueError(f"reflectivity {elem.reflectivity} outside [0, 1]")
    elif isinstance(elem, PhaseShift):
        if not 0 <= elem.mode < modes:
            raise ValueError(f"phase mode {elem.mode} out of range")
    elif isinstance(elem, Swap):
        if not (0 <= elem.mode_a < modes and 0 <= elem.mode_b < modes):
            raise ValueError(f"swap modes {elem.mode_a},{elem.mode_b} out of range")
        if elem.mode_a == elem.mode_b:
            raise ValueError("swap modes must be distinct")
    else:
        raise TypeError(f"unknown circuit element {elem!r}")


@dataclass(frozen=True)
class ModeCircuit:
    """Ordered two-mode elements over ``modes`` optical modes."""

    modes: int
    elements: tuple[CircuitElement, ...] = ()

    def __post_init__(self):
        if self.modes < 1:
            raise ValueError("circuit needs at least one mode")
        object.__setattr__(self, "elements", tuple(self.elements))
        for elem in self.elements:
            _check_element(elem, self.modes)


def beamsplitter_matrix(reflectivity: float) -> np.ndarray:
    """2x2 beamsplitter unitary for the given reflectivity in [0, 1]."""
    if not (0.0 <= reflectivity <= 1.0):
        raise ValueError(f"reflectivity {reflectivity} outside [0, 1]")
    t = math.sqrt(1.0 - reflectivity)
    r = math.sqrt(reflectivity)
    return np.array([[t, 1j * r], [1j * r, t]])


def _embed_two_mode(block: np.ndarray, a: int, b: int, modes: int) -> np.ndarray:
    out = np.eye(modes, dtype=np.complex128)
    out[a, a] = block[0, 0]
    out[a, b] = block[0, 1]
    out[b, a] = block[1, 0]
    out[b, b] = block[1, 1]
    return out


def _element_unitary(elem: CircuitElement, modes: int) -> np.ndarray:
    if isinstance(elem, Beamsplitter):
        return _embed_two_mode(beamsplitter_matrix(elem.reflectivity), elem.mode_a, elem.mode_b, modes)
    if isinstance(elem, PhaseShift):
        out = np.eye(modes, dtype=np.complex128)
        out[elem.mode, elem.mode] = np.exp(1j * elem.phi)
        return out
    out = np.eye(modes, dtype=np.complex128)
    out[[elem.mode_a, elem.mode_b]] = out[[elem.mode_b, elem.mode_a]]
    return out


def circuit_unitary(circuit: ModeCircuit) -> np.ndarray:
    """Product of the element embeddings in application order."""
    out = np.eye(circuit.modes, dtype=np.complex128)
    for elem in circuit.elements:
        out = _element_unitary(elem, circuit.modes) @ out
    return out


def h4(theta: float) -> np.ndarray:
    """The four-mode complex Hadamard unitary with variable phase theta."""
    e = np.exp(1j * theta)
    return 0.5 * np.array(
        [
            [1, 1, 1, 1],
            [1, e, -1, -e],
            [1, -1, 1, -1],
            [1, -e, -1, e],
        ],
        dtype=np.complex128,
    )


def h4_circuit(theta: float) -> ModeCircuit:
    """Four 50:50 beamsplitters, a middle-mode swap and one interior phase.

    Mode indices are the computational port labels, under which the circuit
    is equivalent to ``h4(theta)`` up to diagonal input/output phases: the
    two beamsplitter layers couple ports (0,2) and (1,3), the swap exchanges
    ports 1 and 2, and theta sits on port 3 between the layers.
    """
    return ModeCircuit(
        4,
        (
            Beamsplitter(0, 2, 0.5),
            Beamsplitter(1, 3, 0.5),
            Swap(1, 2),
            PhaseShift(3, theta),
            Beamsplitter(0, 2, 0.5),
            Beamsplitter(1, 3, 0.5),
        ),
    )


def is_complex_hadamard(m, eps: float = DEFAULT_EPS) -> bool:
    """True iff m is unitary with all entry moduli equal to 1/sqrt(n)."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got {a.shape}")
    if not is_unitary(a, eps):
        return False
    target = 1.0 / math.sqrt(a.shape[0])
    return float(np.max(np.abs(np.abs(a) - target))) <= eps


def path_count(circuit: ModeCircuit, input_mode: int, output_mode: int) -> int:
    """Number of distinct single-photon paths from input to output.

    Each beamsplitter is a two-way branch; swaps and phases pass through.
    A count above 1 for any port pair means the circuit supports
    single-photon interference (it contains a closed loop).
    """
    if not (0 <= input_mode < circuit.modes and 0 <= output_mode < circuit.modes):
        raise ValueError("mode index out of range")
    counts = [0] * circuit.modes
    counts[input_mode] = 1
    for elem in circuit.elements:
        if isinstance(elem, Beamsplitter):
            merged = counts[elem.mode_a] + counts[elem.mode_b]
            counts[elem.mode_a] = merged
            counts[elem.mode_b] = merged
        elif isinstance(elem, Swap):
            counts[elem.mode_a], counts[elem.mode_b] = counts[elem.mode_b], counts[elem.mode_a]
    return counts[output_mode]


# ---------------------------------------------------------------------------
# Physical layout: rails x polarization with beam displacers
# ---------------------------------------------------------------------------
#
# Internal six-mode basis during the variable-phase section, ordered
# (t,H)=0, (t,V)=1, (m,H)=2, (m,V)=3, (b,H)=4, (b,V)=5 for rails
# top/middle/bottom.  Computational encoding on the input side:
# |0> = (m,H), |1> = (b,V), |2> = (V,m), |3> = (H,b); detectors sit at
# D0=(t,H), D2=(t,V) on the top rail and D1=(m,H), D3=(m,V) on the middle
# rail after the second displacer.

_INPUT_MODES = (2, 5, 3, 4)  # computational ket -> internal mode
_DETECTOR_MODES = (0, 2, 1, 3)  # detector label -> internal mode


def _displacer() -> np.ndarray:
    """Beam displacer: horizontal polarization walks up one rail.

    (b,H) -> (m,H) and (m,H) -> (t,H); vertical light is undeviated.  The
    unused (t,H) -> (b,H) branch closes the permutation and never carries
    light in this layout.
    """
    out = np.zeros((6, 6), dtype=np.complex128)
    out[0, 2] = 1.0
    out[2, 4] = 1.0
    out[4, 0] = 1.0
    for v in (1, 3, 5):
        out[v, v] = 1.0
    return out


def _plate_stage(rails) -> np.ndarray:
    """Half waveplates at 22.5 degrees on the given rails, identity elsewhere."""
    plate = waveplate_matrix(RetarderSpec(HALF, math.pi / 8.0))
    out = np.eye(6, dtype=np.complex128)
    for rail in rails:
        sl = slice(2 * rail, 2 * rail + 2)
        out[sl, sl] = plate
    return out


def physical_unitary(alpha: float, rail_phases=(0.0, 0.0, 0.0)) -> np.ndarray:
    """4x4 unitary of the displacer construction at sweep angle alpha.

    Pipeline: 22.5-degree plates on the input rails, displacer, the three
    rail waveplate programs, displacer, 22.5-degree plates on the output
    rails, polarizing splitters onto the four detectors.  ``rail_phases``
    are the fixed (length-mismatch) phases of the top/middle/bottom rails.
    Every input-output connection crosses exactly one rail, so these phases
    cannot move the variable phase; they only shift the fringe's absolute
    position through the calibration constant below.

    The rotation stage driving the shared half waveplates counts opposite to
    the Jones axis convention, so the plate stacks run at axis ``-alpha``;
    the resulting unitary equals ``h4(4 * alpha + c)`` up to diagonal phases
    with the single alpha-independent calibration constant
    ``c = phi_top + phi_bottom - 2 * phi_middle``.
    """
    phases = tuple(rail_phases)
    if len(phases) != 3:
        raise ValueError("rail_phases must have one entry per rail (top, middle, bottom)")
    theta_section = np.zeros((6, 6), dtype=np.complex128)
    for rail, name in enumerate(("rail-top", "rail-middle", "rail-bottom")):
        block = np.exp(1j * phases[rail]) * rail_composite(RAIL_PRESETS[name], -alpha)
        sl = slice(2 * rail, 2 * rail + 2)
        theta_section[sl, sl] = block
    displacer = _displacer()
    full = (
        _plate_stage((0, 1))
        @ displacer
        @ theta_section
        @ displacer
        @ _plate_stage((1, 2))
    )
    return full[np.ix_(_DETECTOR_MODES, _INPUT_MODES)]


def theta_prime_of(u4) -> float:
    """Effective Hadamard phase of a matrix diagonally equivalent to h4.

    The combination U00 U11 / (U01 U10) is invariant under diagonal phases
    and equals e^{i theta} on the h4 family.
    """
    a = np.asarray(u4, dtype=np.complex128)
    return float(np.angle(a[0, 0] * a[1, 1] / (a[0, 1] * a[1, 0])))


# ---------------------------------------------------------------------------
# Triangular mesh compiler
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeshPlan:
    """Beamsplitter/phase factorization of a unitary.

    Applying ``elements`` in order and then the per-mode ``residual_phases``
    reproduces the source matrix.
    """

    modes: int
    elements: tuple[CircuitElement, ...]
    residual_phases: tuple[float, ...]

    def beamsplitter_count(self) -> int:
        return sum(1 for e in self.elements if isinstance(e, Beamsplitter))


def reck_decompose(u, eps: float = DEFAULT_EPS) -> MeshPlan:
    """Triangular elimination of a unitary into beamsplitters and phases.

    Works up each column from the last row: entry (i, j) is nulled by mixing
    columns j and i with a phase + beamsplitter rotation.  At most
    n(n-1)/2 beamsplitters are emitted and the recomposition reproduces the
    input to ~1e-9.
    """
    a = np.asarray(u, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got {a.shape}")
    if not is_unitary(a, max(eps, 1e-7)):
        raise ValueError("reck_decompose requires a unitary input")
    n = a.shape[0]
    work = a.copy()
    steps = []  # (j, i, reflectivity, phi), in elimination order
    for i in range(n - 1, 0, -1):
        for j in range(i):
            mag = abs(work[i, j])
            if mag <= 1e-14:
                continue
            v = work[i, i]
            refl = mag * mag / (mag * mag + abs(v) ** 2)
            if abs(v) <= 1e-14:
                phi = 0.0
            else:
                phi = float(np.angle(-1j * v / work[i, j]))
            t_mat = np.array(
                [
                    [np.exp(1j * phi) * math.sqrt(1.0 - refl), np.exp(1j * phi) * 1j * math.sqrt(refl)],
                    [1j * math.sqrt(refl), math.sqrt(1.0 - refl)],
                ]
            )
            # right-multiplication acting on columns (j, i)
            work[:, [j, i]] = work[:, [j, i]] @ t_mat
            steps.append((j, i, refl, phi))
    residual = tuple(float(p) for p in np.angle(np.diag(work)))
    elements: list[CircuitElement] = []
    # U = D * adj(T_K) * ... * adj(T_1): expand each adjoint into circuit
    # elements, applied first-step-first.
    for j, i, refl, phi in steps:
        if phi != 0.0:
            elements.append(PhaseShift(j, -phi))
        elements.append(PhaseShift(i, math.pi))
        elements.append(Beamsplitter(j, i, refl))
        elements.append(PhaseShift(i, math.pi))
    return MeshPlan(modes=n, elements=tuple(elements), residual_phases=residual)


def recompose(plan: MeshPlan) -> np.ndarray:
    """Multiply a mesh plan back into its unitary."""
    out = np.eye(plan.modes, dtype=np.complex128)
    for elem in plan.elements:
        out = _element_unitary(elem, plan.modes) @ out
    return np.diag(np.exp(1j * np.array(plan.residual_phases))) @ out


# ---------------------------------------------------------------------------
# Circuit description files
# ---------------------------------------------------------------------------


def circuit_to_json(circuit: ModeCircuit) -> str:
    """Serialize a circuit to the JSON description format."""
    elements = []
    for elem in circuit.elements:
        if isinstance(elem, Beamsplitter):
            elements.append({"type": "bs", "a": elem.mode_a, "b": elem.mode_b, "r": elem.reflectivity})
        elif isinstance(elem, PhaseShift):
            elements.append({"type": "phase", "mode": elem.mode, "phi": elem.phi})
        else:
            elements.append({"type": "swap", "a": elem.mode_a, "b": elem.mode_b})
    return json.dumps({"modes": circuit.modes, "elements": elements}, indent=2)


def circuit_from_json(text: str) -> ModeCircuit:
    """Parse the JSON circuit description: {"modes": n, "elements": [...]}.

    Element forms: {"type": "bs", "a", "b", "r"}, {"type": "phase", "mode",
    "phi"}, {"type": "swap", "a", "b"}; angles in radians.
    """
    doc = json.loads(text)
    if not isinstance(doc, dict) or "modes" not in doc:
        raise ValueError("circuit description must be an object with a 'modes' field")
    elements: list[CircuitElement] = []
    for k, entry in enumerate(doc.get("elements", [])):
        kind = entry.get("type")
        try:
            if kind == "bs":
                elements.append(Beamsplitter(int(entry["a"]), int(entry["b"]), float(entry.get("r", 0.5))))
            elif kind == "phase":
                elements.append(PhaseShift(int(entry["mode"]), float(entry["phi"])))
            elif kind == "swap":
                elements.append(Swap(int(entry["a"]), int(entry["b"])))
            else:
                raise ValueError(f"unknown element type {kind!r}")
        except KeyError as exc:
            raise ValueError(f"element {k}: missing field {exc}") from exc
    return ModeCircuit(int(doc["modes"]), tuple(elements))
