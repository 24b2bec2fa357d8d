"""Spin-1/2 amplitude algebra for chains of Stern-Gerlach devices.

Axes lie in the x-z plane and are given by their angle from z, so
``0`` is z and ``pi/2`` is x.  A :class:`Beam` carries a complex path weight
and a unit spinor; flux is ``|weight|**2``.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SpinState",
    "Beam",
    "Device",
    "Merge",
    "Detect",
    "SGReport",
    "PipelineError",
    "eigenstate",
    "apply_device",
    "merge_coherent",
    "run_pipeline",
    "element_names",
    "Z",
    "X",
]

Z = 0.0
X = np.pi / 2
MERGED = "merged"


class PipelineError(ValueError):
    """Malformed or non-physical element sequence."""


@dataclass(frozen=True)
class SpinState:
    """Unit spinor ``c_up|z+> + c_down|z->``."""

    c_up: complex
    c_down: complex

    def __post_init__(self):
        norm = abs(self.c_up) ** 2 + abs(self.c_down) ** 2
        if abs(norm - 1) > 1e-12:
            raise ValueError(f"spinor norm^2 is {norm}, expected 1")

    @property
    def vec(self):
        return np.array([self.c_up, self.c_down], complex)

    def overlap(self, other):
        """Inner product <self|other>."""
        return complex(np.vdot(self.vec, other.vec))

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, complex)
        return cls(complex(v[0]), complex(v[1]))


def eigenstate(axis_angle, sign="up"):
    """Eigenspinor of spin along the axis at ``axis_angle`` from z.

    up = (cos(t/2), sin(t/2)), down = (-sin(t/2), cos(t/2)).
    """
    c, s = np.cos(axis_angle / 2), np.sin(axis_angle / 2)
    if sign == "up":
        return SpinState(complex(c), complex(s))
    if sign == "down":
        return SpinState(complex(-s), complex(c))
    raise ValueError(f"sign must be 'up' or 'down', got {sign!r}")


@dataclass(frozen=True)
class Beam:
    weight: complex
    spin: SpinState
    history: tuple = ()

    @property
    def flux(self):
        return abs(self.weight) ** 2

    @property
    def amplitudes(self):
        """z-basis amplitude pair ``weight * spinor``."""
        return self.weight * self.spin.vec


@dataclass(frozen=True)
class Device:
    axis_angle: float
    block_up: bool = False
    block_down: bool = False
    name: str = ""


@dataclass(frozen=True)
class Merge:
    name: str = MERGED


@dataclass(frozen=True)
class Detect:
    pass


@dataclass
class SGReport:
    """Per-element port fluxes and absorption for one pipeline run.

    ``port_flux[i]`` is ``{"up": f, "down": f}`` for devices (blocked ports
    included) and
    ``{"out": f}`` for merges.  ``absorbed[i]`` is the flux stopped at the
    blocked ports of element ``i`` (0 for unblocked devices and merges).
    ``detector_flux`` maps each final beam's history label to its flux.
    """

    port_flux: list = field(default_factory=list)
    absorbed: list = field(default_factory=list)
    detector_flux: dict = field(default_factory=dict)
    total_in: float = 0.0
    total_out: float = 0.0
    beams: list = field(default_factory=list)

    @property
    def total_absorbed(self):
        return float(sum(self.absorbed))


def _split(beams, axis_angle, block_up, block_down, name):
    up, down = eigenstate(axis_angle, "up"), eigenstate(axis_angle, "down")
    out = []
    ports = {"up": 0.0, "down": 0.0}
    absorbed = 0.0
    for b in beams:
        for state, sign, blocked in ((up, "up", block_up), (down, "down", block_down)):
            w = b.weight * state.overlap(b.spin)
            ports[sign] += abs(w) ** 2
            if blocked:
                absorbed += abs(w) ** 2
            else:
                out.append(Beam(w, state, b.history + (f"{name}:{sign}",)))
    return out, absorbed, ports


def apply_device(beams, axis_angle, block_up=False, block_down=False, name="sg"):
    """Split every beam into the up and down ports of one device.

    Returns ``(beams_out, absorbed_flux)``.  Beams leaving a blocked port are
    dropped and their flux is counted as absorbed.
    """
    out, absorbed, _ = _split(beams, axis_angle, block_up, block_down, name)
    return out, absorbed


def merge_coherent(beams, name=MERGED):
    """Add beams at the amplitude level.

    The result is one beam with ``weight = |sum w_i chi_i|`` and spinor
    ``sum / weight``; total cancellation gives a zero-weight beam with a
    ``|z+>`` placeholder spinor.  Merged beams lose their individual
    histories.
    """
    beams = list(beams)
    if not beams:
        raise ValueError("nothing to merge")
    if len(beams) == 1:
        return beams
    total = sum(b.amplitudes for b in beams)
    norm = float(np.linalg.norm(total))
    if norm == 0.0:
        return [Beam(0j, SpinState(1 + 0j, 0j), (name,))]
    return [Beam(complex(norm), SpinState.from_vector(total / norm), (name,))]


def element_names(elements):
    """Display name per element; unnamed devices become e.g. ``x-SG1``."""
    names = []
    devices = merges = 0
    for el in elements:
        if isinstance(el, Device):
            devices += 1
            axis = {Z: "z", X: "x"}.get(el.axis_angle, f"{el.axis_angle:.4g}rad")
            names.append(el.name or f"{axis}-SG{devices}")
        elif isinstance(el, Merge):
            merges += 1
            names.append(el.name if el.name != MERGED else f"merge{merges}")
        else:
            names.append("detect")
    return names


def run_pipeline(elements, input_beam):
    """Fold ``input_beam`` through devices and merges up to a final Detect.

    A merge must preserve total flux to 1e-12: a single-output combiner
    cannot create flux, and flux it would lose has nowhere to go in this
    model, so such merges raise :class:`PipelineError`.  This keeps
    ``total_in == total_out + sum(absorbed)`` exact for every accepted
    pipeline.
    """
    elements = list(elements)
    if not elements or not isinstance(elements[-1], Detect):
        raise PipelineError("pipeline must end with Detect")
    if any(isinstance(el, Detect) for el in elements[:-1]):
        raise PipelineError("Detect is terminal and may appear only once")
    report = SGReport(total_in=input_beam.flux)
    beams = [input_beam]
    for el, name in zip(elements[:-1], element_names(elements)):
        if isinstance(el, Device):
            beams, absorbed, ports = _split(beams, el.axis_angle, el.block_up, el.block_down, name)
            report.port_flux.append(ports)
            report.absorbed.append(absorbed)
        elif isinstance(el, Merge):
            before = sum(b.flux for b in beams)
            if not beams:
                raise PipelineError("merge after every port was blocked")
            beams = merge_coherent(beams, el.name)
            after = beams[0].flux
            if abs(after - before) > 1e-12 * max(before, 1.0):
                raise PipelineError(
                    f"merge changes flux from {before:.6g} to {after:.6g}; "
                    "only mutually coherent, orthogonal beams can be recombined losslessly"
                )
            report.port_flux.append({"out": after})
            report.absorbed.append(0.0)
        else:
            raise PipelineError(f"unknown element {el!r}")
    report.beams = beams
    report.detector_flux = {"/".join(b.history): b.flux for b in beams}
    report.total_out = float(sum(b.flux for b in beams))
    return report
