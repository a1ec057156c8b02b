"""Named parameter sets for the scenario runner."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import AMU, PROTON_MASS, PROTON_RADIUS, WATER_DENSITY


@dataclass(frozen=True)
class Preset:
    name: str
    command: str
    description: str
    params: dict
    source: str  # where each value comes from
    derived: dict = field(default_factory=dict)


PRESETS: tuple[Preset, ...] = (
    Preset("omnes-1g", "pendulum",
           "1 g pendulum, 1 s period, branches 1 um apart",
           {"mass": 1e-3, "omega": 2 * np.pi, "gamma": 1.0, "dx": 1e-6},
           "mass, period and separation from the damped-pendulum estimate; gamma is a free choice "
           "(the ratio K does not depend on it)"),
    Preset("gerlich-6910amu", "doubleslit",
           "430-atom molecule, 6910 AMU, de Broglie wavelength 1 pm",
           {"mass": 6910 * AMU, "lambda_db": 1e-12, "packet_sep": 1e-7, "packet_width": 5e-9, "t": 1e-3},
           "mass and wavelength from the large-molecule interference survey; slit geometry and "
           "flight time are illustrative"),
    Preset("fullerene-720amu", "doubleslit",
           "C60 fullerene, 720 AMU, through a 100 nm grating",
           {"mass": 720 * AMU, "packet_sep": 1e-7, "packet_width": 5e-9, "t": 1e-4},
           "mass and grating period from the fullerene diffraction survey; packet width and "
           "flight time are illustrative"),
    Preset("droplet-10um", "penrose",
           "10 um water droplet displaced by one diameter",
           {"radius": 5e-6, "density": WATER_DENSITY, "displacement": 1e-5, "lattice_per_radius": 8},
           "droplet size and the ~1 us lifetime estimate from the gravitational-collapse discussion; "
           "lattice resolution is numerical"),
    Preset("proton", "penrose",
           "single proton displaced by 1 Angstrom",
           {"mass": PROTON_MASS, "radius": PROTON_RADIUS, "displacement": 1e-10},
           "the few-million-year proton estimate from the gravitational-collapse discussion; "
           "charge radius and displacement are standard inputs"),
)


def list_presets(filter_text: str = "") -> list[Preset]:
    """Catalog entries whose name or command contains ``filter_text``, in a fixed order."""
    f = filter_text.lower()
    return [p for p in PRESETS if f in p.name or f in p.command]


def get_preset(name: str, command: str | None = None) -> Preset:
    for p in PRESETS:
        if p.name == name:
            if command is not None and p.command != command:
                raise KeyError(f"preset {name!r} belongs to '{p.command}', not '{command}'")
            return p
    raise KeyError(f"unknown preset {name!r}")
