"""Robot hand profiles: joint layout, limits, mapping matrix and coupling.

Profiles are JSON documents; see ``profiles/*.json`` for the shipped ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .actuation import CouplingMatrix
from .errors import DimensionMismatch, InputError
from .retarget import MappingMatrix

BUILTIN = ("inspire", "shadow", "generic_underactuated")


@dataclass(frozen=True)
class HandProfile:
    hand_id: str
    joint_names: tuple
    lower: np.ndarray
    upper: np.ndarray
    mapping: MappingMatrix
    coupling: CouplingMatrix
    notes: str = ""

    @property
    def dof(self):
        return len(self.joint_names)

    @classmethod
    def from_dict(cls, doc):
        try:
            fingers = doc["fingers"]
            joint_names, lower, upper, blocks, order = [], [], [], {}, []
            for f in fingers:
                name = f["name"]
                order.append(name)
                for j in f["joints"]:
                    joint_names.append(j["name"])
                    lower.append(float(j.get("lower", -np.inf)))
                    upper.append(float(j.get("upper", np.inf)))
                blocks[name] = np.asarray(f["W"], dtype=float)
                if blocks[name].shape[0] != len(f["joints"]):
                    raise DimensionMismatch(
                        f"{name}: W has {blocks[name].shape[0]} rows for {len(f['joints'])} joints"
                    )
            mapping = MappingMatrix(tuple(order), blocks, doc.get("epsilon"))
            acts = doc["actuators"]
            coupling = CouplingMatrix.from_triples(
                doc["coupling"],
                joint_names,
                [a["name"] for a in acts],
                lower=[float(a.get("lower", -np.inf)) for a in acts],
                upper=[float(a.get("upper", np.inf)) for a in acts],
            )
            hand_id = str(doc["hand_id"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed hand profile: {exc!r}") from exc
        if "dof" in doc and int(doc["dof"]) != len(joint_names):
            raise DimensionMismatch(f"profile declares dof={doc['dof']} but lists {len(joint_names)} joints")
        if len(set(joint_names)) != len(joint_names):
            raise InputError("duplicate joint names in profile")
        return cls(
            hand_id,
            tuple(joint_names),
            np.array(lower),
            np.array(upper),
            mapping,
            coupling,
            str(doc.get("notes", "")),
        )

    def to_dict(self):
        fingers = []
        for name in self.mapping.fingers:
            sl = self.mapping.finger_slice(name)
            fingers.append(
                {
                    "name": name,
                    "joints": [
                        {"name": self.joint_names[k], "lower": float(self.lower[k]), "upper": float(self.upper[k])}
                        for k in range(sl.start, sl.stop)
                    ],
                    "W": self.mapping.blocks[name].tolist(),
                }
            )
        J = self.coupling.J
        triples = [
            [self.joint_names[j], self.coupling.actuators[a], float(J[j, a])] for j, a in zip(*np.nonzero(J))
        ]
        acts = [
            {
                "name": n,
                "lower": None if self.coupling.lower is None else float(self.coupling.lower[k]),
                "upper": None if self.coupling.upper is None else float(self.coupling.upper[k]),
            }
            for k, n in enumerate(self.coupling.actuators)
        ]
        return {
            "hand_id": self.hand_id,
            "dof": self.dof,
            "notes": self.notes,
            "fingers": fingers,
            "epsilon": self.mapping.bias.tolist(),
            "actuators": [{k: v for k, v in a.items() if v is not None} for a in acts],
            "coupling": triples,
        }


def load_profile(source):
    """Load a profile from a path, or by built-in name (``"inspire"`` etc.)."""
    if isinstance(source, HandProfile):
        return source
    if str(source) in BUILTIN:
        text = resources.files("dexanno").joinpath("profiles", f"{source}.json").read_text()
    else:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise InputError(f"cannot read profile {source}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"profile {source} is not valid JSON: {exc}") from exc
    return HandProfile.from_dict(doc)
