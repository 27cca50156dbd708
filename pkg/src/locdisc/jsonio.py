"""JSON and CSV formats for states, sets, protocols and reports.

Complex numbers are written as ``[re, im]`` pairs and matrices as nested rows
of such pairs.  Readers re-run every constructor check (normalization,
orthogonality, measurement shapes, decoder totality).
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .engine import (
    DiscriminationReport,
    FlatLOProtocol,
    Leaf,
    Measurement,
    Node,
    ProtocolError,
    ProtocolTree,
)
from .families import StateSet
from .states import StateVector

INCONCLUSIVE = "inconclusive"


def _c(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def vector_to_json(v) -> list:
    return [_c(z) for z in np.asarray(v).ravel()]


def vector_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("complex vectors are lists of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def matrix_to_json(m) -> list:
    return [vector_to_json(row) for row in np.asarray(m)]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("complex matrices are nested rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def state_to_json(x: StateVector) -> dict:
    return {"dim_a": x.dim_a, "dim_b": x.dim_b, "amplitudes": vector_to_json(x.amplitudes)}


def state_from_json(data: dict) -> StateVector:
    return StateVector(data["dim_a"], data["dim_b"], vector_from_json(data["amplitudes"]))


def set_to_json(s: StateSet) -> dict:
    return {"family": s.family_tag, "params": s.params, "states": [state_to_json(x) for x in s.states]}


def set_from_json(data: dict) -> StateSet:
    states = tuple(state_from_json(x) for x in data["states"])
    return StateSet(states, data.get("family", "custom"), data.get("params", {}))


def measurement_to_json(m: Measurement) -> dict:
    return {
        "party": m.party,
        "kind": m.kind,
        "labels": list(m.labels),
        "operators": [matrix_to_json(op) for op in m.operators],
    }


def measurement_from_json(data: dict) -> Measurement:
    ops = [matrix_from_json(op) for op in data["operators"]]
    return Measurement(data["party"], ops, data.get("labels"), data.get("kind", "general"))


def _decode_out(v):
    return INCONCLUSIVE if v is None else int(v)


def _decode_in(v):
    if v == INCONCLUSIVE or v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        raise ProtocolError(f"decode must be an integer or {INCONCLUSIVE!r}, got {v!r}")
    return v


def _node_to_json(n):
    if isinstance(n, Leaf):
        return {"decode": _decode_out(n.decode)}
    out = measurement_to_json(n.measurement)
    out["children"] = {label: _node_to_json(c) for label, c in n.children.items()}
    return out


def _node_from_json(data):
    if "decode" in data:
        return Leaf(_decode_in(data["decode"]))
    if "children" not in data:
        raise ProtocolError("protocol node needs either 'decode' or 'children'")
    m = measurement_from_json(data)
    return Node(m, {label: _node_from_json(c) for label, c in data["children"].items()})


def protocol_to_json(p) -> dict:
    if isinstance(p, FlatLOProtocol):
        return {
            "type": "flat",
            "name": p.name,
            "alice": measurement_to_json(p.alice),
            "bob": measurement_to_json(p.bob),
            "decoder": [
                {"alice": a, "bob": b, "decode": _decode_out(v)} for (a, b), v in p.decoder.items()
            ],
        }
    return {"type": "tree", "name": p.name, "root": _node_to_json(p.root)}


def protocol_from_json(data: dict):
    kind = data.get("type", "tree")
    if kind == "flat":
        dec = {(e["alice"], e["bob"]): _decode_in(e["decode"]) for e in data["decoder"]}
        return FlatLOProtocol(
            measurement_from_json(data["alice"]), measurement_from_json(data["bob"]), dec, data.get("name", "")
        )
    if kind != "tree":
        raise ProtocolError(f"unknown protocol type {kind!r}")
    return ProtocolTree(_node_from_json(data["root"]), data.get("name", ""))


def report_to_json(r: DiscriminationReport) -> dict:
    return {
        "protocol": r.protocol_name,
        "family": r.set_family,
        "perfect": r.perfect,
        "error": r.error,
        "meta": r.meta,
        "inputs": [
            {
                "index": i.index,
                "success_probability": i.success_probability,
                "conclusive_probability": i.conclusive_probability,
                "error_probability": i.error_probability,
                "total_probability": i.total_probability,
                "branches": [
                    {
                        "transcript": [list(t) for t in b.transcript],
                        "probability": b.probability,
                        "decode": _decode_out(b.decode),
                    }
                    for b in i.branches
                ],
            }
            for i in r.inputs
        ],
    }


def report_to_csv(r: DiscriminationReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["input_index", "success_probability", "conclusive_probability", "perfect"])
    for i in r.inputs:
        w.writerow([i.index, repr(i.success_probability), repr(i.conclusive_probability), r.perfect])
    return buf.getvalue()


def verdict_to_json(v) -> dict:
    witness = v.witness()
    return {
        "target": v.target,
        "status": v.status,
        "method": v.method,
        "witness": None if witness is None else state_to_json(witness),
        "alpha": None if v.alpha is None else vector_to_json(v.alpha),
        "beta": None if v.beta is None else vector_to_json(v.beta),
        "overlap": v.overlap,
        "residual": v.residual,
        "max_overlap": v.max_overlap,
        "samples": v.samples,
        "seed": v.seed,
        "evidence": v.evidence,
    }


def entanglement_report(s: StateSet) -> dict:
    from .entanglement import average_entanglement, entanglement_entropy, schmidt_rank
    from .states import schmidt_coefficients

    return {
        "family": s.family_tag,
        "states": [
            {
                "index": i,
                "entropy": entanglement_entropy(x),
                "schmidt_rank": schmidt_rank(x),
                "schmidt_coefficients": schmidt_coefficients(x).tolist(),
            }
            for i, x in enumerate(s.states)
        ],
        "average_entropy": average_entanglement(s),
    }


def entanglement_report_to_csv(rep: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "entropy", "schmidt_rank"])
    for row in rep["states"]:
        w.writerow([row["index"], repr(row["entropy"]), row["schmidt_rank"]])
    w.writerow(["average", repr(rep["average_entropy"]), ""])
    return buf.getvalue()


def mc_to_json(r) -> dict:
    return {
        "estimate": r.estimate,
        "standard_error": r.standard_error,
        "inconclusive_rate": r.inconclusive_rate,
        "error_rate": r.error_rate,
        "trials": r.trials,
        "seed": r.seed,
        "conversion_probability": r.conversion_probability,
    }


def dump(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def load(path):
    return json.loads(Path(path).read_text())


def fixture_names() -> list[str]:
    from importlib.resources import files

    return sorted(p.name[:-5] for p in files("locdisc").joinpath("fixtures").iterdir() if p.name.endswith(".json"))


def load_fixture(name: str):
    """A protocol shipped with the package, e.g. ``"assisted-d3"`` or ``"hadamard-d4"``."""
    from importlib.resources import files

    text = files("locdisc").joinpath("fixtures", f"{name}.json").read_text()
    return protocol_from_json(json.loads(text))
