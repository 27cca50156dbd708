"""Regenerate the protocol fixtures shipped in ``src/locdisc/fixtures``."""

import json
from pathlib import Path

from locdisc import (
    NonMaxParams,
    build_assisted_tree,
    build_extended_tree,
    build_hadamard_tree,
    build_nonmax_tree,
    build_teleportation_tree,
)
from locdisc.jsonio import protocol_to_json

OUT = Path(__file__).resolve().parents[1] / "src" / "locdisc" / "fixtures"

PROTOCOLS = {
    "assisted-d2": lambda: build_assisted_tree(2),
    "teleportation-d2": build_teleportation_tree,
    "assisted-d3": lambda: build_assisted_tree(3),
    "extended-d3": build_extended_tree,
    "assisted-d4": lambda: build_assisted_tree(4),
    "hadamard-d4": build_hadamard_tree,
    "nonmax-d4-symmetric": lambda: build_nonmax_tree(NonMaxParams.symmetric()),
}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, build in PROTOCOLS.items():
        path = OUT / f"{name}.json"
        path.write_text(json.dumps(protocol_to_json(build()), separators=(",", ":"), sort_keys=True))
        print(path, path.stat().st_size)


if __name__ == "__main__":
    main()
