"""JSON wire formats for matrices, states, marginal sets, reports, witnesses.

All loaders validate key sets and shapes and raise ValueError with the
offending key on malformed input. Matrices travel as
{"dim": d, "re": [...], "im": [...]} with row-major real/imaginary parts.
"""

from __future__ import annotations

import json

import numpy as np

from qmarg.forcing import FULLY_FORCED, ForcingOutcome, LogEntry
from qmarg.marginals import DensityMatrix, MarginalSet
from qmarg.states import PureState

_STATUSES = ("FullyForced", "Underdetermined", "Contradiction")


def _require(obj: dict, keys: tuple, what: str):
    if not isinstance(obj, dict):
        raise ValueError(f"{what}: expected an object")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise ValueError(f"{what}: missing key {missing[0]!r}")


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    return {
        "dim": int(m.shape[0]),
        "re": [float(x) for x in m.real.ravel()],
        "im": [float(x) for x in m.imag.ravel()],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    _require(obj, ("dim", "re", "im"), "matrix")
    d = int(obj["dim"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj["im"], dtype=float)
    if re.size != d * d or im.size != d * d:
        raise ValueError(f"matrix: expected {d * d} entries, got {re.size}/{im.size}")
    return (re + 1j * im).reshape(d, d)


def state_to_json(psi: PureState) -> dict:
    return {
        "n_qubits": int(psi.n_qubits),
        "kind": "pure",
        "amplitudes": [[float(a.real), float(a.imag)] for a in psi.amplitudes],
    }


def state_from_json(obj: dict) -> PureState:
    _require(obj, ("n_qubits", "kind", "amplitudes"), "state")
    if obj["kind"] != "pure":
        raise ValueError(f"state: unsupported kind {obj['kind']!r}")
    n = int(obj["n_qubits"])
    amps = obj["amplitudes"]
    if len(amps) != 1 << n:
        raise ValueError(f"state: expected {1 << n} amplitudes, got {len(amps)}")
    vec = np.array([complex(a[0], a[1]) for a in amps], dtype=complex)
    return PureState(n, vec)


def marginal_set_to_json(ms: MarginalSet) -> dict:
    return {
        "n_qubits": int(ms.n_qubits),
        "subsets": [[int(q) for q in s] for s in ms.subsets],
        "reduced": [matrix_to_json(r) for r in ms.reduced],
    }


def marginal_set_from_json(obj: dict) -> MarginalSet:
    _require(obj, ("n_qubits", "subsets", "reduced"), "marginal set")
    n = int(obj["n_qubits"])
    subsets = [tuple(int(q) for q in s) for s in obj["subsets"]]
    reduced = [matrix_from_json(r) for r in obj["reduced"]]
    if len(subsets) != len(reduced):
        raise ValueError("marginal set: subsets and reduced lengths differ")
    return MarginalSet(n, "explicit", subsets, reduced)


def log_entry_to_json(e: LogEntry) -> dict:
    return {
        "rule": e.rule,
        "rows": [int(r) for r in e.rows],
        "value": [float(e.value.real), float(e.value.imag)],
    }


def outcome_to_json(out: ForcingOutcome) -> dict:
    return {
        "status": out.status,
        "free_entries": [[int(i), int(j)] for (i, j) in out.free_entries],
        "log": [log_entry_to_json(e) for e in out.log],
        "matrix": (matrix_to_json(out.matrix.matrix)
                   if out.matrix is not None else None),
    }


def outcome_from_json(obj: dict) -> ForcingOutcome:
    """Rebuild the serializable face of a forcing report.

    The justification fields (constraint ids, pivots) and the source
    marginal set do not travel over the wire, so a loaded outcome cannot
    be replayed; it carries the status, free entries, log skeleton, and
    matrix for inspection.
    """
    _require(obj, ("status", "free_entries", "log", "matrix"), "report")
    status = obj["status"]
    if status not in _STATUSES:
        raise ValueError(f"report: unknown status {status!r}")
    log = [LogEntry(e["rule"], tuple(int(r) for r in e["rows"]),
                    complex(e["value"][0], e["value"][1]))
           for e in obj["log"]]
    free = [(int(i), int(j)) for (i, j) in obj["free_entries"]]
    mat = None
    n = 0
    if obj["matrix"] is not None:
        arr = matrix_from_json(obj["matrix"])
        n = int(arr.shape[0]).bit_length() - 1
        mat = DensityMatrix(n, arr, validate=False)
    elif free:
        top = max(max(i, j) for (i, j) in free)
        n = max(1, int(top).bit_length())
    return ForcingOutcome(status, n, mat, free, log)


def witness_to_json(w) -> dict:
    return {
        "seed": int(w.seed),
        "trace_distance": float(w.trace_distance),
        "residual": float(w.residual),
        "state": matrix_to_json(w.state.matrix),
    }


def witness_from_json(obj: dict):
    from qmarg.feasibility import FeasibilityWitness

    _require(obj, ("seed", "trace_distance", "residual", "state"), "witness")
    arr = matrix_from_json(obj["state"])
    n = int(arr.shape[0]).bit_length() - 1
    return FeasibilityWitness(int(obj["seed"]), float(obj["trace_distance"]),
                              float(obj["residual"]),
                              DensityMatrix(n, arr, validate=False))


def save_json(obj: dict, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def load_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


__all__ = [
    "load_json", "log_entry_to_json", "marginal_set_from_json",
    "marginal_set_to_json", "matrix_from_json", "matrix_to_json",
    "outcome_from_json", "outcome_to_json", "save_json", "state_from_json",
    "state_to_json", "witness_from_json", "witness_to_json",
]
