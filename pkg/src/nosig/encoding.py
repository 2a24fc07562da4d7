"""JSON encoding of states, channels, protocols and reports.

Complex scalars are ``[re, im]``, vectors are lists of scalars and matrices
are lists of rows. :func:`dumps` writes every float with 17 significant
digits and sorted keys, so equal inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable

import numpy as np

from .channels import LinearMapSpec
from .signaling_lab import EmpiricalRecord, SignalingReport
from .state_core import BipartiteState, DensityMatrix, Ensemble
from .steering import SteeringProtocol, SteeringReport

FORMAT_VERSION = 1


def complex_to_json(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def vector_to_json(v) -> list[list[float]]:
    return [complex_to_json(z) for z in np.asarray(v).reshape(-1)]


def matrix_to_json(m) -> list[list[list[float]]]:
    return [vector_to_json(row) for row in np.asarray(m)]


def vector_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("a vector must be a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("a matrix must be a list of rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def density_to_json(rho: DensityMatrix) -> dict:
    return {"dim": rho.dim, "matrix": matrix_to_json(rho.matrix)}


def bipartite_to_json(psi: BipartiteState) -> dict:
    return {"dimA": psi.dim_a, "dimB": psi.dim_b, "amplitudes": vector_to_json(psi.amplitudes)}


def ensemble_to_json(e: Ensemble) -> list[dict]:
    return [{"p": p, "state": vector_to_json(s.amplitudes)} for p, s in e.members]


def protocol_to_json(p: SteeringProtocol) -> dict:
    return {
        "formatVersion": FORMAT_VERSION,
        "sourceDimB": p.source_dim_b,
        "ancillaDim": p.ancilla_dim,
        "unitaryB": matrix_to_json(p.unitary_b),
        "measurementVectors": matrix_to_json(p.measurement_vectors),
        "predicted": ensemble_to_json(p.predicted),
    }


def steering_report_to_json(r: SteeringReport) -> dict:
    return {
        "probabilities": [float(x) for x in r.probabilities],
        "probabilityDeviations": [float(x) for x in r.probability_deviations],
        "fidelityDeviations": [float(x) for x in r.fidelity_deviations],
        "maxProbabilityDeviation": r.max_probability_deviation,
        "maxFidelityDeviation": r.max_fidelity_deviation,
        "passed": r.passed,
    }


def channel_to_json(m: LinearMapSpec) -> dict:
    out: dict[str, Any] = {"kind": m.kind, "dimIn": m.dim_in, "dimOut": m.dim_out}
    if m.kind == "kraus":
        out["operators"] = [matrix_to_json(k) for k in m.kraus_channel.operators]
    elif m.kind == "choi":
        out["matrix"] = matrix_to_json(m.choi_matrix.matrix)
    else:
        out["name"] = m.name
        if m.name == "depolarizing":
            out["lambda"] = m.lam
        if m.name == "unitary":
            out["matrix"] = matrix_to_json(m.matrix)
    return out


def empirical_to_json(rec: EmpiricalRecord | None) -> dict | None:
    if rec is None:
        return None
    return {
        "seed": rec.seed,
        "shots": rec.shots,
        "successes": rec.successes,
        "empiricalRate": rec.empirical_rate,
        "expectedRate": rec.expected_rate,
        "pValue": rec.p_value,
    }


def signaling_report_to_json(r: SignalingReport) -> dict:
    p0, p1 = r.discriminator.projectors
    return {
        "rho": density_to_json(r.rho),
        "ensembleA": ensemble_to_json(r.ensemble_a),
        "ensembleB": ensemble_to_json(r.ensemble_b),
        "outputA": density_to_json(r.output_a),
        "outputB": density_to_json(r.output_b),
        "residual": r.residual,
        "helstromSuccess": r.helstrom_success,
        "discriminator": [matrix_to_json(p0), matrix_to_json(p1)],
        "verdict": r.verdict,
        "empirical": empirical_to_json(r.empirical),
    }


def csv_rows(records: Iterable[EmpiricalRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["seed", "shots", "successes", "rate", "pValue"])
    for rec in records:
        rate, pv = rec.empirical_rate, rec.p_value
        writer.writerow([
            rec.seed, rec.shots, rec.successes,
            "" if rate is None else _fmt(rate),
            "" if pv is None else _fmt(pv),
        ])
    return buf.getvalue()


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return _fmt(x) if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_encode(str(k), indent, 0)}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # scalars and [re, im] pairs stay on one line
        if all(not isinstance(x, (dict, list, tuple)) for x in obj):
            return "[" + ", ".join(_encode(x, indent, 0) for x in obj) + "]"
        items = [pad + _encode(x, indent, level + 1) for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent: int = 1) -> str:
    return _encode(obj, indent, 0) + "\n"
