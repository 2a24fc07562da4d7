"""Canonical demonstrations with fixed seeds.

Each demo returns ``(reproduced, report, records)`` where ``report`` is a
JSON-ready dict and ``records`` are empirical rows for CSV output.
"""

from __future__ import annotations

import numpy as np

from .channels import LinearMapSpec, extend_and_apply, is_completely_positive, is_positive_sampled, is_trace_preserving
from .encoding import signaling_report_to_json
from .signaling_lab import DynamicsMap, builtin_nonlinear, signaling_test, simulate_experiment
from .state_core import Ensemble, PureState, bell_state, maximally_mixed, purify, random_density, random_unitary, BipartiteState
from .steering import build_steering, random_decomposition, verify_steering

DEMO_SEED = 2002
DEMO_SHOTS = 100_000
STEER_CASES = 20
EXTENSION_TOL = 1e-9


def z_ensemble() -> Ensemble:
    return Ensemble(((0.5, PureState.basis(2, 0)), (0.5, PureState.basis(2, 1))))


def x_ensemble() -> Ensemble:
    return Ensemble(((0.5, PureState.normalized([1, 1])), (0.5, PureState.normalized([1, -1]))))


def cloner_signals(seed: int = DEMO_SEED, shots: int = DEMO_SHOTS):
    cloner = builtin_nonlinear("perfect-cloner")
    shared = bell_state()
    proto_z = build_steering(z_ensemble(), shared)
    proto_x = build_steering(x_ensemble(), shared)
    record, explicit = simulate_experiment(cloner, shared, proto_z, proto_x, shots, seed)
    searched = signaling_test(cloner, maximally_mixed(2), n_pairs=20, m=2, seed=seed)
    reproduced = explicit.verdict == "signaling-detected" and searched.verdict == "signaling-detected"
    report = {
        "explicitPair": signaling_report_to_json(explicit),
        "randomSearch": signaling_report_to_json(searched),
    }
    return reproduced, report, [record]


def transpose_not_cp(seed: int = DEMO_SEED, shots: int | None = None):
    transpose = LinearMapSpec.transpose(2)
    choi = transpose.choi()
    cp, min_eig = is_completely_positive(choi)
    tp, tp_dev = is_trace_preserving(choi)
    positive, worst = is_positive_sampled(transpose, 1000, seed)
    _, ext_min = extend_and_apply(transpose, bell_state(), (2, 2))
    linear = signaling_test(DynamicsMap.from_linear(transpose), maximally_mixed(2), n_pairs=20, m=3, seed=seed)
    reproduced = (not cp) and positive and abs(ext_min + 0.5) <= EXTENSION_TOL
    report = {
        "cp": cp,
        "minChoiEigenvalue": min_eig,
        "tp": tp,
        "tpDeviation": tp_dev,
        "positiveSampled": positive,
        "positiveSampledWorst": worst,
        "positivityCheck": "sampled, necessary condition",
        "extensionMinEigenvalue": ext_min,
        "signalingTest": signaling_report_to_json(linear),
    }
    return reproduced, report, []


def steer_anything(seed: int = DEMO_SEED, shots: int | None = None):
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(STEER_CASES):
        dim = int(rng.integers(2, 6))
        rank = int(rng.integers(2, dim + 1))
        m = int(rng.integers(rank, 9))
        rho = random_density(dim, rank, rng)
        target = random_decomposition(rho, m, rng)
        canonical = purify(rho)
        u = random_unitary(canonical.dim_b, rng)
        shared = BipartiteState(dim, canonical.dim_b, (canonical.coefficients() @ u.T).reshape(-1))
        rep = verify_steering(build_steering(target, shared), shared)
        cases.append({
            "dim": dim, "rank": rank, "members": len(target),
            "maxProbabilityDeviation": rep.max_probability_deviation,
            "maxFidelityDeviation": rep.max_fidelity_deviation,
            "passed": rep.passed,
        })
    reproduced = all(c["passed"] for c in cases)
    return reproduced, {"cases": cases, "allPassed": reproduced}, []


DEMOS = {
    "cloner-signals": cloner_signals,
    "transpose-not-cp": transpose_not_cp,
    "steer-anything": steer_anything,
}
