"""Signaling tests for candidate dynamics.

A dynamics map ``g`` sends pure states of A to density matrices, possibly
nonlinearly. Bob can steer any decomposition of ``rho_A`` into A, so if two
decompositions of the same ``rho_A`` evolve into different averages, Alice
can tell which one Bob chose: a superluminal signal. The trace distance
between the averages (the linearity residual) and the Helstrom success
probability quantify that signal.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Literal, Mapping

import numpy as np
from scipy.stats import binomtest

from .channels import LinearMapSpec, apply_matrix
from .errors import (
    DegenerateInputError,
    DimensionMismatchError,
    InvalidDynamicsError,
    InvalidStateError,
    MismatchedDensityError,
    UnverifiedProtocolError,
)
from .state_core import (
    DensityMatrix,
    Ensemble,
    PureState,
    ensemble_density,
    hermitize,
    random_pure,
    trace_distance,
    trace_distance_matrix,
)
from .steering import (
    DENSITY_MATCH_TOL,
    SteeringProtocol,
    eigen_decomposition,
    random_decomposition,
    verify_steering,
)

SIGNALING_THRESHOLD = 1e-7
REGISTRATION_SAMPLES = 20
REGISTRATION_SEED = 20240101
SHOT_CHUNK = 1 << 14
MEAN_FIELD_DEFAULT_STEPS = 1000

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

# parameters of the documented mean-field demo
MEAN_FIELD_DEMO = {"H0": SIGMA_X, "epsilon": 1.0, "t": math.pi, "steps": MEAN_FIELD_DEFAULT_STEPS}


@dataclass(frozen=True, eq=False)
class DynamicsMap:
    """Evolution ``g`` taking a pure state of dim ``in_dim`` to a density matrix.

    ``kind`` is ``"linear"``, ``"builtin-nonlinear"`` or ``"external"``. The
    evaluator is checked on 20 random inputs when the map is created.
    """

    in_dim: int
    out_dim: int
    evaluator: Callable[[PureState], DensityMatrix]
    kind: Literal["linear", "builtin-nonlinear", "external"] = "external"
    label: str = "external"
    linear_map: LinearMapSpec | None = None
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        rng = np.random.default_rng(REGISTRATION_SEED)
        for _ in range(REGISTRATION_SAMPLES):
            self(random_pure(self.in_dim, rng))

    def __call__(self, psi: PureState) -> DensityMatrix:
        if psi.dim != self.in_dim:
            raise DimensionMismatchError(f"dynamics expects dim {self.in_dim}, got {psi.dim}")
        try:
            out = self.evaluator(psi)
            if not isinstance(out, DensityMatrix):
                out = DensityMatrix(out)
        except InvalidStateError as exc:
            raise InvalidDynamicsError(f"{self.label}: output is not a density matrix ({exc})") from exc
        if out.dim != self.out_dim:
            raise InvalidDynamicsError(f"{self.label}: output dim {out.dim}, declared {self.out_dim}")
        return out

    @classmethod
    def from_linear(cls, map_: LinearMapSpec) -> "DynamicsMap":
        def evaluate(psi: PureState) -> DensityMatrix:
            return DensityMatrix(hermitize(apply_matrix(map_, psi.projector())))

        label = map_.name if map_.kind == "builtin" else map_.kind
        return cls(map_.dim_in, map_.dim_out, evaluate, "linear", f"linear:{label}", linear_map=map_)


def _cloner(psi: PureState) -> DensityMatrix:
    p = psi.projector()
    return DensityMatrix(np.kron(p, p))


def mean_field_evolve(psi: np.ndarray, h0: np.ndarray, epsilon: float, t: float, steps: int) -> np.ndarray:
    """Integrate ``i d/dt psi = (H0 + eps <psi|Z|psi> Z) psi`` with RK4.

    The state is renormalized after every step.
    """
    h = t / steps
    psi = np.array(psi, dtype=np.complex128)

    def rhs(v):
        ez = np.real(np.vdot(v, SIGMA_Z @ v))
        return -1j * ((h0 + epsilon * ez * SIGMA_Z) @ v)

    for _ in range(steps):
        k1 = rhs(psi)
        k2 = rhs(psi + 0.5 * h * k1)
        k3 = rhs(psi + 0.5 * h * k2)
        k4 = rhs(psi + h * k3)
        psi = psi + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        psi /= np.linalg.norm(psi)
    return psi


def builtin_nonlinear(name: str, params: Mapping | None = None) -> DynamicsMap:
    """Built-in nonlinear dynamics.

    ``perfect-cloner``: ``P_psi -> P_psi (x) P_psi``; ``params`` may set
    ``dim`` (default 2).

    ``mean-field-qubit``: evolution under ``H0 + eps <Z> Z``; ``params`` are
    ``H0`` (2x2 Hermitian), ``epsilon``, ``t`` and ``steps`` (default 1000).
    Missing entries fall back to the documented demo values.
    """
    params = dict(params or {})
    if name == "perfect-cloner":
        unknown = set(params) - {"dim"}
        if unknown:
            raise ValueError(f"unknown perfect-cloner parameters {sorted(unknown)}")
        dim = int(params.get("dim", 2))
        return DynamicsMap(dim, dim * dim, _cloner, "builtin-nonlinear", name, params={"dim": dim})
    if name == "mean-field-qubit":
        unknown = set(params) - set(MEAN_FIELD_DEMO)
        if unknown:
            raise ValueError(f"unknown mean-field parameters {sorted(unknown)}")
        merged = {**MEAN_FIELD_DEMO, **params}
        h0 = np.asarray(merged["H0"], dtype=np.complex128)
        if h0.shape != (2, 2) or np.max(np.abs(h0 - h0.conj().T)) > 1e-12:
            raise ValueError("H0 must be a 2x2 Hermitian matrix")
        eps, t, steps = float(merged["epsilon"]), float(merged["t"]), int(merged["steps"])
        if steps < 1:
            raise ValueError("steps must be positive")

        def evaluate(psi: PureState) -> DensityMatrix:
            out = mean_field_evolve(psi.amplitudes, h0, eps, t, steps)
            return DensityMatrix(np.outer(out, out.conj()))

        stored = {"H0": h0, "epsilon": eps, "t": t, "steps": steps}
        return DynamicsMap(2, 2, evaluate, "builtin-nonlinear", name, params=stored)
    raise ValueError(f"unknown builtin dynamics {name!r}")


def evolve_ensemble(g: DynamicsMap, e: Ensemble) -> tuple[list[tuple[float, DensityMatrix]], DensityMatrix]:
    """Evolve each member; return the members and their weighted average."""
    if e.dim != g.in_dim:
        raise DimensionMismatchError(f"ensemble dim {e.dim}, dynamics expects {g.in_dim}")
    evolved = [(p, g(s)) for p, s in e.members]
    avg = sum(p * out.matrix for p, out in evolved)
    return evolved, DensityMatrix(hermitize(avg))


def _require_same_density(e1: Ensemble, e2: Ensemble) -> None:
    if e1.dim != e2.dim:
        raise DimensionMismatchError("ensembles live in different dimensions")
    dist = trace_distance(ensemble_density(e1), ensemble_density(e2))
    if dist > DENSITY_MATCH_TOL:
        raise MismatchedDensityError(dist, f"ensembles mix to different states (trace distance {dist:.3e})")


def linearity_residual(g: DynamicsMap, e1: Ensemble, e2: Ensemble) -> float:
    """Trace distance between the evolved averages of two same-density ensembles."""
    _require_same_density(e1, e2)
    return trace_distance(evolve_ensemble(g, e1)[1], evolve_ensemble(g, e2)[1])


@dataclass(frozen=True)
class HelstromMeasurement:
    """Two-outcome projective measurement; outcome 0 guesses the first state."""

    projectors: tuple[np.ndarray, np.ndarray]
    success_probability: float


def helstrom(rho1: DensityMatrix, rho2: DensityMatrix) -> HelstromMeasurement:
    """Optimal equal-prior discrimination of two states."""
    if rho1.dim != rho2.dim:
        raise DimensionMismatchError("cannot discriminate states of different dimension")
    w, v = np.linalg.eigh(hermitize(rho1.matrix - rho2.matrix))
    pos = v[:, w >= 0]
    p0 = pos @ pos.conj().T
    p1 = np.eye(rho1.dim) - p0
    return HelstromMeasurement((p0, p1), 0.5 + 0.5 * trace_distance_matrix(rho1.matrix, rho2.matrix))


@dataclass(frozen=True)
class EmpiricalRecord:
    seed: int | None
    shots: int
    successes: int
    expected_rate: float

    @property
    def empirical_rate(self) -> float | None:
        return self.successes / self.shots if self.shots else None

    @property
    def p_value(self) -> float | None:
        """Two-sided binomial p-value against a fair coin."""
        if not self.shots:
            return None
        return float(binomtest(self.successes, self.shots, 0.5).pvalue)

    @property
    def sigma(self) -> float | None:
        return 0.5 / math.sqrt(self.shots) if self.shots else None


@dataclass(frozen=True)
class SignalingReport:
    rho: DensityMatrix
    ensemble_a: Ensemble
    ensemble_b: Ensemble
    output_a: DensityMatrix
    output_b: DensityMatrix
    residual: float
    discriminator: HelstromMeasurement
    empirical: EmpiricalRecord | None = None

    @property
    def helstrom_success(self) -> float:
        return self.discriminator.success_probability

    @property
    def verdict(self) -> str:
        return "signaling-detected" if self.residual > SIGNALING_THRESHOLD else "no-signaling-consistent"


def compare_ensembles(g: DynamicsMap, e1: Ensemble, e2: Ensemble) -> SignalingReport:
    """Signaling report for one explicit same-density pair."""
    _require_same_density(e1, e2)
    out1 = evolve_ensemble(g, e1)[1]
    out2 = evolve_ensemble(g, e2)[1]
    disc = helstrom(out1, out2)
    return SignalingReport(
        rho=ensemble_density(e1),
        ensemble_a=e1,
        ensemble_b=e2,
        output_a=out1,
        output_b=out2,
        residual=trace_distance(out1, out2),
        discriminator=disc,
    )


def signaling_test(g: DynamicsMap, rho: DensityMatrix, n_pairs: int, m: int, seed=None) -> SignalingReport:
    """Search random decomposition pairs of ``rho`` for a signaling witness.

    Each of the ``n_pairs`` rounds draws two random ``m``-member
    decompositions and compares them with each other and with the spectral
    decomposition. The report for the largest residual is returned.
    """
    if rho.dim != g.in_dim:
        raise DimensionMismatchError(f"rho has dim {rho.dim}, dynamics expects {g.in_dim}")
    if rho.rank() < 2:
        raise DegenerateInputError("a pure rho has a unique decomposition; nothing to test")
    if n_pairs < 1:
        raise ValueError("n_pairs must be positive")
    seeds = np.random.SeedSequence(seed).spawn(2 * n_pairs)
    eigen = eigen_decomposition(rho)
    eigen_avg = evolve_ensemble(g, eigen)[1]
    best = None
    for k in range(n_pairs):
        e1 = random_decomposition(rho, m, np.random.default_rng(seeds[2 * k]))
        e2 = random_decomposition(rho, m, np.random.default_rng(seeds[2 * k + 1]))
        avg1 = evolve_ensemble(g, e1)[1]
        avg2 = evolve_ensemble(g, e2)[1]
        for ea, aa, eb, ab in ((e1, avg1, e2, avg2), (eigen, eigen_avg, e1, avg1)):
            r = trace_distance(aa, ab)
            if best is None or r > best[0]:
                best = (r, ea, aa, eb, ab)
    r, ea, aa, eb, ab = best
    return SignalingReport(rho, ea, eb, aa, ab, r, helstrom(aa, ab))


def _chunk_successes(seed: int, chunk: int, shots: int, probs: tuple[np.ndarray, np.ndarray],
                     correct: tuple[np.ndarray, np.ndarray]) -> int:
    rng = np.random.default_rng([seed, chunk])
    bits = rng.integers(0, 2, size=shots)
    wins = 0
    for b in (0, 1):
        n_b = int(np.sum(bits == b))
        if not n_b:
            continue
        outcomes = rng.choice(len(probs[b]), size=n_b, p=probs[b])
        wins += int(np.sum(rng.random(n_b) < correct[b][outcomes]))
    return wins


def simulate_experiment(
    g: DynamicsMap,
    shared,
    proto_a: SteeringProtocol,
    proto_b: SteeringProtocol,
    shots: int,
    seed: int = 0,
    workers: int = 1,
) -> tuple[EmpiricalRecord, SignalingReport]:
    """Finite-shot version of the Alice/Bob signaling game.

    Each shot Bob picks protocol A or B with a fair coin and measures; his
    outcome leaves Alice's system in the predicted state, which evolves under
    ``g``; Alice measures the Helstrom discriminator of the two evolved
    averages and guesses Bob's bit.

    Shots are drawn in fixed chunks seeded by ``(seed, chunk index)``, so the
    record does not depend on ``workers``.
    """
    for name, proto in (("A", proto_a), ("B", proto_b)):
        rep = verify_steering(proto, shared)
        if not rep.passed:
            raise UnverifiedProtocolError(f"protocol {name} fails verification (deviation {rep.max_deviation:.3e})")
    report = compare_ensembles(g, proto_a.predicted, proto_b.predicted)
    p_guess_a, p_guess_b = report.discriminator.projectors

    probs, correct = [], []
    for proto, proj in ((proto_a, p_guess_a), (proto_b, p_guess_b)):
        e = proto.predicted
        probs.append(e.probabilities / e.probabilities.sum())
        correct.append(np.array([
            min(1.0, max(0.0, float(np.real(np.trace(proj @ g(s).matrix))))) for s in e.states
        ]))
    probs, correct = tuple(probs), tuple(correct)

    seed = int(seed)
    sizes = [min(SHOT_CHUNK, shots - start) for start in range(0, shots, SHOT_CHUNK)]
    jobs = [(seed, i, n, probs, correct) for i, n in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            wins = sum(pool.map(lambda a: _chunk_successes(*a), jobs))
    else:
        wins = sum(_chunk_successes(*a) for a in jobs)
    record = EmpiricalRecord(seed=seed, shots=int(shots), successes=int(wins),
                             expected_rate=report.helstrom_success)
    return record, SignalingReport(report.rho, report.ensemble_a, report.ensemble_b, report.output_a,
                                   report.output_b, report.residual, report.discriminator, record)
