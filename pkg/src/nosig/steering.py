"""Remote preparation of ensemble decompositions by measuring the far side.

Given any pure joint state whose A-reduction is ``rho``, and any ensemble
``{x_i, psi_i}`` that mixes to ``rho``, :func:`build_steering` returns the
local operations on B that prepare that ensemble in A:

1. embed B into an ``n``-dimensional space (``n = max(m, dim_b)``), the
   original B space occupying the first ``dim_b`` coordinates;
2. rotate with a unitary ``U_B`` that sends each Schmidt partner ``|g_k>``
   to ``|h_k> = sum_i sqrt(x_i / l_k) <v_k|psi_i> |alpha_i>``;
3. measure in the computational basis ``{|alpha_i>}``.

Outcome ``i`` then occurs with probability ``x_i`` and leaves A in
``|psi_i>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    InfeasibleEnsembleError,
    MismatchedDensityError,
    OutcomeImpossibleError,
)
from .state_core import (
    EIGEN_CUTOFF,
    BipartiteState,
    DensityMatrix,
    Ensemble,
    ProjectiveMeasurement,
    PureState,
    conditional_state,
    ensemble_density,
    fidelity_pure,
    partial_trace,
    purify,
    random_unitary,
    schmidt,
    states_equal,
    trace_distance,
)

DENSITY_MATCH_TOL = 1e-8
STEERING_TOL = 1e-8
SUPPORT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SteeringProtocol:
    source_dim_b: int
    ancilla_dim: int
    unitary_b: np.ndarray
    predicted: Ensemble

    @property
    def extended_dim(self) -> int:
        return self.source_dim_b + self.ancilla_dim

    @property
    def measurement_vectors(self) -> np.ndarray:
        """Rows are the measured basis vectors ``|alpha_i>``."""
        return np.eye(self.extended_dim, dtype=np.complex128)

    @property
    def measurement(self) -> ProjectiveMeasurement:
        return ProjectiveMeasurement.from_basis(self.measurement_vectors.T)


@dataclass(frozen=True)
class SteeringReport:
    probabilities: np.ndarray
    probability_deviations: np.ndarray
    fidelity_deviations: np.ndarray

    @property
    def max_probability_deviation(self) -> float:
        return float(np.max(self.probability_deviations))

    @property
    def max_fidelity_deviation(self) -> float:
        return float(np.max(self.fidelity_deviations))

    @property
    def max_deviation(self) -> float:
        return max(self.max_probability_deviation, self.max_fidelity_deviation)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= STEERING_TOL


def orthonormalize(vectors: np.ndarray, against: np.ndarray | None = None, tol: float = 1e-10) -> np.ndarray:
    """Gram-Schmidt with two passes per vector.

    Processes the rows of ``vectors`` in order, projecting out the rows of
    ``against`` and every previously accepted vector; vectors whose residual
    norm falls below ``tol`` are skipped. Returns the accepted rows.
    """
    dim = vectors.shape[1]
    basis = [] if against is None else [row for row in against]
    start = len(basis)
    for v in vectors:
        w = np.array(v, dtype=np.complex128)
        for _ in range(2):
            for b in basis:
                w = w - np.vdot(b, w) * b
        n = np.linalg.norm(w)
        if n > tol:
            basis.append(w / n)
    out = np.array(basis[start:], dtype=np.complex128)
    return out.reshape(-1, dim)


def complete_isometry(domain: np.ndarray, codomain: np.ndarray) -> np.ndarray:
    """Unitary ``U`` with ``U domain[k] = codomain[k]`` for every row ``k``.

    Both arguments hold orthonormal rows of equal count and length. The
    remaining columns map the i-th complement vector of the domain (taken
    from the computational basis by Gram-Schmidt) to the i-th complement
    vector of the codomain.
    """
    n = domain.shape[1]
    eye = np.eye(n, dtype=np.complex128)
    dom_rest = orthonormalize(eye, against=domain)
    cod_rest = orthonormalize(eye, against=codomain)
    dom = np.vstack([domain, dom_rest])
    cod = np.vstack([codomain, cod_rest])
    if dom.shape[0] != n or cod.shape[0] != n:
        raise ArithmeticError("basis completion lost rank")
    # U = sum_k |cod_k><dom_k|
    return cod.T @ dom.conj()


def _embed(vectors: np.ndarray, dim: int) -> np.ndarray:
    out = np.zeros((vectors.shape[0], dim), dtype=np.complex128)
    out[:, : vectors.shape[1]] = vectors
    return out


def build_steering(target: Ensemble, shared: BipartiteState) -> SteeringProtocol:
    """Protocol on B that prepares ``target`` in A from the shared state.

    Raises :class:`MismatchedDensityError` if ``target`` does not mix to the
    A-reduction of ``shared``, and :class:`InfeasibleEnsembleError` if a
    target state has no overlap with the support of that reduction or the
    ensemble is too small.
    """
    if target.dim != shared.dim_a:
        raise DimensionMismatchError(f"target lives in dim {target.dim}, shared A in {shared.dim_a}")
    rho_a = partial_trace(shared, "A")
    dist = trace_distance(ensemble_density(target), rho_a)
    if dist > DENSITY_MATCH_TOL:
        raise MismatchedDensityError(dist)

    dec = schmidt(shared, cutoff=EIGEN_CUTOFF)
    r = dec.rank
    m = len(target)
    if m < r:
        raise InfeasibleEnsembleError(f"{m} target members cannot realize Schmidt rank {r}")

    psis = np.array([s.amplitudes for s in target.states])
    overlaps = dec.left_vectors.conj() @ psis.T  # [k, i] = <v_k|psi_i>
    for i in range(m):
        if np.linalg.norm(overlaps[:, i]) < SUPPORT_TOL:
            raise InfeasibleEnsembleError(f"target state {i} lies outside the support of rho_A")

    n = max(m, shared.dim_b)
    sqrt_x = np.sqrt(target.probabilities)
    h = overlaps * sqrt_x[np.newaxis, :] / np.sqrt(dec.coefficients)[:, np.newaxis]
    h = _embed(h, n)
    g = _embed(dec.right_vectors, n)
    unitary = complete_isometry(g, h)
    return SteeringProtocol(
        source_dim_b=shared.dim_b,
        ancilla_dim=n - shared.dim_b,
        unitary_b=unitary,
        predicted=target,
    )


def extend_shared(shared: BipartiteState, extended_dim: int) -> BipartiteState:
    """Embed B into ``extended_dim`` levels; the ancilla starts in its level 0."""
    if extended_dim < shared.dim_b:
        raise DimensionMismatchError("extension cannot shrink B")
    c = np.zeros((shared.dim_a, extended_dim), dtype=np.complex128)
    c[:, : shared.dim_b] = shared.coefficients()
    return BipartiteState(shared.dim_a, extended_dim, c.reshape(-1))


def steered_state(p: SteeringProtocol, shared: BipartiteState) -> BipartiteState:
    """Shared state after the ancilla extension and ``1 x U_B``."""
    if shared.dim_b != p.source_dim_b:
        raise DimensionMismatchError(f"protocol expects dim_b {p.source_dim_b}, got {shared.dim_b}")
    ext = extend_shared(shared, p.extended_dim)
    c = ext.coefficients() @ p.unitary_b.T
    return BipartiteState(shared.dim_a, p.extended_dim, c.reshape(-1) / np.linalg.norm(c))


def verify_steering(p: SteeringProtocol, shared: BipartiteState) -> SteeringReport:
    """Run the protocol on ``shared`` and compare against its prediction.

    Outcomes beyond the predicted ensemble must have zero probability; their
    probabilities count as deviations.
    """
    state = steered_state(p, shared)
    n = p.extended_dim
    predicted = p.predicted
    probs = np.zeros(n)
    fid_dev = np.zeros(len(predicted))
    vectors = p.measurement_vectors
    for i in range(n):
        proj = np.outer(vectors[i], vectors[i].conj())
        try:
            prob, sigma = conditional_state(state, proj)
        except OutcomeImpossibleError as exc:
            probs[i] = exc.probability
            if i < len(predicted):
                fid_dev[i] = 1.0
            continue
        probs[i] = prob
        if i < len(predicted):
            fid_dev[i] = max(0.0, 1.0 - fidelity_pure(sigma, predicted.states[i]))
    expected = np.zeros(n)
    expected[: len(predicted)] = predicted.probabilities
    return SteeringReport(
        probabilities=probs,
        probability_deviations=np.abs(probs - expected),
        fidelity_deviations=fid_dev,
    )


def _merge_duplicates(members: list[tuple[float, PureState]]) -> list[tuple[float, PureState]]:
    merged: list[list] = []
    for p, s in members:
        for entry in merged:
            if states_equal(entry[1], s):
                entry[0] += p
                break
        else:
            merged.append([p, s])
    return [(p, s) for p, s in merged]


def ensemble_from_measurement(shared: BipartiteState, basis: np.ndarray) -> Ensemble:
    """Ensemble steered in A by measuring B in the columns of ``basis``."""
    c = shared.coefficients()
    members = []
    for i in range(basis.shape[1]):
        unnorm = c @ basis[:, i].conj()
        p = float(np.real(np.vdot(unnorm, unnorm)))
        if p > EIGEN_CUTOFF:
            members.append((p, PureState.normalized(unnorm)))
    members = _merge_duplicates(members)
    total = sum(p for p, _ in members)
    return Ensemble(tuple((p / total, s) for p, s in members))


def random_decomposition(rho: DensityMatrix, m: int, seed=None) -> Ensemble:
    """Random ``m``-outcome decomposition of ``rho``.

    Measures the canonical purification, extended to ``m`` levels, in a
    Haar-random basis. Members whose states coincide are merged, so a pure
    ``rho`` always yields the single-member ensemble.
    """
    shared = purify(rho)
    if m < shared.dim_b:
        raise InfeasibleEnsembleError(f"m = {m} is below rank {shared.dim_b}")
    ext = extend_shared(shared, m)
    return ensemble_from_measurement(ext, random_unitary(m, seed))


def eigen_decomposition(rho: DensityMatrix) -> Ensemble:
    """Spectral ensemble ``{l_k, |v_k>}`` of ``rho``."""
    dec = schmidt(purify(rho))
    lam = dec.coefficients / dec.coefficients.sum()
    return Ensemble(tuple((float(l), PureState.normalized(v)) for l, v in zip(lam, dec.left_vectors)))
