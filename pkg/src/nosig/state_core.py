"""Finite-dimensional states and the static rules of quantum mechanics.

Conventions used throughout the package:

* Subsystem A is the slow (leftmost) tensor factor. A joint index is
  ``a * dim_b + b``.
* All arrays are dense ``complex128`` and read-only once wrapped in a state
  object.
* Pure states are compared by fidelity, never componentwise, so global
  phases are irrelevant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidStateError,
    NumericalIntegrityError,
    OutcomeImpossibleError,
)

EIGEN_CUTOFF = 1e-12
NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
PSD_TOL = 1e-9
PROJECTOR_TOL = 1e-10
PROBABILITY_SUM_TOL = 1e-9
IMPOSSIBLE_OUTCOME = 1e-12


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def min_eigenvalue(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(hermitize(np.asarray(m)))[0])


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1 or amps.size < 1:
            raise InvalidStateError("pure state needs a nonempty 1-d amplitude vector")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidStateError(f"pure state norm is {norm!r}, expected 1")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, vec) -> "PureState":
        vec = np.asarray(vec, dtype=np.complex128)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise InvalidStateError("cannot normalize the zero vector")
        return cls(vec / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> "PureState":
        vec = np.zeros(dim, dtype=np.complex128)
        vec[index] = 1.0
        return cls(vec)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.projector())


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    matrix: np.ndarray
    is_state = True

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise InvalidStateError(f"density matrix must be square, got shape {m.shape}")
        dev = np.max(np.abs(m - m.conj().T))
        if dev > HERMITIAN_TOL:
            raise InvalidStateError(f"matrix is not Hermitian (deviation {dev:.3e})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"trace is {tr!r}, expected 1")
        lam = min_eigenvalue(m)
        if lam < -PSD_TOL * m.shape[0]:
            raise InvalidStateError(f"matrix is not positive semidefinite (eigenvalue {lam:.3e})")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(hermitize(self.matrix))

    def rank(self, cutoff: float = EIGEN_CUTOFF) -> int:
        return int(np.sum(self.eigenvalues() > cutoff))


@dataclass(frozen=True, eq=False)
class BipartiteState:
    dim_a: int
    dim_b: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes).reshape(-1)
        if self.dim_a < 1 or self.dim_b < 1:
            raise InvalidStateError("subsystem dimensions must be positive")
        if amps.size != self.dim_a * self.dim_b:
            raise DimensionMismatchError(
                f"{amps.size} amplitudes do not fit dims ({self.dim_a}, {self.dim_b})"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidStateError(f"bipartite state norm is {norm!r}, expected 1")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_a, self.dim_b)

    def coefficients(self) -> np.ndarray:
        """Amplitudes as a ``dim_a x dim_b`` matrix."""
        return self.amplitudes.reshape(self.dim_a, self.dim_b)

    def density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def as_pure(self) -> PureState:
        return PureState(self.amplitudes)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Weighted pure states. Zero-weight members are dropped on construction."""

    members: tuple[tuple[float, PureState], ...]

    def __post_init__(self):
        kept = []
        for p, state in self.members:
            p = float(p)
            if not isinstance(state, PureState):
                state = PureState(state)
            if p < -PROBABILITY_SUM_TOL or p > 1 + PROBABILITY_SUM_TOL:
                raise InvalidStateError(f"member probability {p!r} outside [0, 1]")
            if p > 0:
                kept.append((p, state))
        if not kept:
            raise InvalidStateError("ensemble has no member with positive probability")
        dims = {s.dim for _, s in kept}
        if len(dims) != 1:
            raise DimensionMismatchError(f"ensemble members have mixed dimensions {sorted(dims)}")
        total = sum(p for p, _ in kept)
        if abs(total - 1.0) > PROBABILITY_SUM_TOL:
            raise InvalidStateError(f"ensemble probabilities sum to {total!r}")
        object.__setattr__(self, "members", tuple(kept))

    @property
    def dim(self) -> int:
        return self.members[0][1].dim

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for p, _ in self.members])

    @property
    def states(self) -> list[PureState]:
        return [s for _, s in self.members]

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class SchmidtDecomposition:
    coefficients: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    @property
    def rank(self) -> int:
        return self.coefficients.size

    def reconstruct(self) -> np.ndarray:
        return np.einsum(
            "k,ka,kb->ab", np.sqrt(self.coefficients), self.left_vectors, self.right_vectors
        ).reshape(-1)


@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    projectors: tuple[np.ndarray, ...]

    def __post_init__(self):
        projs = tuple(_frozen(p) for p in self.projectors)
        if not projs:
            raise InvalidStateError("measurement needs at least one projector")
        dim = projs[0].shape[0]
        eye = np.eye(dim)
        for i, p in enumerate(projs):
            if p.shape != (dim, dim):
                raise DimensionMismatchError("projectors must share one square shape")
            if np.max(np.abs(p - p.conj().T)) > PROJECTOR_TOL:
                raise InvalidStateError(f"projector {i} is not Hermitian")
            if np.max(np.abs(p @ p - p)) > PROJECTOR_TOL:
                raise InvalidStateError(f"projector {i} is not idempotent")
            for j in range(i):
                if np.max(np.abs(p @ projs[j])) > PROJECTOR_TOL:
                    raise InvalidStateError(f"projectors {j} and {i} are not orthogonal")
        if np.max(np.abs(sum(projs) - eye)) > PROJECTOR_TOL:
            raise InvalidStateError("projectors do not sum to the identity")
        object.__setattr__(self, "projectors", projs)

    @classmethod
    def from_basis(cls, basis: np.ndarray) -> "ProjectiveMeasurement":
        """Rank-1 measurement onto the columns of a unitary matrix."""
        basis = np.asarray(basis)
        return cls(tuple(np.outer(basis[:, i], basis[:, i].conj()) for i in range(basis.shape[1])))

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def __len__(self) -> int:
        return len(self.projectors)


StateLike = Union[DensityMatrix, PureState, BipartiteState]


def as_density(state: StateLike) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, (PureState, BipartiteState)):
        return state.density()
    raise TypeError(f"expected a state, got {type(state).__name__}")


def tensor(a, b):
    """Kronecker product of two states.

    Two pure states give a pure state; if either factor is a density matrix
    the result is a density matrix.
    """
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes))
    return DensityMatrix(np.kron(as_density(a).matrix, as_density(b).matrix))


def _check_dims(total: int, dims: Sequence[int]) -> tuple[int, int]:
    dim_a, dim_b = (int(d) for d in dims)
    if dim_a * dim_b != total:
        raise DimensionMismatchError(f"dimension {total} is not {dim_a} x {dim_b}")
    return dim_a, dim_b


def partial_trace_matrix(m: np.ndarray, keep: Literal["A", "B"], dims: Sequence[int]) -> np.ndarray:
    """Partial trace of an arbitrary operator on ``dims[0] * dims[1]``."""
    dim_a, dim_b = _check_dims(m.shape[0], dims)
    t = np.asarray(m).reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "A":
        return np.einsum("ibjb->ij", t)
    if keep == "B":
        return np.einsum("aiaj->ij", t)
    raise ValueError(f"keep must be 'A' or 'B', not {keep!r}")


def partial_trace(rho: StateLike, keep: Literal["A", "B"], dims: Sequence[int] | None = None) -> DensityMatrix:
    """Reduced density matrix on the kept factor.

    ``dims`` may be omitted for a :class:`BipartiteState`, which carries its
    own dimensions.
    """
    if dims is None:
        if not isinstance(rho, BipartiteState):
            raise DimensionMismatchError("dims are required unless rho is a BipartiteState")
        dims = rho.dims
    if isinstance(rho, BipartiteState):
        c = rho.coefficients()
        if tuple(dims) != rho.dims:
            raise DimensionMismatchError(f"dims {tuple(dims)} do not match state dims {rho.dims}")
        reduced = c @ c.conj().T if keep == "A" else c.T @ c.conj()
        if keep not in ("A", "B"):
            raise ValueError(f"keep must be 'A' or 'B', not {keep!r}")
        return DensityMatrix(hermitize(reduced))
    rho = as_density(rho)
    return DensityMatrix(hermitize(partial_trace_matrix(rho.matrix, keep, dims)))


def ensemble_density(e: Ensemble) -> DensityMatrix:
    vecs = np.array([s.amplitudes for s in e.states])
    return DensityMatrix(hermitize(np.einsum("i,ia,ib->ab", e.probabilities, vecs, vecs.conj())))


def schmidt(psi: BipartiteState, cutoff: float = EIGEN_CUTOFF) -> SchmidtDecomposition:
    """Schmidt decomposition via SVD of the coefficient matrix.

    ``coefficients`` are the squared singular values (eigenvalues of the
    reduced state), descending, with everything at or below ``cutoff``
    discarded. Row ``k`` of ``left_vectors``/``right_vectors`` holds the
    k-th Schmidt vector of A/B.
    """
    u, s, vh = np.linalg.svd(psi.coefficients())
    lam = s**2
    keep = lam > cutoff
    r = int(np.sum(keep))
    return SchmidtDecomposition(
        coefficients=lam[:r],
        left_vectors=u[:, :r].T.copy(),
        right_vectors=vh[:r, :].copy(),
    )


def purify(rho: DensityMatrix, cutoff: float = EIGEN_CUTOFF) -> BipartiteState:
    """Canonical purification ``sum_k sqrt(l_k) |v_k>|k>`` with ``dim_b = rank``."""
    w, v = np.linalg.eigh(hermitize(rho.matrix))
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    r = int(np.sum(w > cutoff))
    w = w[:r] / np.sum(w[:r])
    coeffs = v[:, :r] * np.sqrt(w)[np.newaxis, :]
    return BipartiteState(rho.dim, r, coeffs.reshape(-1) / np.linalg.norm(coeffs))


def _clamp_probability(p: float) -> float:
    if p < -1e-10 or p > 1 + 1e-10:
        raise NumericalIntegrityError(f"probability {p!r} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def joint_probability(rho_ab: StateLike, p_a: np.ndarray, p_b: np.ndarray) -> float:
    """Trace-rule probability ``Tr[rho_AB (P_A x P_B)]``."""
    rho = as_density(rho_ab).matrix
    op = np.kron(np.asarray(p_a), np.asarray(p_b))
    if op.shape != rho.shape:
        raise DimensionMismatchError(f"projector product has shape {op.shape}, state {rho.shape}")
    return _clamp_probability(float(np.real(np.trace(rho @ op))))


def conditional_state(
    rho_ab: StateLike, p_b: np.ndarray, dims: Sequence[int] | None = None
) -> tuple[float, DensityMatrix]:
    """State of A given that B found ``p_b``.

    Returns ``(probability, state)``. Raises :class:`OutcomeImpossibleError`
    when the outcome probability is at most 1e-12.
    """
    if dims is None:
        if not isinstance(rho_ab, BipartiteState):
            raise DimensionMismatchError("dims are required unless rho_ab is a BipartiteState")
        dims = rho_ab.dims
    p_b = np.asarray(p_b)
    dim_a, dim_b = _check_dims(as_density(rho_ab).dim, dims)
    if p_b.shape != (dim_b, dim_b):
        raise DimensionMismatchError(f"projector shape {p_b.shape} does not act on dim {dim_b}")
    if isinstance(rho_ab, BipartiteState):
        c = rho_ab.coefficients()
        unnorm = c @ p_b.T @ c.conj().T
    else:
        t = rho_ab.matrix.reshape(dim_a, dim_b, dim_a, dim_b)
        unnorm = np.einsum("ibjc,cb->ij", t, p_b)
    prob = _clamp_probability(float(np.real(np.trace(unnorm))))
    if prob <= IMPOSSIBLE_OUTCOME:
        raise OutcomeImpossibleError(prob)
    return prob, DensityMatrix(hermitize(unnorm) / prob)


def trace_distance(rho: StateLike, sigma: StateLike) -> float:
    a, b = as_density(rho).matrix, as_density(sigma).matrix
    if a.shape != b.shape:
        raise DimensionMismatchError(f"cannot compare shapes {a.shape} and {b.shape}")
    return trace_distance_matrix(a, b)


def trace_distance_matrix(a: np.ndarray, b: np.ndarray) -> float:
    d = 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(a - b)))))
    return min(d, 1.0)


def fidelity_pure(rho: StateLike, psi: PureState) -> float:
    """``<psi|rho|psi>``, the fidelity of a state with a pure state."""
    m = as_density(rho).matrix
    v = psi.amplitudes
    return float(np.real(v.conj() @ m @ v))


def states_equal(a: PureState, b: PureState, tol: float = 1e-12) -> bool:
    return abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2 >= 1 - tol


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-random unitary (QR of a Ginibre matrix with the phase fix)."""
    q, r = np.linalg.qr(_ginibre(_rng(seed), dim, dim))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases[np.newaxis, :]


def random_pure(dim: int, seed=None) -> PureState:
    return PureState.normalized(_ginibre(_rng(seed), dim, 1)[:, 0])


def random_density(dim: int, rank: int | None = None, seed=None) -> DensityMatrix:
    """Random density matrix ``G G^dag / Tr`` from a ``dim x rank`` Ginibre matrix."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must be in [1, {dim}], got {rank}")
    g = _ginibre(_rng(seed), dim, rank)
    m = g @ g.conj().T
    return DensityMatrix(hermitize(m / np.trace(m).real))


def maximally_mixed(dim: int) -> DensityMatrix:
    return DensityMatrix(np.eye(dim) / dim)


def bell_state() -> BipartiteState:
    """``(|00> + |11>) / sqrt(2)``."""
    return BipartiteState(2, 2, np.array([1, 0, 0, 1]) / np.sqrt(2))
