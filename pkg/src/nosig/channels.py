"""Linear maps on density matrices: Choi and Kraus forms, CP/TP certification.

Choi convention (unnormalized, input factor first)::

    J = sum_ij |i><j| (x) g(|i><j|)

so a map is completely positive iff ``J >= 0`` and trace preserving iff
``Tr_out J = 1``. A map is applied through its Choi matrix as
``g(rho) = Tr_in[J (rho^T (x) 1)]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import DimensionMismatchError, NotCompletelyPositiveError
from .state_core import (
    DensityMatrix,
    InvalidStateError,
    StateLike,
    _rng,
    as_density,
    hermitize,
    min_eigenvalue,
    partial_trace_matrix,
    random_pure,
)

KRAUS_CUTOFF = 1e-10
CP_TOL = 1e-9
TP_TOL = 1e-9
POSITIVITY_TOL = 1e-9

BuiltinName = Literal["identity", "transpose", "depolarizing", "unitary"]


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    dim_in: int
    dim_out: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        n = self.dim_in * self.dim_out
        if m.shape != (n, n):
            raise DimensionMismatchError(f"Choi matrix of a {self.dim_in}->{self.dim_out} map must be {n}x{n}")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise InvalidStateError("Choi matrix is not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def blocks(self) -> np.ndarray:
        """View as ``[i, a, j, b]`` = ``<a| g(|i><j|) |b>``."""
        return self.matrix.reshape(self.dim_in, self.dim_out, self.dim_in, self.dim_out)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=np.complex128) for k in self.operators)
        if not ops:
            raise ValueError("a Kraus channel needs at least one operator")
        shape = ops[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ops):
            raise DimensionMismatchError("Kraus operators must share one 2-d shape")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    @property
    def dim_in(self) -> int:
        return self.operators[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.operators[0].shape[0]

    def closure_deviation(self) -> float:
        """Max-abs deviation of ``sum K^dag K`` from the identity."""
        s = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(s - np.eye(self.dim_in))))

    @property
    def is_trace_preserving(self) -> bool:
        return self.closure_deviation() <= TP_TOL


@dataclass(frozen=True, eq=False)
class LinearMapSpec:
    """A linear map given as Kraus operators, a Choi matrix, or a named builtin.

    Builtins: ``identity`` and ``transpose`` need ``dim``; ``depolarizing``
    needs ``dim`` and ``lam`` (``rho -> (1-lam) rho + lam Tr(rho) 1/d``);
    ``unitary`` needs ``matrix``.
    """

    kind: Literal["kraus", "choi", "builtin"]
    kraus_channel: KrausChannel | None = None
    choi_matrix: ChoiMatrix | None = None
    name: BuiltinName | None = None
    dim: int | None = None
    lam: float | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind == "kraus" and self.kraus_channel is None:
            raise ValueError("kraus map without operators")
        if self.kind == "choi" and self.choi_matrix is None:
            raise ValueError("choi map without a matrix")
        if self.kind == "builtin":
            if self.name in ("identity", "transpose", "depolarizing"):
                if self.dim is None or self.dim < 1:
                    raise ValueError(f"builtin {self.name} needs a positive dim")
                if self.name == "depolarizing" and (self.lam is None or not 0 <= self.lam <= 1):
                    raise ValueError("depolarizing needs lam in [0, 1]")
            elif self.name == "unitary":
                u = np.asarray(self.matrix, dtype=np.complex128)
                if u.ndim != 2 or u.shape[0] != u.shape[1]:
                    raise DimensionMismatchError("unitary builtin needs a square matrix")
                if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > 1e-10:
                    raise ValueError("unitary builtin matrix is not unitary")
                object.__setattr__(self, "matrix", u)
            else:
                raise ValueError(f"unknown builtin map {self.name!r}")
        elif self.kind not in ("kraus", "choi"):
            raise ValueError(f"unknown map kind {self.kind!r}")

    @classmethod
    def from_kraus(cls, operators: Sequence[np.ndarray]) -> "LinearMapSpec":
        return cls("kraus", kraus_channel=KrausChannel(tuple(operators)))

    @classmethod
    def from_choi(cls, choi: ChoiMatrix) -> "LinearMapSpec":
        return cls("choi", choi_matrix=choi)

    @classmethod
    def identity(cls, dim: int) -> "LinearMapSpec":
        return cls("builtin", name="identity", dim=dim)

    @classmethod
    def transpose(cls, dim: int) -> "LinearMapSpec":
        return cls("builtin", name="transpose", dim=dim)

    @classmethod
    def depolarizing(cls, dim: int, lam: float) -> "LinearMapSpec":
        return cls("builtin", name="depolarizing", dim=dim, lam=float(lam))

    @classmethod
    def unitary(cls, matrix) -> "LinearMapSpec":
        return cls("builtin", name="unitary", matrix=matrix)

    @property
    def dim_in(self) -> int:
        if self.kind == "kraus":
            return self.kraus_channel.dim_in
        if self.kind == "choi":
            return self.choi_matrix.dim_in
        return self.matrix.shape[1] if self.name == "unitary" else self.dim

    @property
    def dim_out(self) -> int:
        if self.kind == "kraus":
            return self.kraus_channel.dim_out
        if self.kind == "choi":
            return self.choi_matrix.dim_out
        return self.matrix.shape[0] if self.name == "unitary" else self.dim

    def kraus(self) -> KrausChannel | None:
        """Kraus form if the map has one that is known without decomposition."""
        if self.kind == "kraus":
            return self.kraus_channel
        if self.kind == "builtin":
            if self.name == "identity":
                return KrausChannel((np.eye(self.dim),))
            if self.name == "unitary":
                return KrausChannel((self.matrix,))
            if self.name == "depolarizing":
                return _depolarizing_kraus(self.dim, self.lam)
        return None

    def choi(self) -> ChoiMatrix:
        if self.kind == "choi":
            return self.choi_matrix
        if self.kind == "builtin" and self.name == "transpose":
            d = self.dim
            swap = np.eye(d * d).reshape(d, d, d, d).transpose(0, 1, 3, 2).reshape(d * d, d * d)
            return ChoiMatrix(d, d, swap)
        return choi_from_kraus(self.kraus())


def weyl_operators(dim: int) -> list[np.ndarray]:
    """The ``dim**2`` clock-and-shift operators ``X^a Z^b``; ``(0, 0)`` first."""
    omega = np.exp(2j * np.pi / dim)
    shift = np.roll(np.eye(dim), 1, axis=0)
    clock = np.diag(omega ** np.arange(dim))
    return [
        np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
        for a in range(dim)
        for b in range(dim)
    ]


def _depolarizing_kraus(dim: int, lam: float) -> KrausChannel:
    # (1/d^2) sum_W W rho W^dag = Tr(rho) 1/d
    ops = weyl_operators(dim)
    weights = [1 - lam + lam / dim**2] + [lam / dim**2] * (dim**2 - 1)
    return KrausChannel(tuple(np.sqrt(w) * w_op for w, w_op in zip(weights, ops) if w > 0))


def choi_from_kraus(c: KrausChannel) -> ChoiMatrix:
    # Column vectors sum_i |i> (x) K|i> stacked per operator.
    vecs = np.array([k.T.reshape(-1) for k in c.operators])
    j = vecs.T @ vecs.conj()
    return ChoiMatrix(c.dim_in, c.dim_out, hermitize(j))


def kraus_from_choi(choi: ChoiMatrix, cutoff: float = KRAUS_CUTOFF) -> KrausChannel:
    """Minimal Kraus form from the eigendecomposition of the Choi matrix.

    Raises :class:`NotCompletelyPositiveError` carrying the most negative
    eigenvalue when it lies below ``-cutoff * dim``.
    """
    w, v = np.linalg.eigh(hermitize(choi.matrix))
    n = choi.matrix.shape[0]
    if w[0] < -cutoff * n:
        raise NotCompletelyPositiveError(float(w[0]))
    ops = []
    for mu, vec in zip(w[::-1], v.T[::-1]):
        if mu <= cutoff:
            break
        ops.append(np.sqrt(mu) * vec.reshape(choi.dim_in, choi.dim_out).T)
    if not ops:
        ops.append(np.zeros((choi.dim_out, choi.dim_in)))
    return KrausChannel(tuple(ops))


@dataclass(frozen=True, eq=False)
class RawMatrix:
    """Hermitian output of a map that is not a valid density matrix."""

    matrix: np.ndarray
    min_eigenvalue: float
    is_state = False

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def apply_kraus(c: KrausChannel, rho: np.ndarray) -> np.ndarray:
    return sum(k @ rho @ k.conj().T for k in c.operators)


def apply_choi(choi: ChoiMatrix, rho: np.ndarray) -> np.ndarray:
    return np.einsum("ij,iajb->ab", rho, choi.blocks())


def apply_matrix(map_: LinearMapSpec, rho: np.ndarray, route: Literal["auto", "kraus", "choi"] = "auto") -> np.ndarray:
    """Map an arbitrary ``dim_in x dim_in`` matrix; no state checks."""
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (map_.dim_in, map_.dim_in):
        raise DimensionMismatchError(f"map expects dim {map_.dim_in}, got shape {rho.shape}")
    if route == "choi":
        return apply_choi(map_.choi(), rho)
    if map_.kind == "builtin" and map_.name == "transpose" and route == "auto":
        return rho.T.copy()
    kraus = map_.kraus()
    if kraus is None:
        if route == "kraus":
            raise NotCompletelyPositiveError(min_eigenvalue(map_.choi().matrix))
        return apply_choi(map_.choi(), rho)
    return apply_kraus(kraus, rho)


def to_state_or_raw(m: np.ndarray) -> DensityMatrix | RawMatrix:
    m = hermitize(m)
    try:
        return DensityMatrix(m)
    except InvalidStateError:
        return RawMatrix(m, min_eigenvalue(m))


def apply(map_: LinearMapSpec, rho: StateLike, route: Literal["auto", "kraus", "choi"] = "auto") -> DensityMatrix | RawMatrix:
    """Apply a linear map to a state.

    Returns a :class:`DensityMatrix` when the output is a valid state and a
    flagged :class:`RawMatrix` otherwise (e.g. non-positive or non-TP maps).
    """
    return to_state_or_raw(apply_matrix(map_, as_density(rho).matrix, route))


def is_completely_positive(choi: ChoiMatrix) -> tuple[bool, float]:
    lam = min_eigenvalue(choi.matrix)
    return lam >= -CP_TOL * choi.matrix.shape[0], lam


def is_trace_preserving(choi: ChoiMatrix) -> tuple[bool, float]:
    reduced = partial_trace_matrix(choi.matrix, "A", (choi.dim_in, choi.dim_out))
    dev = float(np.max(np.abs(reduced - np.eye(choi.dim_in))))
    return dev <= TP_TOL, dev


def is_positive_sampled(map_: LinearMapSpec, n_samples: int, seed=None) -> tuple[bool, float]:
    """Sampled positivity check: a necessary condition only.

    Applies the map to ``n_samples`` Haar-random pure states and returns
    ``(worst >= -1e-9, worst)`` where ``worst`` is the smallest output
    eigenvalue seen. Passing does not prove positivity.
    """
    rng = _rng(seed)
    worst = np.inf
    for _ in range(n_samples):
        psi = random_pure(map_.dim_in, rng)
        worst = min(worst, min_eigenvalue(apply_matrix(map_, psi.projector())))
    return bool(worst >= -POSITIVITY_TOL), float(worst)


def extend_and_apply(map_: LinearMapSpec, rho_ab: StateLike, dims: Sequence[int]) -> tuple[np.ndarray, float]:
    """Apply ``map (x) 1_B`` to a joint state.

    Returns the (possibly non-positive) output matrix on ``dim_out * dim_b``
    and its minimum eigenvalue.
    """
    dim_a, dim_b = (int(d) for d in dims)
    rho = as_density(rho_ab).matrix
    if rho.shape != (dim_a * dim_b,) * 2 or dim_a != map_.dim_in:
        raise DimensionMismatchError(f"cannot apply a {map_.dim_in}-dim map to A of dims {tuple(dims)}")
    t = rho.reshape(dim_a, dim_b, dim_a, dim_b)
    out = np.einsum("ibjc,iajd->abdc", t, map_.choi().blocks())
    d_out = map_.dim_out * dim_b
    out = hermitize(out.reshape(d_out, d_out))
    return out, min_eigenvalue(out)


def random_channel(dim_in: int, dim_out: int | None = None, n_kraus: int | None = None, seed=None) -> LinearMapSpec:
    """Random CPTP map from a random isometry ``dim_in -> n_kraus * dim_out``."""
    dim_out = dim_in if dim_out is None else dim_out
    rng = _rng(seed)
    min_kraus = -(-dim_in // dim_out)
    if n_kraus is None:
        n_kraus = int(rng.integers(min_kraus, dim_in * dim_out + 1))
    if n_kraus < min_kraus:
        raise ValueError(f"an isometry needs at least {min_kraus} Kraus operators")
    g = rng.standard_normal((n_kraus * dim_out, dim_in)) + 1j * rng.standard_normal((n_kraus * dim_out, dim_in))
    v, _ = np.linalg.qr(g)
    return LinearMapSpec.from_kraus([v[k * dim_out:(k + 1) * dim_out] for k in range(n_kraus)])
