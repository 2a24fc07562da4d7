"""Strict input schemas for scenario files (unknown fields are rejected)."""

from __future__ import annotations

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .channels import ChoiMatrix, LinearMapSpec
from .encoding import matrix_from_json, vector_from_json
from .signaling_lab import DynamicsMap, builtin_nonlinear
from .state_core import BipartiteState, DensityMatrix, Ensemble, PureState

Scalar = tuple[float, float]
Vector = list[Scalar]
Matrix = list[list[Scalar]]


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, strict=True)


class DensityIn(Strict):
    dim: int = Field(ge=1)
    matrix: Matrix

    def to_domain(self) -> DensityMatrix:
        m = matrix_from_json(self.matrix)
        if m.shape != (self.dim, self.dim):
            raise ValueError(f"matrix shape {m.shape} does not match dim {self.dim}")
        return DensityMatrix(m)


class BipartiteIn(Strict):
    dimA: int = Field(ge=1)
    dimB: int = Field(ge=1)
    amplitudes: Vector

    def to_domain(self) -> BipartiteState:
        return BipartiteState(self.dimA, self.dimB, vector_from_json(self.amplitudes))


class MemberIn(Strict):
    p: float = Field(ge=0, le=1)
    state: Vector

    @field_validator("state")
    @classmethod
    def _nonempty(cls, v):
        if not v:
            raise ValueError("state must be nonempty")
        return v


def ensemble_from_members(members: list[MemberIn]) -> Ensemble:
    if not members:
        raise ValueError("ensemble must have at least one member")
    return Ensemble(tuple((m.p, PureState(vector_from_json(m.state))) for m in members))


class KrausIn(Strict):
    kind: Literal["kraus"]
    dimIn: int = Field(ge=1)
    dimOut: int = Field(ge=1)
    operators: list[Matrix] = Field(min_length=1)

    def to_domain(self) -> LinearMapSpec:
        ops = [matrix_from_json(k) for k in self.operators]
        for k in ops:
            if k.shape != (self.dimOut, self.dimIn):
                raise ValueError(f"Kraus operator shape {k.shape} is not ({self.dimOut}, {self.dimIn})")
        return LinearMapSpec.from_kraus(ops)


class ChoiIn(Strict):
    kind: Literal["choi"]
    dimIn: int = Field(ge=1)
    dimOut: int = Field(ge=1)
    matrix: Matrix

    def to_domain(self) -> LinearMapSpec:
        return LinearMapSpec.from_choi(ChoiMatrix(self.dimIn, self.dimOut, matrix_from_json(self.matrix)))


class BuiltinIn(Strict):
    model_config = ConfigDict(extra="forbid", frozen=True, strict=True, populate_by_name=True)

    kind: Literal["builtin"]
    dimIn: int = Field(ge=1)
    dimOut: int = Field(ge=1)
    name: Literal["identity", "transpose", "depolarizing", "unitary"]
    lam: Optional[float] = Field(default=None, alias="lambda")
    matrix: Optional[Matrix] = None

    def to_domain(self) -> LinearMapSpec:
        if self.dimIn != self.dimOut:
            raise ValueError("builtin maps have dimIn == dimOut")
        if self.name == "unitary":
            if self.matrix is None:
                raise ValueError("unitary builtin needs 'matrix'")
            m = LinearMapSpec.unitary(matrix_from_json(self.matrix))
            if m.dim_in != self.dimIn:
                raise ValueError("unitary matrix does not match dimIn")
            return m
        if self.matrix is not None:
            raise ValueError(f"builtin {self.name} takes no matrix")
        if self.name == "depolarizing":
            if self.lam is None:
                raise ValueError("depolarizing needs 'lambda'")
            return LinearMapSpec.depolarizing(self.dimIn, self.lam)
        if self.lam is not None:
            raise ValueError(f"builtin {self.name} takes no lambda")
        return LinearMapSpec("builtin", name=self.name, dim=self.dimIn)


ChannelIn = Annotated[Union[KrausIn, ChoiIn, BuiltinIn], Field(discriminator="kind")]


class LinearDynamicsIn(Strict):
    kind: Literal["linear"]
    channel: ChannelIn

    def to_domain(self) -> DynamicsMap:
        return DynamicsMap.from_linear(self.channel.to_domain())


class ClonerParams(Strict):
    dim: int = Field(default=2, ge=1)


class MeanFieldParams(Strict):
    H0: Optional[Matrix] = None
    epsilon: Optional[float] = None
    t: Optional[float] = None
    steps: Optional[int] = Field(default=None, ge=1)


class ClonerIn(Strict):
    kind: Literal["builtin"]
    name: Literal["perfect-cloner"]
    params: ClonerParams = ClonerParams()

    def to_domain(self) -> DynamicsMap:
        return builtin_nonlinear(self.name, self.params.model_dump())


class MeanFieldIn(Strict):
    kind: Literal["builtin"]
    name: Literal["mean-field-qubit"]
    params: MeanFieldParams = MeanFieldParams()

    def to_domain(self) -> DynamicsMap:
        params = {k: v for k, v in self.params.model_dump().items() if v is not None}
        if "H0" in params:
            params["H0"] = matrix_from_json(params["H0"])
        return builtin_nonlinear(self.name, params)


DynamicsIn = Union[LinearDynamicsIn, ClonerIn, MeanFieldIn]


class SteerInputs(Strict):
    shared: BipartiteIn
    target: list[MemberIn] = Field(min_length=1)


class ChannelCheckInputs(Strict):
    channel: ChannelIn
    nSamples: int = Field(default=1000, ge=1)


class SignalTestInputs(Strict):
    dynamics: DynamicsIn
    rho: DensityIn
    nPairs: int = Field(default=50, ge=1)
    m: Optional[int] = Field(default=None, ge=1)
    ensembleA: Optional[list[MemberIn]] = None
    ensembleB: Optional[list[MemberIn]] = None
    shots: int = Field(default=0, ge=0)
    expect: Literal["no-signaling-consistent", "signaling-detected"] = "no-signaling-consistent"


class DemoInputs(Strict):
    name: Literal["cloner-signals", "transpose-not-cp", "steer-anything"]
    shots: Optional[int] = Field(default=None, ge=0)


class Outputs(Strict):
    report: str = "report.json"
    protocol: str = "protocol.json"
    csv: str = "experiment.csv"

    @field_validator("report", "protocol", "csv")
    @classmethod
    def _plain_name(cls, v: str) -> str:
        if not v or "/" in v or "\\" in v or v in (".", ".."):
            raise ValueError("output names must be plain file names inside --out")
        return v


class _ScenarioBase(Strict):
    formatVersion: Literal[1]
    seed: int = 0
    outputs: Outputs = Outputs()


class SteerScenario(_ScenarioBase):
    command: Literal["steer"]
    inputs: SteerInputs


class ChannelCheckScenario(_ScenarioBase):
    command: Literal["channel-check"]
    inputs: ChannelCheckInputs


class SignalTestScenario(_ScenarioBase):
    command: Literal["signal-test"]
    inputs: SignalTestInputs


class DemoScenario(_ScenarioBase):
    command: Literal["demo"]
    inputs: DemoInputs


Scenario = Annotated[
    Union[SteerScenario, ChannelCheckScenario, SignalTestScenario, DemoScenario],
    Field(discriminator="command"),
]
