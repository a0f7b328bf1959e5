"""Schema definitions for model inputs: chain models, CFT towers and ED chains."""

from __future__ import annotations

import math
from enum import Enum
from typing import Annotated, Any, Literal, Mapping, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, field_validator, model_validator

from majolab.errors import ModelInvariantViolation, SizeOutOfRange


class XYRegion(str, Enum):
    """Side of λ = 1 on which an XY model lives; fixes the dispersion branch."""

    BELOW_ONE = "below_one"  # sqrt(1 - γ²) < λ < 1
    ABOVE_ONE = "above_one"  # λ > 1


class XXChain(BaseModel):
    """Field-free XX chain with a boundary; a block of L sites carries L modes."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["xx"] = "xx"
    L: int = Field(..., ge=2, description="Block length; ln L > 0 is needed by the dispersion.")


class HeisenbergChain(BaseModel):
    """Anisotropic Heisenberg chain with a boundary, Δ >= 1."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["heisenberg"] = "heisenberg"
    delta: float = Field(..., ge=1.0, allow_inf_nan=False, description="Anisotropy Δ.")


class XYChain(BaseModel):
    """XY chain in a transverse field, restricted to the exterior of the BM circle."""

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    kind: Literal["xy"] = "xy"
    lam: float = Field(..., alias="lambda", ge=0.0, allow_inf_nan=False, description="Transverse field λ.")
    gamma: float = Field(..., gt=0.0, allow_inf_nan=False, description="Anisotropy γ.")

    @model_validator(mode="after")
    def _outside_bm_circle(self) -> "XYChain":
        if self.lam**2 + self.gamma**2 <= 1.0:
            raise ValueError(
                f"λ² + γ² = {self.lam**2 + self.gamma**2:.6g} must exceed 1 (exterior of the BM circle)"
            )
        if self.lam == 1.0:
            raise ValueError("λ = 1 separates the two dispersion branches and is excluded")
        return self

    @property
    def region(self) -> XYRegion:
        return XYRegion.BELOW_ONE if self.lam < 1.0 else XYRegion.ABOVE_ONE


ChainModel = Annotated[Union[XXChain, HeisenbergChain, XYChain], Field(discriminator="kind")]
_CHAIN_ADAPTER: TypeAdapter[Any] = TypeAdapter(ChainModel)


def make_chain(kind: str, **params: Any) -> XXChain | HeisenbergChain | XYChain:
    """Validate a chain model from keyword parameters (``lambda`` may be given as ``lam``)."""

    payload = {"kind": kind, **params}
    if "lam" in payload:
        payload["lambda"] = payload.pop("lam")
    try:
        return _CHAIN_ADAPTER.validate_python(payload)
    except ValidationError as exc:
        raise ModelInvariantViolation(f"invalid {kind} model {params}: {exc.errors(include_url=False)}") from exc


def chain_descriptor(model: XXChain | HeisenbergChain | XYChain) -> dict[str, Any]:
    """JSON-ready description of a chain model."""

    return model.model_dump(mode="json", by_alias=True)


class ScalingSpectrum(BaseModel):
    """CFT tower: ascending exponents α_i > 0 with degeneracies n_i >= 1.

    ``b`` = (c + c̄)/24 is carried as metadata only; it cancels in normalized
    eigenvalues.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    exponents: tuple[float, ...] = Field(..., min_length=1)
    degeneracies: tuple[int, ...] = Field(..., min_length=1)
    b: float | None = Field(default=None, description="(c + c̄)/24, documentation only.")

    @field_validator("exponents")
    @classmethod
    def _ascending_positive(cls, values: tuple[float, ...]) -> tuple[float, ...]:
        if any(not math.isfinite(v) or v <= 0.0 for v in values):
            raise ValueError("exponents must be finite and positive")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("exponents must be strictly increasing")
        return values

    @field_validator("degeneracies")
    @classmethod
    def _positive(cls, values: tuple[int, ...]) -> tuple[int, ...]:
        if any(v < 1 for v in values):
            raise ValueError("degeneracies must be positive integers")
        return values

    @model_validator(mode="after")
    def _same_length(self) -> "ScalingSpectrum":
        if len(self.exponents) != len(self.degeneracies):
            raise ValueError("exponents and degeneracies must have equal length")
        return self


class CFTFlowParams(BaseModel):
    """κ and the UV cutoff entering q(L) = exp(-2πκ / ln(L / cutoff))."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kappa: float = Field(1.0, gt=0.0, allow_inf_nan=False)
    uv_cutoff: float = Field(1.0, gt=0.0, allow_inf_nan=False)


class SpectrumDocument(BaseModel):
    """On-disk form of a tower: ``{exponents, degeneracies, kappa, uv_cutoff}``."""

    model_config = ConfigDict(extra="forbid")

    exponents: list[float]
    degeneracies: list[int]
    b: float | None = None
    kappa: float = Field(1.0, gt=0.0)
    uv_cutoff: float = Field(1.0, gt=0.0)

    def split(self) -> tuple[ScalingSpectrum, CFTFlowParams]:
        spectrum = ScalingSpectrum(exponents=tuple(self.exponents), degeneracies=tuple(self.degeneracies), b=self.b)
        return spectrum, CFTFlowParams(kappa=self.kappa, uv_cutoff=self.uv_cutoff)


def load_spectrum_document(payload: Mapping[str, Any]) -> tuple[ScalingSpectrum, CFTFlowParams]:
    try:
        return SpectrumDocument.model_validate(payload).split()
    except ValidationError as exc:
        raise ModelInvariantViolation(f"invalid scaling spectrum: {exc.errors(include_url=False)}") from exc


class QFlow(BaseModel):
    """Samples (g, q) of a parameter-dependent q-factor, g ascending, q in (0, 1)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    samples: tuple[tuple[float, float], ...] = Field(..., min_length=1)

    @field_validator("samples")
    @classmethod
    def _in_range(cls, samples: tuple[tuple[float, float], ...]) -> tuple[tuple[float, float], ...]:
        for g, q in samples:
            if not (0.0 < q < 1.0):
                raise ValueError(f"q must lie in (0, 1), got q={q} at g={g}")
        return samples

    @property
    def parameters(self) -> list[float]:
        return [g for g, _ in self.samples]

    @property
    def q_values(self) -> list[float]:
        return [q for _, q in self.samples]


class SpinChainSpec(BaseModel):
    """Finite open chain for exact diagonalization."""

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    model: Literal["xx", "heisenberg", "xy"]
    N: int = Field(..., description="Number of sites, 2 <= N <= 14.")
    delta: float | None = Field(default=None, ge=1.0)
    lam: float | None = Field(default=None, alias="lambda")
    gamma: float | None = None
    boundary: Literal["open"] = "open"

    @model_validator(mode="after")
    def _parameters_present(self) -> "SpinChainSpec":
        if self.model == "heisenberg" and self.delta is None:
            raise ValueError("heisenberg chain needs delta")
        if self.model == "xy" and (self.lam is None or self.gamma is None):
            raise ValueError("xy chain needs lambda and gamma")
        return self


def make_spin_chain(model: str, N: int, **params: Any) -> SpinChainSpec:
    """Validate an ED chain; N outside 2..14 raises SizeOutOfRange."""

    if not 2 <= int(N) <= 14:
        raise SizeOutOfRange(f"exact diagonalization supports 2 <= N <= 14 sites, got N={N}")
    if "lambda" in params:
        params["lam"] = params.pop("lambda")
    try:
        return SpinChainSpec(model=model, N=N, **params)
    except ValidationError as exc:
        raise ModelInvariantViolation(f"invalid spin chain {model} N={N}: {exc.errors(include_url=False)}") from exc


def spectrum_json_schema() -> dict[str, Any]:
    """Return the JSON schema for scaling-spectrum documents."""

    return SpectrumDocument.model_json_schema()


def chain_json_schema() -> dict[str, Any]:
    """Return the JSON schema for chain model descriptors."""

    return _CHAIN_ADAPTER.json_schema(by_alias=True)


__all__ = (
    "XYRegion",
    "XXChain",
    "HeisenbergChain",
    "XYChain",
    "ChainModel",
    "make_chain",
    "chain_descriptor",
    "ScalingSpectrum",
    "CFTFlowParams",
    "SpectrumDocument",
    "load_spectrum_document",
    "QFlow",
    "SpinChainSpec",
    "make_spin_chain",
    "spectrum_json_schema",
    "chain_json_schema",
)
