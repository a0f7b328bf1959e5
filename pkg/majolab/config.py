"""Settings models and loader for the majorization laboratory."""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Any, Literal, Mapping

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from majolab.errors import SettingsError


class ToleranceSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    majorization: float = Field(1e-12, ge=0.0, description="Additive slack on cumulant comparisons.")
    normalization: float = Field(1e-12, ge=0.0, description="Allowed deviation of a distribution's sum from one.")
    entropy: float = Field(1e-12, ge=0.0, description="Slack on entropy comparisons along flows.")
    zero_derivative: float = Field(1e-10, ge=0.0, description="Finite differences below this resolve to sign 0.")
    ed_majorization: float = Field(1e-10, ge=0.0, description="Cumulant slack for exact-diagonalization spectra.")
    tail: float = Field(1e-14, gt=0.0, description="Relative cutoff for CFT tower terms.")


class TruncationSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    modes: int = Field(12, ge=1, le=20, description="Default number of free-fermion modes kept.")
    max_assembled_modes: int = Field(20, ge=1, le=24, description="Largest M for which 2**M weights are materialized.")

    @model_validator(mode="after")
    def _modes_fit(self) -> "TruncationSettings":
        if self.modes > self.max_assembled_modes:
            raise ValueError(f"default modes {self.modes} exceed max_assembled_modes {self.max_assembled_modes}")
        return self


class EDSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dense_max_sites: int = Field(10, ge=2, le=12, description="Chains up to this size use a dense eigensolve.")
    max_sites: int = Field(14, ge=2, le=14, description="Hard upper bound on chain length.")
    degeneracy_gap: float = Field(1e-10, ge=0.0, description="Ground states closer than this are treated as degenerate.")
    arpack_tol: float = Field(1e-12, ge=0.0, description="Convergence tolerance handed to ARPACK.")
    arpack_maxiter: int = Field(20000, ge=1, description="Iteration cap for ARPACK.")


class DefaultParameters(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kappa: float = Field(1.0, gt=0.0, description="Modular-parameter constant in q(L).")
    uv_cutoff: float = Field(1.0, gt=0.0, description="UV cutoff in ln(L / cutoff).")
    seed: int = Field(0, ge=0, description="Seed for randomized sweeps and iterative solver start vectors.")


class LabSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tolerances: ToleranceSettings = Field(default_factory=ToleranceSettings)
    truncation: TruncationSettings = Field(default_factory=TruncationSettings)
    ed: EDSettings = Field(default_factory=EDSettings)
    defaults: DefaultParameters = Field(default_factory=DefaultParameters)


DEFAULT_CONFIG_PATH = Path("config/majolab.yaml")


def _read_yaml(path: Path) -> Mapping[str, Any]:
    try:
        import yaml
    except ImportError as exc:  # pragma: no cover - dependency installation issue surfaced to caller
        raise SettingsError("PyYAML is required to load settings. Install project dependencies.") from exc

    try:
        with path.open("r", encoding="utf-8") as handle:
            data = yaml.safe_load(handle) or {}
    except FileNotFoundError as exc:
        raise SettingsError(f"Settings file not found: {path}") from exc
    except OSError as exc:  # pragma: no cover - surfaced directly to caller
        raise SettingsError(f"Unable to read settings file {path}: {exc}") from exc

    if not isinstance(data, Mapping):
        raise SettingsError(f"Settings root must be a mapping, got {type(data)!r}")

    return data


def _validate_settings(payload: Mapping[str, Any]) -> LabSettings:
    try:
        return LabSettings.model_validate(payload)
    except ValidationError as exc:
        raise SettingsError("Settings failed validation") from exc


@lru_cache(maxsize=4)
def load_settings(config_path: str | Path | None = None) -> LabSettings:
    """Load and cache settings from the given YAML file.

    Without an explicit path the default file is used when present and the
    built-in defaults otherwise.
    """

    if config_path is None:
        if not DEFAULT_CONFIG_PATH.exists():
            return LabSettings()
        path = DEFAULT_CONFIG_PATH
    else:
        path = Path(config_path)
    return _validate_settings(_read_yaml(path))


def load_settings_from_dict(payload: Mapping[str, Any]) -> LabSettings:
    """Validate settings from an in-memory dictionary (useful for tests)."""

    return _validate_settings(payload)


def clear_settings_cache() -> None:
    """Reset the cached `load_settings` result (mainly for tests)."""

    load_settings.cache_clear()


Command = Literal["spectrum", "flow", "ed", "sweep"]
ModelName = Literal["xx", "heisenberg", "xy", "cft"]

_GRID_FIELDS = ("L_grid", "delta_grid", "lambda_grid", "gamma_grid", "q_of_g", "block_flow")


class RunConfig(BaseModel):
    """Validated CLI request; JSON config files use the same field names."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    command: Command
    model: ModelName | None = None
    L: float | None = Field(default=None, description="Block length (XX) or interval length (CFT).")
    delta: float | None = None
    lam: float | None = Field(default=None, alias="lambda")
    gamma: float | None = None
    spec: Path | None = Field(default=None, description="ScalingSpectrum JSON document.")
    kappa: float | None = Field(default=None, gt=0.0)
    uv_cutoff: float | None = Field(default=None, gt=0.0)
    L_grid: list[float] | None = None
    delta_grid: list[float] | None = None
    lambda_grid: list[float] | None = None
    gamma_grid: list[float] | None = None
    q_of_g: Path | None = Field(default=None, description="CSV of (g, q) samples for a CFT parameter flow.")
    N: int | None = Field(default=None, description="Sites of the exact-diagonalization chain.")
    block: int | None = Field(default=None, ge=1)
    block_flow: list[int] | None = None
    modes: int | None = Field(default=None, ge=1)
    direction: Literal["ascending", "descending"] | None = None
    tol: float | None = Field(default=None, ge=0.0)
    tail_tol: float | None = Field(default=None, gt=0.0)
    format: Literal["json", "csv"] = "json"
    output: Path | None = None
    table: Path | None = None
    spectra: Path | None = Field(default=None, description="Long-form CSV of every spectrum along a flow.")
    seed: int | None = Field(default=None, ge=0, description="Falls back to the settings file; MAJOLAB_SEED overrides both.")
    compare_formula: bool = False
    cache_dir: Path | None = None
    suite: Literal["cft-block", "cft-parameter", "majorization", "derivative-sign", "all"] = "all"
    draws: int = Field(100, ge=1)

    @model_validator(mode="after")
    def _check_selectors(self) -> "RunConfig":
        grids = [name for name in _GRID_FIELDS if getattr(self, name) is not None]
        if len(grids) > 1:
            raise ValueError(f"grids are mutually exclusive, got {grids}")
        if self.command in ("spectrum", "flow", "ed") and self.model is None:
            raise ValueError(f"'{self.command}' requires --model")
        if self.command == "flow" and not grids:
            raise ValueError("'flow' requires one grid (--L-grid, --delta-grid, --lambda-grid, --gamma-grid or --q-of-g)")
        if self.command == "ed":
            if self.model == "cft":
                raise ValueError("exact diagonalization is defined for the xx, heisenberg and xy chains only")
            if self.N is None:
                raise ValueError("'ed' requires --N")
        if self.model == "cft" and self.command in ("spectrum", "flow") and self.spec is None:
            raise ValueError("the cft model requires --spec")
        if self.block_flow is not None and self.command != "ed":
            raise ValueError("--block-flow is only valid for 'ed'")
        if self.q_of_g is not None and self.model != "cft":
            raise ValueError("--q-of-g is only valid for the cft model")
        return self

    def grid(self) -> tuple[str, list[float]] | None:
        """Return the (parameter name, values) of the grid given, if any."""

        for name in ("L_grid", "delta_grid", "lambda_grid", "gamma_grid"):
            values = getattr(self, name)
            if values is not None:
                return name.removesuffix("_grid"), list(values)
        if self.block_flow is not None:
            return "block", [float(v) for v in self.block_flow]
        return None


__all__ = (
    "ToleranceSettings",
    "TruncationSettings",
    "EDSettings",
    "DefaultParameters",
    "LabSettings",
    "RunConfig",
    "DEFAULT_CONFIG_PATH",
    "load_settings",
    "load_settings_from_dict",
    "clear_settings_cache",
)
