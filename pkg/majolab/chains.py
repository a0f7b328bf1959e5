"""Free-fermion entanglement spectra of the XX, Heisenberg and XY boundary chains.

Each reduced density matrix is a product of independent two-level modes with
Boltzmann weights (1, e^{-ε_k}). All three dispersions are linear in k,
ε_k = slope·k + offset:

* XX block of L sites:  ε_k = π²/(2 ln L)·(2k+1),  k < L  (large-L form, used for every L >= 2)
* Heisenberg, Δ >= 1:   ε_k = 2k·arccosh(Δ)
* XY, λ < 1:            ε_k = 2k·ε̂;   λ > 1: ε_k = (2k+1)·ε̂,  ε̂ = π I(√(1-x²))/I(x)
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.special import expit

from majolab.errors import (
    DomainError,
    GridCrossesRegionBoundary,
    InputError,
    ModeCountExceedsBlock,
    ModelInvariantViolation,
    NonMonotoneParameter,
    StepLeavesRegion,
    TooManyModes,
)
from majolab.majorization import (
    Distribution,
    FlowDirection,
    MajorizationReport,
    canonicalize,
    majorizes,
    pure,
    shannon_entropy,
)
from majolab.schemas import HeisenbergChain, XXChain, XYChain, XYRegion, chain_descriptor, make_chain
from majolab.special import arccosh, complementary_ratio

logger = logging.getLogger(__name__)

Chain = XXChain | HeisenbergChain | XYChain

DEFAULT_MODES = 12
MAX_ASSEMBLED_MODES = 20
# e^{-46} < 1e-20: tail modes beyond this energy no longer move the bound.
_TAIL_ENERGY_CUTOFF = 46.0
_TAIL_MAX_TERMS = 10_000_000

_FAMILY_PARAMETERS = {"xx": ("L",), "heisenberg": ("delta",), "xy": ("lambda", "gamma")}


def xy_modulus(lam: float, gamma: float) -> float:
    """Elliptic modulus x of the XY chain for either side of λ = 1."""

    root = math.sqrt(lam * lam + gamma * gamma - 1.0)
    return root / gamma if lam < 1.0 else gamma / root


def xy_energy_scale(lam: float, gamma: float) -> float:
    """ε̂ = π I(√(1-x²)) / I(x)."""

    return math.pi * complementary_ratio(xy_modulus(lam, gamma))


def _slope_offset(kind: str, values: Mapping[str, float]) -> tuple[float, float]:
    if kind == "xx":
        scale = math.pi**2 / (2.0 * math.log(values["L"]))
        return 2.0 * scale, scale
    if kind == "heisenberg":
        return 2.0 * arccosh(values["delta"]), 0.0
    if kind == "xy":
        lam, gamma = values["lambda"], values["gamma"]
        scale = xy_energy_scale(lam, gamma)
        return (2.0 * scale, 0.0) if lam < 1.0 else (2.0 * scale, scale)
    raise ModelInvariantViolation(f"unknown chain kind {kind!r}")


def _values(model: Chain) -> dict[str, float]:
    if isinstance(model, XXChain):
        return {"L": float(model.L)}
    if isinstance(model, HeisenbergChain):
        return {"delta": model.delta}
    return {"lambda": model.lam, "gamma": model.gamma}


def mode_energy(model: Chain, k: int) -> float:
    slope, offset = _slope_offset(model.kind, _values(model))
    return offset + slope * k


@dataclass(frozen=True, slots=True, eq=False)
class ModeSpectrum:
    """Ascending single-fermion energies ε_0..ε_{M-1} of a chain model."""

    energies: np.ndarray
    model: Chain
    mode_count: int

    def __post_init__(self) -> None:
        energies = np.array(self.energies, dtype=np.float64, copy=True)
        if energies.shape != (self.mode_count,):
            raise ValueError(f"expected {self.mode_count} energies, got shape {energies.shape}")
        if not np.all(np.isfinite(energies)) or np.any(np.diff(energies) < 0.0):
            raise ValueError("mode energies must be finite and non-decreasing")
        energies.setflags(write=False)
        object.__setattr__(self, "energies", energies)

    @property
    def critical(self) -> bool:
        """Gapless point: the XX chain, or the Heisenberg chain at Δ = 1 where every mode is (½, ½)."""

        if isinstance(self.model, XXChain):
            return True
        return isinstance(self.model, HeisenbergChain) and self.model.delta == 1.0


def dispersion(model: Chain, M: int) -> ModeSpectrum:
    """The first M mode energies of ``model``."""

    if M < 1:
        raise InputError(f"need at least one mode, got M={M}")
    if isinstance(model, XXChain) and M > model.L:
        raise ModeCountExceedsBlock(f"an XX block of L={model.L} sites has only {model.L} modes, asked for {M}")
    slope, offset = _slope_offset(model.kind, _values(model))
    energies = offset + slope * np.arange(M, dtype=np.float64)
    return ModeSpectrum(energies=energies, model=model, mode_count=M)


def mode_distribution(epsilon: float) -> Distribution:
    """(1, e^{-ε}) / (1 + e^{-ε}) for a single mode."""

    epsilon = float(epsilon)
    if not (math.isfinite(epsilon) and epsilon >= 0.0):
        raise DomainError(f"mode energy must be finite and non-negative, got {epsilon!r}")
    return canonicalize([expit(epsilon), expit(-epsilon)], normalize=True)


def assemble(spectrum: ModeSpectrum, M: int | None = None, *, max_modes: int = MAX_ASSEMBLED_MODES) -> Distribution:
    """Eigenvalues of the reduced density matrix built from the first M modes."""

    M = spectrum.mode_count if M is None else M
    if M > max_modes:
        raise TooManyModes(f"M={M} would materialize 2**{M} eigenvalues; analyse the modes separately")
    if not 1 <= M <= spectrum.mode_count:
        raise ModeCountExceedsBlock(f"M={M} outside 1..{spectrum.mode_count}")
    weights = np.ones(1)
    for epsilon in spectrum.energies[:M]:
        weights = np.concatenate((weights * expit(epsilon), weights * expit(-epsilon)))
    return canonicalize(weights, normalize=True)


def tail_weight_bound(spectrum: ModeSpectrum, M: int | None = None) -> float:
    """Weight outside the M-mode truncation: 1 - Π_{k>=M} (1 + e^{-ε_k})^{-1}."""

    M = spectrum.mode_count if M is None else M
    model = spectrum.model
    slope, offset = _slope_offset(model.kind, _values(model))
    if isinstance(model, XXChain):
        stop = model.L
    elif slope == 0.0:
        # infinitely many (½, ½) modes: nothing survives in the truncated block
        return 1.0
    else:
        stop = M + max(0, math.ceil((_TAIL_ENERGY_CUTOFF - offset) / slope) - M + 1)
        if stop - M > _TAIL_MAX_TERMS:
            logger.warning("tail series needs %d terms; reporting the trivial bound 1", stop - M)
            return 1.0
    if stop <= M:
        return 0.0
    energies = offset + slope * np.arange(M, stop, dtype=np.float64)
    log_tail = float(np.sum(np.log1p(np.exp(-energies))))
    return float(-np.expm1(-log_tail))


def top_mode_probability(model: Chain, alpha: int) -> float:
    """Largest eigenvalue 1/(1 + e^{-ε_α}) of mode α."""

    if alpha < 0:
        raise InputError(f"mode index must be non-negative, got {alpha}")
    if isinstance(model, XXChain) and alpha >= model.L:
        raise ModeCountExceedsBlock(f"mode {alpha} does not exist in an XX block of {model.L} sites")
    return float(expit(mode_energy(model, alpha)))


def heisenberg_probability_derivative(delta: float, alpha: int) -> float:
    """dP^α/dΔ = 2α e^{-ε_α} / ((1 + e^{-ε_α})² √(Δ² - 1)) for Δ > 1."""

    if delta <= 1.0:
        raise DomainError(f"the derivative is finite only for Δ > 1, got {delta}")
    epsilon = 2.0 * alpha * arccosh(delta)
    boltzmann = math.exp(-epsilon)
    return 2.0 * alpha * boltzmann / ((1.0 + boltzmann) ** 2 * math.sqrt(delta * delta - 1.0))


@dataclass(frozen=True, slots=True)
class ChainFamily:
    """A chain model with one free parameter; the others are held in ``fixed``."""

    kind: str
    parameter: str
    fixed: tuple[tuple[str, float], ...] = ()

    def __post_init__(self) -> None:
        allowed = _FAMILY_PARAMETERS.get(self.kind)
        if allowed is None:
            raise ModelInvariantViolation(f"unknown chain kind {self.kind!r}")
        if self.parameter not in allowed:
            raise ModelInvariantViolation(f"{self.kind} chains flow in {allowed}, not {self.parameter!r}")

    @classmethod
    def of(cls, kind: str, parameter: str, **fixed: float) -> "ChainFamily":
        if "lam" in fixed:
            fixed["lambda"] = fixed.pop("lam")
        return cls(kind=kind, parameter=parameter, fixed=tuple(sorted(fixed.items())))

    def values(self, value: float) -> dict[str, float]:
        return {**dict(self.fixed), self.parameter: float(value)}

    def at(self, value: float) -> Chain:
        params = self.values(value)
        if self.kind == "xx":
            L = params["L"]
            if L != int(L):
                raise ModelInvariantViolation(f"XX block length must be an integer, got {L}")
            params["L"] = int(L)
        return make_chain(self.kind, **params)

    def region(self, value: float) -> XYRegion | None:
        if self.kind != "xy":
            return None
        return self.at(value).region


def _check_grid(family: ChainFamily, grid: Sequence[float]) -> list[Chain]:
    if len(grid) > 1:
        steps = np.diff(np.asarray(grid, dtype=np.float64))
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise NonMonotoneParameter(f"grid must be strictly monotone, got {list(grid)}")
    if family.kind == "xy":
        for value in grid:
            params = family.values(value)
            lam, gamma = params["lambda"], params["gamma"]
            if lam == 1.0 or (gamma > 0.0 and lam**2 + gamma**2 <= 1.0):
                raise GridCrossesRegionBoundary(
                    f"{family.parameter}={value} leaves the exterior of the BM circle or hits λ = 1"
                )
    models = [family.at(value) for value in grid]
    if family.kind == "xy" and len({model.region for model in models}) > 1:
        raise GridCrossesRegionBoundary(f"{family.parameter} grid {list(grid)} crosses λ = 1")
    return models


def expected_direction(family: ChainFamily, value: float) -> FlowDirection:
    """Ordering predicted by mode-wise majorization for a flow through ``value``."""

    if family.kind == "xx":
        return FlowDirection.DESCENDING_MAJORIZES
    if family.kind == "heisenberg":
        return FlowDirection.ASCENDING_MAJORIZES
    if family.parameter == "gamma":
        return FlowDirection.DESCENDING_MAJORIZES
    if family.region(value) is XYRegion.ABOVE_ONE:
        return FlowDirection.ASCENDING_MAJORIZES
    return FlowDirection.DESCENDING_MAJORIZES


def expected_derivative_sign(family: ChainFamily, value: float, alpha: int) -> int:
    """Sign of dP^α/d(parameter) predicted by the closed-form dispersions."""

    if family.kind == "xx":
        return -1
    if family.kind == "heisenberg":
        return 0 if alpha == 0 else 1
    below = family.region(value) is XYRegion.BELOW_ONE
    if below and alpha == 0:
        return 0
    if family.parameter == "gamma":
        return -1
    return -1 if below else 1


class FlowPoint(NamedTuple):
    """One grid point of a chain flow; ``mode_checks`` compare each mode with the previous point."""

    param: float
    distribution: Distribution
    modes: int
    tail_bound: float
    critical: bool
    mode_checks: tuple[MajorizationReport, ...] = ()


def _evaluate(model: Chain, modes: int, max_modes: int) -> tuple[ModeSpectrum, Distribution, float]:
    count = min(modes, model.L) if isinstance(model, XXChain) else modes
    spectrum = dispersion(model, count)
    return spectrum, assemble(spectrum, count, max_modes=max_modes), tail_weight_bound(spectrum, count)


def _mode_checks(current: ModeSpectrum, previous: ModeSpectrum) -> tuple[MajorizationReport, ...]:
    # A mode absent at one point is represented by the frozen distribution (1, 0).
    frozen = pure(2)
    checks = []
    for k in range(max(current.mode_count, previous.mode_count)):
        here = mode_distribution(current.energies[k]) if k < current.mode_count else frozen
        before = mode_distribution(previous.energies[k]) if k < previous.mode_count else frozen
        checks.append(majorizes(here, before))
    return tuple(checks)


def flow(
    family: ChainFamily,
    grid: Sequence[float],
    M: int = DEFAULT_MODES,
    *,
    workers: int | None = None,
    max_modes: int = MAX_ASSEMBLED_MODES,
) -> list[FlowPoint]:
    """Assembled spectra along ``grid``.

    XX blocks keep min(M, L) modes, so a smaller block is compared with its
    missing modes padded as (1, 0). Grid points are independent; ``workers``
    > 1 evaluates them concurrently.
    """

    models = _check_grid(family, grid)
    if workers and workers > 1 and len(models) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            evaluated = list(pool.map(lambda model: _evaluate(model, M, max_modes), models))
    else:
        evaluated = [_evaluate(model, M, max_modes) for model in models]

    points: list[FlowPoint] = []
    previous: ModeSpectrum | None = None
    for value, (spectrum, distribution, tail) in zip(grid, evaluated):
        checks = _mode_checks(spectrum, previous) if previous is not None else ()
        if tail > 1e-12:
            logger.debug("%s=%s: truncation to %d modes drops weight %.3e", family.parameter, value, spectrum.mode_count, tail)
        points.append(
            FlowPoint(
                param=float(value),
                distribution=distribution,
                modes=spectrum.mode_count,
                tail_bound=tail,
                critical=spectrum.critical,
                mode_checks=checks,
            )
        )
        previous = spectrum
    return points


def mode_alignment(points: Sequence[FlowPoint], direction: FlowDirection) -> list[list[int]]:
    """Per grid step, the modes whose two-level distributions break the expected ordering."""

    failing: list[list[int]] = []
    for previous, current in zip(points, points[1:]):
        current_ordered = (direction is FlowDirection.ASCENDING_MAJORIZES) == (current.param > previous.param)
        failing.append(
            [
                k
                for k, check in enumerate(current.mode_checks)
                if not (check.y_majorized_by_x if current_ordered else check.x_majorized_by_y)
            ]
        )
    return failing


def _probability(family: ChainFamily, value: float, alpha: int) -> float:
    slope, offset = _slope_offset(family.kind, family.values(value))
    return float(expit(offset + slope * alpha))


def _probe_admissible(family: ChainFamily, value: float, reference: XYRegion | None) -> bool:
    if family.kind == "xx":
        return value >= 2.0
    try:
        _check_grid(family, [value])
    except InputError:
        return False
    if family.kind == "heisenberg":
        return value > 1.0
    return family.region(value) is reference


def mode_derivative_sign(
    family: ChainFamily,
    param: float,
    alpha: int,
    h: float | None = None,
    zero_tol: float = 1e-10,
) -> int:
    """Sign of P^α(param + h) - P^α(param - h); differences below ``zero_tol`` give 0.

    The step defaults to 1e-4·max(1, |param|). XX block lengths are treated as
    continuous here.
    """

    step = 1e-4 * max(1.0, abs(param)) if h is None else float(h)
    reference = family.region(param) if family.kind == "xy" else None
    for value in (param - step, param, param + step):
        if not _probe_admissible(family, value, reference):
            raise StepLeavesRegion(f"{family.parameter}={value} is outside the region of {family.parameter}={param}")
    difference = _probability(family, param + step, alpha) - _probability(family, param - step, alpha)
    if abs(difference) < zero_tol:
        return 0
    return 1 if difference > 0 else -1


def mode_entropies(spectrum: ModeSpectrum, M: int | None = None) -> Iterable[float]:
    """Per-mode Shannon entropies; their sum is the entropy of `assemble`."""

    M = spectrum.mode_count if M is None else M
    return [shannon_entropy(mode_distribution(epsilon)) for epsilon in spectrum.energies[:M]]


def describe(model: Chain) -> dict[str, Any]:
    """Model descriptor plus derived constants, for spectrum documents."""

    slope, offset = _slope_offset(model.kind, _values(model))
    payload: dict[str, Any] = {**chain_descriptor(model), "slope": slope, "offset": offset}
    if isinstance(model, XYChain):
        payload["region"] = model.region.value
        payload["modulus"] = xy_modulus(model.lam, model.gamma)
    return payload


__all__ = (
    "DEFAULT_MODES",
    "MAX_ASSEMBLED_MODES",
    "ModeSpectrum",
    "ChainFamily",
    "FlowPoint",
    "xy_modulus",
    "xy_energy_scale",
    "mode_energy",
    "dispersion",
    "mode_distribution",
    "assemble",
    "tail_weight_bound",
    "top_mode_probability",
    "heisenberg_probability_derivative",
    "expected_direction",
    "expected_derivative_sign",
    "flow",
    "mode_alignment",
    "mode_derivative_sign",
    "mode_entropies",
    "describe",
)
