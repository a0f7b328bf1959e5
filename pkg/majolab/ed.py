"""Exact diagonalization of small open spin chains.

Basis states are indexed by N bits with site 1 as the most significant bit;
bit 0 is spin up (σᶻ = +1). Hamiltonians:

    XX:          Σ (σˣσˣ + σʸσʸ)
    Heisenberg:  Σ (σˣσˣ + σʸσʸ + Δ σᶻσᶻ)
    XY:         -Σ ((1+γ) σˣσˣ + (1-γ) σʸσʸ) - 2λ Σ σᶻ

σʸσʸ is assembled as -(iσʸ)⊗(iσʸ) so every matrix stays real.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from majolab.chains import ChainFamily, assemble, dispersion, expected_direction, tail_weight_bound
from majolab.config import EDSettings, load_settings
from majolab.errors import BadBlock, InputError, NoConvergence, SizeOutOfRange
from majolab.majorization import (
    DEFAULT_TOL,
    Distribution,
    FlowDirection,
    FlowReport,
    canonicalize,
    flow_report,
)
from majolab.schemas import SpinChainSpec, make_chain, make_spin_chain

logger = logging.getLogger(__name__)

_X = sparse.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
_IY = sparse.csr_matrix(np.array([[0.0, 1.0], [-1.0, 0.0]]))
_Z = sparse.csr_matrix(np.array([[1.0, 0.0], [0.0, -1.0]]))

Parity = Callable[[np.ndarray], np.ndarray]


def _embed(ops: Sequence[sparse.spmatrix], site: int, N: int) -> sparse.csr_matrix:
    """Operator acting as kron(ops) on sites site, site+1, ... (0-based) of an N-site chain."""

    left = sparse.identity(2**site, format="csr")
    right = sparse.identity(2 ** (N - site - len(ops)), format="csr")
    out = left
    for op in ops:
        out = sparse.kron(out, op, format="csr")
    return sparse.kron(out, right, format="csr")


def build_hamiltonian(spec: SpinChainSpec) -> sparse.csr_matrix:
    """Real symmetric 2^N × 2^N Hamiltonian of an open chain."""

    N = spec.N
    if not 2 <= N <= 14:
        raise SizeOutOfRange(f"exact diagonalization supports 2 <= N <= 14 sites, got N={N}")
    dim = 2**N
    H = sparse.csr_matrix((dim, dim), dtype=np.float64)
    for n in range(N - 1):
        xx = _embed((_X, _X), n, N)
        yy = -_embed((_IY, _IY), n, N)
        if spec.model == "xx":
            H = H + xx + yy
        elif spec.model == "heisenberg":
            H = H + xx + yy + spec.delta * _embed((_Z, _Z), n, N)
        else:
            H = H - (1.0 + spec.gamma) * xx - (1.0 - spec.gamma) * yy
    if spec.model == "xy" and spec.lam:
        for n in range(N):
            H = H - 2.0 * spec.lam * _embed((_Z,), n, N)
    H.sum_duplicates()
    H.eliminate_zeros()
    return H


def _z_parity(N: int) -> Parity:
    signs = np.where(np.bitwise_count(np.arange(2**N)) % 2 == 0, 1.0, -1.0)
    return lambda v: signs * v


def _spin_flip(v: np.ndarray) -> np.ndarray:
    return v[::-1]


def parity_operator(spec: SpinChainSpec) -> Parity:
    """Conserved Z2 symmetry used to split degenerate ground states.

    The XY field breaks spin-flip symmetry but conserves Πσᶻ; the XX and
    Heisenberg chains use the global spin flip Πσˣ.
    """

    return _z_parity(spec.N) if spec.model == "xy" else _spin_flip


@dataclass(frozen=True, slots=True, eq=False)
class GroundStateResult:
    energy: float
    state: np.ndarray
    degenerate_flag: bool
    gap: float

    @property
    def N(self) -> int:
        return int(self.state.size).bit_length() - 1

    def residual(self, H: sparse.spmatrix) -> float:
        return float(np.linalg.norm(H @ self.state - self.energy * self.state))


def _fix_phase(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    pivot = v[int(np.argmax(np.abs(v)))]
    return v * (np.conj(pivot) / abs(pivot))


def _even_vector(vectors: np.ndarray, parity: Parity) -> np.ndarray | None:
    candidates = [(vectors[:, i] + parity(vectors[:, i])) / 2.0 for i in range(vectors.shape[1])]
    norms = [float(np.linalg.norm(c)) for c in candidates]
    best = int(np.argmax(norms))
    if norms[best] < 1e-8:
        return None
    return candidates[best]


def _lowest_pair(H: sparse.spmatrix, settings: EDSettings, seed: int) -> tuple[np.ndarray, np.ndarray]:
    dim = H.shape[0]
    if dim <= 2**settings.dense_max_sites:
        upper = min(1, dim - 1)
        values, vectors = linalg.eigh(H.toarray(), subset_by_index=[0, upper])
        logger.debug("dense eigensolve of dimension %d", dim)
        return values, vectors
    v0 = np.random.default_rng(seed).standard_normal(dim)
    try:
        values, vectors = eigsh(H, k=2, which="SA", v0=v0, tol=settings.arpack_tol, maxiter=settings.arpack_maxiter)
    except ArpackNoConvergence as exc:
        raise NoConvergence(f"ARPACK did not converge for dimension {dim}: {exc}") from exc
    order = np.argsort(values)
    logger.debug("ARPACK eigensolve of dimension %d", dim)
    return values[order], vectors[:, order]


def ground_state(
    H: sparse.spmatrix,
    parity: Parity | None = None,
    *,
    settings: EDSettings | None = None,
    seed: int = 0,
) -> GroundStateResult:
    """Lowest eigenpair of ``H``.

    With a gap below ``settings.degeneracy_gap`` and a ``parity`` given, the
    state returned is the even-parity vector of the degenerate pair. The
    global phase is fixed so that the largest amplitude is real and positive.
    """

    settings = settings or load_settings().ed
    values, vectors = _lowest_pair(H, settings, seed)
    gap = float(values[1] - values[0]) if values.size > 1 else float("inf")
    degenerate = gap < settings.degeneracy_gap
    state = vectors[:, 0]
    if degenerate:
        logger.warning("ground state is degenerate within %.1e (gap %.3e)", settings.degeneracy_gap, gap)
        if parity is not None:
            even = _even_vector(vectors, parity)
            if even is not None:
                state = even
            else:
                logger.warning("no even-parity vector in the degenerate pair; keeping the solver's vector")
    state = _fix_phase(state.astype(np.complex128))
    return GroundStateResult(energy=float(values[0]), state=state, degenerate_flag=degenerate, gap=gap)


def solve(spec: SpinChainSpec, *, settings: EDSettings | None = None, seed: int = 0) -> GroundStateResult:
    settings = settings or load_settings().ed
    if spec.N > settings.max_sites:
        raise SizeOutOfRange(f"N={spec.N} exceeds the configured limit of {settings.max_sites} sites")
    return ground_state(build_hamiltonian(spec), parity_operator(spec), settings=settings, seed=seed)


def _block_range(block: int | tuple[int, int], N: int) -> tuple[int, int]:
    start, stop = (0, block) if isinstance(block, int) else block
    if not (0 <= start < stop <= N) or stop - start == N:
        raise BadBlock(f"block {block!r} must be a non-empty proper contiguous subset of {N} sites")
    return start, stop


def reduced_spectrum(state: np.ndarray, N: int, block: int | tuple[int, int]) -> Distribution:
    """Entanglement spectrum of a contiguous block.

    ``block`` is either a length (sites 1..block, anchored at the boundary) or
    a 0-based half-open range (start, stop).
    """

    start, stop = _block_range(block, N)
    if state.size != 2**N:
        raise BadBlock(f"state of length {state.size} does not describe {N} sites")
    amplitudes = state.reshape(2**start, 2 ** (stop - start), 2 ** (N - stop))
    matrix = amplitudes.transpose(1, 0, 2).reshape(2 ** (stop - start), -1)
    weights = linalg.svdvals(matrix) ** 2
    return canonicalize(weights, tol=1e-10, normalize=True)


@dataclass(frozen=True, slots=True)
class BlockFlow:
    """Boundary blocks of growing size in one ground state."""

    chain: SpinChainSpec
    blocks: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class ParameterFlow:
    """One boundary block followed along a coupling grid."""

    model: str
    N: int
    parameter: str
    grid: tuple[float, ...]
    block: int
    fixed: tuple[tuple[str, float], ...] = ()

    def chain(self, value: float) -> SpinChainSpec:
        return make_spin_chain(self.model, self.N, **dict(self.fixed), **{self.parameter: value})


def ed_flow_check(
    flow: BlockFlow | ParameterFlow,
    tol: float = 1e-10,
    direction: FlowDirection | None = None,
    *,
    settings: EDSettings | None = None,
    seed: int = 0,
    cache: "GroundStateCache | None" = None,
) -> FlowReport:
    """Majorization report over ED spectra.

    Block flows expect the larger block to be majorized by the smaller one.
    Parameter flows default to the direction the closed-form dispersions predict.
    """

    settings = settings or load_settings().ed

    def state_of(chain: SpinChainSpec) -> GroundStateResult:
        if cache is not None:
            return cache.get_or_solve(chain, settings=settings, seed=seed)
        return solve(chain, settings=settings, seed=seed)

    if isinstance(flow, BlockFlow):
        result = state_of(flow.chain)
        points = [(float(b), reduced_spectrum(result.state, flow.chain.N, b)) for b in flow.blocks]
        direction = direction or FlowDirection.DESCENDING_MAJORIZES
    else:
        if flow.model == "xx":
            raise InputError("the XX chain has no coupling to flow in; use a block flow")
        points = []
        for value in flow.grid:
            chain = flow.chain(value)
            points.append((float(value), reduced_spectrum(state_of(chain).state, chain.N, flow.block)))
        if direction is None:
            family = ChainFamily.of(flow.model, flow.parameter, **dict(flow.fixed))
            direction = expected_direction(family, flow.grid[0])
    return flow_report(points, direction, tol=tol, entropy_tol=max(tol, DEFAULT_TOL))


@dataclass(frozen=True, slots=True, eq=False)
class FormulaComparison:
    ed: Distribution
    formula: Distribution
    modes: int
    tail_bound: float

    @property
    def largest_discrepancy(self) -> float:
        return abs(self.ed.largest - self.formula.largest)

    def rows(self) -> list[tuple[int, float, float]]:
        """Side-by-side (index, ED weight, closed-form weight), zero-padded."""

        size = max(len(self.ed), len(self.formula))
        ed, formula = self.ed.padded(size), self.formula.padded(size)
        return [(i, float(a), float(b)) for i, (a, b) in enumerate(zip(ed, formula))]


def compare_with_formula(
    chain: SpinChainSpec,
    block: int,
    modes: int = 12,
    *,
    result: GroundStateResult | None = None,
    settings: EDSettings | None = None,
    seed: int = 0,
) -> FormulaComparison:
    """ED spectrum of a boundary block next to the closed-form free-fermion spectrum."""

    result = result or solve(chain, settings=settings, seed=seed)
    ed = reduced_spectrum(result.state, chain.N, block)
    if chain.model == "xx":
        model = make_chain("xx", L=block)
        modes = min(modes, block)
    elif chain.model == "heisenberg":
        model = make_chain("heisenberg", delta=chain.delta)
    else:
        model = make_chain("xy", lam=chain.lam, gamma=chain.gamma)
    spectrum = dispersion(model, modes)
    return FormulaComparison(
        ed=ed, formula=assemble(spectrum, modes), modes=modes, tail_bound=tail_weight_bound(spectrum, modes)
    )


class GroundStateCache:
    """Ground states on disk: ``<key>.bin`` holds little-endian float64 (re, im) pairs, ``<key>.json`` the descriptor."""

    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)

    @staticmethod
    def key(chain: SpinChainSpec) -> str:
        descriptor = json.dumps(chain.model_dump(mode="json", by_alias=True), sort_keys=True)
        return hashlib.sha256(descriptor.encode("utf-8")).hexdigest()[:32]

    def _paths(self, chain: SpinChainSpec) -> tuple[Path, Path]:
        key = self.key(chain)
        return self.directory / f"{key}.bin", self.directory / f"{key}.json"

    def load(self, chain: SpinChainSpec) -> GroundStateResult | None:
        data_path, meta_path = self._paths(chain)
        if not (data_path.exists() and meta_path.exists()):
            return None
        meta: dict[str, Any] = json.loads(meta_path.read_text(encoding="utf-8"))
        if meta.get("chain") != chain.model_dump(mode="json", by_alias=True):
            logger.warning("cache descriptor %s does not match the requested chain; ignoring it", meta_path)
            return None
        raw = np.frombuffer(data_path.read_bytes(), dtype="<f8")
        if raw.size != 2 * meta["length"]:
            logger.warning("cache entry %s is truncated; ignoring it", data_path)
            return None
        state = raw.reshape(-1, 2) @ np.array([1.0, 1.0j])
        return GroundStateResult(
            energy=meta["energy"],
            state=state,
            degenerate_flag=meta["degenerate_flag"],
            gap=float("inf") if meta["gap"] is None else meta["gap"],
        )

    def store(self, chain: SpinChainSpec, result: GroundStateResult) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        data_path, meta_path = self._paths(chain)
        interleaved = np.column_stack((result.state.real, result.state.imag)).astype("<f8")
        data_path.write_bytes(interleaved.tobytes())
        meta = {
            "chain": chain.model_dump(mode="json", by_alias=True),
            "length": int(result.state.size),
            "dtype": "<f8",
            "layout": "interleaved real/imag",
            "energy": result.energy,
            "gap": result.gap if np.isfinite(result.gap) else None,
            "degenerate_flag": result.degenerate_flag,
        }
        meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8")
        return data_path

    def get_or_solve(
        self, chain: SpinChainSpec, *, settings: EDSettings | None = None, seed: int = 0
    ) -> GroundStateResult:
        cached = self.load(chain)
        if cached is not None:
            logger.debug("ground state for %s N=%d read from cache", chain.model, chain.N)
            return cached
        result = solve(chain, settings=settings, seed=seed)
        self.store(chain, result)
        return result


__all__ = (
    "GroundStateResult",
    "GroundStateCache",
    "BlockFlow",
    "ParameterFlow",
    "FormulaComparison",
    "build_hamiltonian",
    "parity_operator",
    "ground_state",
    "solve",
    "reduced_spectrum",
    "ed_flow_check",
    "compare_with_formula",
)
