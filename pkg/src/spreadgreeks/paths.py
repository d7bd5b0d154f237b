"""Driver simulation: exact GBM terminal draws and Euler paths for the SV model.

Everything downstream (payoffs, weights, bumped re-pricing) works off a
:class:`~spreadgreeks.core.DriverSummary`, so the simulation runs once per
seed and is shared by every estimator.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import DriverSummary, MarketParams, SvParams, market_of, validate

VARIANCE_FLOOR = 1e-12
DEFAULT_BATCH_SIZE = 8192


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus batch size.

    Batch ``b`` always draws from the stream keyed by ``(master_seed, b)``,
    whatever worker ends up running it.
    """

    master_seed: int = 0
    batch_size: int = DEFAULT_BATCH_SIZE

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError(f"master_seed must fit in 64 bits, got {self.master_seed}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")

    def batch_rng(self, batch: int) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.master_seed), spawn_key=(int(batch),))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class PathGrid:
    n_steps: int
    maturity: float

    @property
    def dt(self) -> float:
        return self.maturity / self.n_steps

    @property
    def times(self) -> np.ndarray:
        t = np.arange(self.n_steps + 1) * self.dt
        t[-1] = self.maturity
        return t


def terminal_prices(drivers: DriverSummary, params) -> tuple[np.ndarray, np.ndarray]:
    """Terminal asset prices implied by the drivers under ``params``.

    Uses ``log S1(T) = log x1 + (r - q1) T - sigma1^2/2 * int V dt
    + sigma1 * int sqrt(V) dW1``, and likewise for asset 2 with the
    correlated driver. Exact for GBM and for the log-Euler SV scheme, which
    makes bumped re-pricing with common random numbers a recomputation
    rather than a re-simulation.
    """
    p = market_of(params)
    T = p.maturity
    m1 = drivers.int_sqrtV_dW1
    m2 = p.rho * drivers.int_sqrtV_dW1 + p.rho_bar * drivers.int_sqrtV_dW2
    q = drivers.int_V_dt
    s1 = p.x1 * np.exp((p.r - p.q1) * T - 0.5 * p.sigma1**2 * q + p.sigma1 * m1)
    s2 = p.x2 * np.exp((p.r - p.q2) * T - 0.5 * p.sigma2**2 * q + p.sigma2 * m2)
    return s1, s2


def gbm_terminal(params: MarketParams, normals) -> DriverSummary:
    """Exact terminal sample under correlated GBM.

    Args:
        params: validated market parameters.
        normals: array of shape ``(2, n)`` of independent standard normals.
    """
    z = np.asarray(normals, dtype=float)
    T = params.maturity
    sqrt_t = math.sqrt(T)
    w1 = sqrt_t * z[0]
    w2 = sqrt_t * z[1]
    full = np.full_like(w1, T)
    ones = np.ones_like(w1)
    out = DriverSummary(
        w1T=w1,
        w2T=w2,
        s1T=ones,
        s2T=ones,
        int_dW1_over_sqrtV=w1,
        int_dW2_over_sqrtV=w2,
        int_dt_over_V=full,
        int_sqrtV_dt=full,
        int_dt_over_sqrtV=full,
        int_sqrtV_dW1=w1,
        int_sqrtV_dW2=w2,
        int_V_dt=full,
        vT=ones,
    )
    out.s1T, out.s2T = terminal_prices(out, params)
    return out


def sv_path(params: SvParams, normals: Iterable[np.ndarray], floor: float = VARIANCE_FLOOR) -> DriverSummary:
    """Euler path of the SV model with left-point integral accumulation.

    The variance uses full truncation: ``V+ = max(V, floor)`` feeds the drift,
    the diffusion and every accumulated integrand. Only the summary is kept.

    Args:
        params: validated SV parameters.
        normals: ``n_steps`` arrays of shape ``(3, n)`` (rows: W1~, W2~, Z),
            e.g. an ndarray of shape ``(n_steps, 3, n)`` or a generator.
        floor: variance floor.
    """
    grid = PathGrid(params.n_steps, params.base.maturity)
    dt = grid.dt
    sqrt_dt = math.sqrt(dt)
    kappa, nu = params.kappa, params.nu

    it = iter(normals)
    acc = None
    floor_hits = 0
    for _ in range(grid.n_steps):
        z = np.asarray(next(it), dtype=float)
        if acc is None:
            n = z.shape[1]
            v = np.full(n, float(params.v0))
            acc = {name: np.zeros(n) for name in ("w1", "w2", "i1", "i2", "j", "a", "b", "m1", "m2", "q")}
        below = v < floor
        floor_hits += int(np.count_nonzero(below))
        vp = np.where(below, floor, v)
        sq = np.sqrt(vp)
        dw1 = sqrt_dt * z[0]
        dw2 = sqrt_dt * z[1]
        acc["w1"] += dw1
        acc["w2"] += dw2
        acc["i1"] += dw1 / sq
        acc["i2"] += dw2 / sq
        acc["m1"] += sq * dw1
        acc["m2"] += sq * dw2
        acc["j"] += dt / vp
        acc["a"] += sq * dt
        acc["b"] += dt / sq
        acc["q"] += vp * dt
        v = v + kappa * (1.0 - vp) * dt + nu * sq * (sqrt_dt * z[2])

    out = DriverSummary(
        w1T=acc["w1"],
        w2T=acc["w2"],
        s1T=acc["w1"],
        s2T=acc["w2"],
        int_dW1_over_sqrtV=acc["i1"],
        int_dW2_over_sqrtV=acc["i2"],
        int_dt_over_V=acc["j"],
        int_sqrtV_dt=acc["a"],
        int_dt_over_sqrtV=acc["b"],
        int_sqrtV_dW1=acc["m1"],
        int_sqrtV_dW2=acc["m2"],
        int_V_dt=acc["q"],
        vT=v,
        floor_hits=floor_hits,
    )
    out.s1T, out.s2T = terminal_prices(out, params)
    return out


def _antithetic(z: np.ndarray) -> np.ndarray:
    # pair (z, -z) on adjacent path slots
    full = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    full[..., 0::2] = z
    full[..., 1::2] = -z
    return full


def _batch_sizes(n_paths: int, batch_size: int) -> list[int]:
    full, rest = divmod(n_paths, batch_size)
    return [batch_size] * full + ([rest] if rest else [])


def _simulate_batch(params, size: int, rng: np.random.Generator, antithetic: bool) -> DriverSummary:
    m = size // 2 if antithetic else size
    if isinstance(params, SvParams):
        def steps():
            for _ in range(params.n_steps):
                z = rng.standard_normal((3, m))
                yield _antithetic(z) if antithetic else z

        return sv_path(params, steps())
    z = rng.standard_normal((2, m))
    return gbm_terminal(params, _antithetic(z) if antithetic else z)


def simulate(
    params,
    n_paths: int,
    seed: SeedSpec = SeedSpec(),
    *,
    antithetic: bool = False,
    threads: int | None = 1,
) -> DriverSummary:
    """Simulate ``n_paths`` driver summaries in batches.

    The result is bit-identical for any ``threads`` value: each batch owns its
    stream and batches are concatenated in index order. With ``antithetic``
    adjacent paths ``(2k, 2k+1)`` are driven by ``(z, -z)``.
    """
    validate(params)
    if n_paths < 1:
        raise ValueError(f"n_paths must be >= 1, got {n_paths}")
    if antithetic and (n_paths % 2 or seed.batch_size % 2):
        raise ValueError("antithetic sampling needs even n_paths and batch_size")
    sizes = _batch_sizes(n_paths, seed.batch_size)
    threads = (os.cpu_count() or 1) if threads is None else max(1, int(threads))

    def run(b):
        return _simulate_batch(params, sizes[b], seed.batch_rng(b), antithetic)

    if threads == 1 or len(sizes) == 1:
        parts = [run(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    return DriverSummary.concat(parts)


def dump_drivers(drivers: DriverSummary, path) -> None:
    """Write flat little-endian float64 records (field order of DriverSummary)."""
    drivers.to_records().tofile(path)


def load_drivers(path) -> DriverSummary:
    rec = np.fromfile(path, dtype=[(name, "<f8") for name in DriverSummary.FIELDS])
    return DriverSummary.from_records(rec)
