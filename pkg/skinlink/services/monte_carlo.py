"""Monte Carlo simulation of the misalignment channel.

Samples are drawn in fixed-size blocks; block ``i`` always uses the PCG64
stream derived from ``SeedSequence(seed, spawn_key=(i,))`` and blocks are
merged in index order, so estimates depend only on the seed, the sample
count and the block size, never on how many worker threads ran them.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Tuple

import numpy as np

from skinlink.models.schemas import McConfig, RxConfig, TxConfig
from skinlink.services.channel import MisalignmentParams
from skinlink.services.noise_snr import instantaneous_snr

logger = logging.getLogger(__name__)

RNG_NAME = "PCG64"
LN2 = math.log(2.0)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n: int


@dataclass(frozen=True)
class _Moments:
    """Count, mean and sum of squared deviations of one block (or a merge of blocks)."""

    n: int
    mean: float
    m2: float

    @classmethod
    def of(cls, values: np.ndarray) -> "_Moments":
        n = int(values.size)
        mean = math.fsum(values.tolist()) / n
        m2 = math.fsum(np.square(values - mean).tolist())
        return cls(n=n, mean=mean, m2=m2)

    def merge(self, other: "_Moments") -> "_Moments":
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        return _Moments(n=n, mean=mean, m2=m2)

    def estimate(self) -> McEstimate:
        if self.n < 2:
            return McEstimate(mean=self.mean, std_error=0.0, n=self.n)
        variance = max(self.m2, 0.0) / (self.n - 1)
        return McEstimate(mean=self.mean, std_error=math.sqrt(variance / self.n), n=self.n)


def block_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def sample_radial(sigma_s: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Rayleigh radial displacement by inverse-CDF sampling."""
    return rng.rayleigh(scale=sigma_s, size=size)


def sample_radial_two_gaussian(sigma_s: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Radial displacement as the norm of independent sway and elevation offsets."""
    offsets = rng.normal(0.0, sigma_s, size=(2, size))
    return np.hypot(offsets[0], offsets[1])


def sample_hp(params: MisalignmentParams, r: np.ndarray) -> np.ndarray:
    """h_p = A0·exp(-2r²/w_eq²)."""
    return params.a0 * np.exp(-2.0 * np.square(r) / params.w_eq_sq)


def _blocks(cfg: McConfig) -> List[Tuple[int, int]]:
    full, rest = divmod(cfg.n_samples, cfg.block_size)
    sizes = [cfg.block_size] * full + ([rest] if rest else [])
    return list(enumerate(sizes))


def _run_blocks(
    cfg: McConfig,
    statistics: Callable[[np.random.Generator, int], Dict[str, np.ndarray]],
) -> Dict[str, McEstimate]:
    blocks = _blocks(cfg)
    logger.debug(
        "Monte Carlo: %d samples in %d blocks of %d on %d stream(s), seed=%d",
        cfg.n_samples,
        len(blocks),
        cfg.block_size,
        cfg.n_streams,
        cfg.seed,
    )

    def run(block: Tuple[int, int]) -> Dict[str, _Moments]:
        index, size = block
        values = statistics(block_rng(cfg.seed, index), size)
        return {name: _Moments.of(series) for name, series in values.items()}

    with ThreadPoolExecutor(max_workers=cfg.n_streams) as executor:
        partials: Iterable[Dict[str, _Moments]] = executor.map(run, blocks)
        merged: Dict[str, _Moments] = {}
        for partial in partials:
            for name, moments in partial.items():
                merged[name] = merged[name].merge(moments) if name in merged else moments
    return {name: moments.estimate() for name, moments in merged.items()}


def estimate_metrics(
    cfg: McConfig,
    params: MisalignmentParams,
    sigma_s: float,
    resp: float,
    h_l_sq: float,
    tx: TxConfig,
    rx: RxConfig,
    gamma_th: float,
) -> Dict[str, McEstimate]:
    """Empirical average SNR, outage probability and spectral efficiency.

    ``sigma_s`` drives the simulated displacement; ``params`` supplies A0 and
    w_eq, so ξ enters only through the sampled channel.
    """
    psi = rx.scheme.psi

    def statistics(rng: np.random.Generator, size: int) -> Dict[str, np.ndarray]:
        hp = sample_hp(params, sample_radial(sigma_s, rng, size))
        snr = instantaneous_snr(hp, resp, h_l_sq, tx, rx)
        return {
            "avg_snr": snr,
            "outage": (snr <= gamma_th).astype(float),
            "se": np.log1p(psi * snr) / (2.0 * LN2),
        }

    return _run_blocks(cfg, statistics)


def estimate_hp_moments(cfg: McConfig, params: MisalignmentParams, sigma_s: float) -> Dict[str, McEstimate]:
    """Empirical E[h_p] and E[h_p²]."""

    def statistics(rng: np.random.Generator, size: int) -> Dict[str, np.ndarray]:
        hp = sample_hp(params, sample_radial(sigma_s, rng, size))
        return {"hp": hp, "hp2": np.square(hp)}

    return _run_blocks(cfg, statistics)


def binomial_std_error(probability: float, n: int) -> float:
    """Standard error of an event frequency over ``n`` draws when the event has ``probability``."""
    p = min(max(probability, 0.0), 1.0)
    return math.sqrt(p * (1.0 - p) / n)


def metadata(cfg: McConfig) -> Dict[str, object]:
    return {"rng": RNG_NAME, "seed": cfg.seed, "block_size": cfg.block_size, "n_samples": cfg.n_samples}
