"""
Monte Carlo chunk worker. Each chunk owns one Philox stream spawned from
the run seed, so the sample set does not depend on how chunks are spread
across processes.
"""
from multiprocessing import Pool
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..logging_config import get_logger

logger = get_logger(__name__)

ChunkTask = Tuple[Tuple[float, ...], Tuple[float, ...], float, int, np.random.SeedSequence]

# ||h1_perp||^2 below this fraction of ||h1||^2 means h1 is parallel to h2
PARALLEL_TOL = 1e-14


def complex_normal(rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    """CN(0, 1) by Box-Muller: real and imaginary parts iid N(0, 1/2)"""
    u1 = 1.0 - rng.random(shape)
    u2 = rng.random(shape)
    radius = np.sqrt(-np.log(u1))
    return radius * np.exp(2j * np.pi * u2)


def draw_channels(
    p1: Sequence[float], p2: Sequence[float], n: int, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    n_r = len(p1)
    g = complex_normal(rng, (n, 2, n_r))
    h1 = g[:, 0, :] * np.sqrt(np.asarray(p1, dtype=float))
    h2 = g[:, 1, :] * np.sqrt(np.asarray(p2, dtype=float))
    return h1, h2


def rank_one_terms(h1: np.ndarray, h2: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """||h1||^2, ||h2||^2 and |h2^H h1|^2 per row"""
    n1 = np.sum(np.abs(h1) ** 2, axis=-1)
    n2 = np.sum(np.abs(h2) ** 2, axis=-1)
    cross = np.abs(np.sum(np.conj(h2) * h1, axis=-1)) ** 2
    return n1, n2, cross


def simulate_chunk(task: ChunkTask) -> Dict[str, np.ndarray]:
    p1, p2, sigma2, n, seed_seq = task
    rng = np.random.Generator(np.random.Philox(seed_seq))
    h1, h2 = draw_channels(p1, p2, n, rng)
    n1, n2, cross = rank_one_terms(h1, h2)
    zf_num = n1 - cross / n2
    mmse_num = n1 - cross / (sigma2 + n2)
    anomaly = (n2 <= 0) | (zf_num <= PARALLEL_TOL * n1)
    return {
        "mmse": mmse_num[~anomaly] / sigma2,
        "zf": zf_num[~anomaly] / sigma2,
        "anomalies": np.array(int(np.count_nonzero(anomaly))),
    }


def chunk_plan(n_samples: int, chunk: int, seed: int) -> List[Tuple[int, np.random.SeedSequence]]:
    n_chunks = -(-n_samples // chunk)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [chunk] * (n_chunks - 1) + [n_samples - chunk * (n_chunks - 1)]
    return list(zip(sizes, children))


def run_chunks(tasks: List[ChunkTask], workers: int) -> List[Dict[str, np.ndarray]]:
    if workers <= 1 or len(tasks) <= 1:
        return [simulate_chunk(t) for t in tasks]
    with Pool(processes=min(workers, len(tasks))) as pool:
        return pool.map(simulate_chunk, tasks)
