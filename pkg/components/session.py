"""
Run session module for the state a command shares across its sweeps:
seed, worker count and output directory.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np

from components.config import threads_from_env
from components.errors import ConfigError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

session_state: dict = {}


def set_run_session(seed: int, threads: int, out_dir: str):
    """
    Start a run.

    Args:
        seed: root seed of every random stream in the run
        threads: worker cap for parallel sweeps
        out_dir: directory receiving reports and curves
    """
    session_state["active"] = True
    session_state["seed"] = int(seed)
    session_state["threads"] = int(threads)
    session_state["out_dir"] = out_dir


def clear_run_session():
    for key in ["active", "seed", "threads", "out_dir"]:
        session_state.pop(key, None)


def is_active() -> bool:
    return session_state.get("active", False)


def get_run_session() -> dict:
    if not is_active():
        return {}
    return {
        "seed": session_state["seed"],
        "threads": session_state["threads"],
        "out_dir": session_state["out_dir"],
    }


def require_session() -> dict:
    if not is_active():
        raise ConfigError("no run session; call set_run_session first")
    return get_run_session()


def resolve_threads(flag: Optional[int] = None) -> int:
    """--threads, then CUTOFFLAB_THREADS, then the available CPUs."""
    if flag is not None:
        if flag < 1:
            raise ConfigError("--threads must be at least 1")
        return int(flag)
    env = threads_from_env()
    if env is not None:
        return env
    return os.cpu_count() or 1


def worker_generators(seed: int, workers: int) -> List[np.random.Generator]:
    """Independent streams derived from one root seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(workers)]


def parallel_map(
    fn: Callable[[T, np.random.Generator], R],
    items: Sequence[T],
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> List[R]:
    """
    Apply ``fn(item, rng)`` to every item on a thread pool.

    Item i always receives stream i of the root seed, so results are the
    same for any worker count; they come back in item order.
    """
    if seed is None or threads is None:
        current = require_session()
        seed = current["seed"] if seed is None else seed
        threads = current["threads"] if threads is None else threads
    items = list(items)
    rngs = worker_generators(seed, len(items))
    if threads <= 1 or len(items) <= 1:
        return [fn(item, rng) for item, rng in zip(items, rngs)]
    logger.debug("parallel_map: %d items on %d threads", len(items), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, rngs))
