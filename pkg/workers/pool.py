"""
Chunked Parallel Worker
Runs per-point work over contiguous chunks on a thread pool
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List
import logging
import os

logger = logging.getLogger(__name__)

NLPF_THREADS = os.getenv('NLPF_THREADS', '')
CHUNK_SIZE = int(os.getenv('NLPF_CHUNK_SIZE', '1024'))


def worker_count() -> int:
    """Number of worker threads allowed (NLPF_THREADS, else hardware parallelism)"""
    if NLPF_THREADS.strip():
        try:
            return max(1, int(NLPF_THREADS))
        except ValueError:
            logger.warning("Ignoring invalid NLPF_THREADS=%r", NLPF_THREADS)
    return max(1, os.cpu_count() or 1)


def chunk_bounds(total: int, chunk_size: int = None) -> List[range]:
    """Split range(total) into contiguous chunks"""
    size = max(1, chunk_size or CHUNK_SIZE)
    return [range(start, min(start + size, total)) for start in range(0, total, size)]


def map_chunks(func: Callable[[range], object], total: int, chunk_size: int = None) -> list:
    """
    Apply `func` to every chunk of range(total)

    Args:
        func: Callable receiving a range of point indices
        total: Number of items
        chunk_size: Items per chunk (defaults to NLPF_CHUNK_SIZE)

    Returns:
        list: One result per chunk, in chunk order
    """
    chunks = chunk_bounds(total, chunk_size)
    workers = min(worker_count(), len(chunks))
    if workers <= 1:
        return [func(chunk) for chunk in chunks]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, chunks))
