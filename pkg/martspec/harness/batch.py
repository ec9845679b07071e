"""
Functions for running the (size, seed) cells of an experiment with
multiprocessing.

Cells are independent, so they run unordered in a bounded worker pool; the
results are sorted by (size, seed) before anything is aggregated.
"""

import multiprocessing
from typing import Any, Callable

from tqdm import tqdm

Cell = tuple[Any, int, int]
CellResult = tuple[dict[str, Any], float]


def run_batch(
    func: Callable[[Cell], CellResult],
    cells: list[Cell],
    threads: int = 1,
    quiet: bool = False,
) -> list[CellResult]:
    """
    Applies func to every cell, with a pool of threads worker processes
    (serially when threads is 1), and returns the results sorted by
    (size, seed). func must be a picklable top-level function.
    """
    if threads < 1:
        raise ValueError("Need at least one worker.")
    if threads == 1:
        results = _run_batch_serial(func, cells, quiet)
    elif quiet:
        results = _run_batch_quiet(func, cells, threads)
    else:
        results = _run_batch_loud(func, cells, threads)
    return sorted(results, key=lambda r: (r[0]["size"], r[0]["seed"]))


def _run_batch_serial(
    func: Callable[[Cell], CellResult], cells: list[Cell], quiet: bool
) -> list[CellResult]:
    """Runs in this process."""
    return [func(cell) for cell in tqdm(cells, disable=quiet)]


def _run_batch_loud(
    func: Callable[[Cell], CellResult], cells: list[Cell], threads: int
) -> list[CellResult]:
    """Uses tqdm to show progress."""
    with multiprocessing.Pool(processes=threads) as pool:
        return list(
            tqdm(
                pool.imap_unordered(func, cells),
                total=len(cells),
            )
        )


def _run_batch_quiet(
    func: Callable[[Cell], CellResult], cells: list[Cell], threads: int
) -> list[CellResult]:
    """Does not use tqdm to show progress."""
    with multiprocessing.Pool(processes=threads) as pool:
        return list(pool.imap_unordered(func, cells))
