"""Lennard-Jones kernels and the cell-pair force strategies."""

from .lj import BlockResult, PairResult, lj_block, lj_pair, minimum_image
from .strategies import KERNELS, cell_pair_lpc, cell_pair_lpc_plus, cell_pair_lpm, force_sweep

__all__ = [
    "BlockResult",
    "KERNELS",
    "PairResult",
    "cell_pair_lpc",
    "cell_pair_lpc_plus",
    "cell_pair_lpm",
    "force_sweep",
    "lj_block",
    "lj_pair",
    "minimum_image",
]
