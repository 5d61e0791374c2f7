"""Non-crossing partition operads, unshuffle Hopf structure on partition
words, and numeric verification of operator-valued moment-cumulant
relations on block-matrix probability spaces."""

from .ncpart import (
    EMPTY,
    NCPartition,
    cuts,
    enumerate_interval,
    enumerate_nc,
    full_partition,
    gap_insert,
    partial_insert,
)
from .formal import FormalSum, PartitionWord, coproduct, delta_prec, delta_succ
from .ovps import OVMatrixSpace, MultiMap, moment_map, multimap_eq
from .cumulants import build_boolean, build_free, build_monotone, e_pi, moment_family, verify_mc
from .morphisms import convolve, exp_prec, exp_star, exp_succ, half_prec, half_succ, log_star
from .winsert import LetterWord, WWord, split, word_insert

__version__ = "0.1.0"

__all__ = [
    "EMPTY",
    "FormalSum",
    "LetterWord",
    "MultiMap",
    "NCPartition",
    "OVMatrixSpace",
    "PartitionWord",
    "WWord",
    "build_boolean",
    "build_free",
    "build_monotone",
    "convolve",
    "coproduct",
    "cuts",
    "delta_prec",
    "delta_succ",
    "e_pi",
    "enumerate_interval",
    "enumerate_nc",
    "exp_prec",
    "exp_star",
    "exp_succ",
    "full_partition",
    "gap_insert",
    "half_prec",
    "half_succ",
    "log_star",
    "moment_family",
    "moment_map",
    "multimap_eq",
    "partial_insert",
    "split",
    "verify_mc",
    "word_insert",
]
