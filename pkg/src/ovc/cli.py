"""Command-line driver: enumeration, cumulant tables and verification runs.

All input and output is JSON.  A configuration file fixes the matrix model
(base and fiber dimensions, named variables given explicitly or as seeded
Hermitian generators), the order and tolerance, and the suites to run.
Identical configuration and seed give byte-identical output.

Exit codes: 0 all checks pass, 1 an assertion failed, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import ncpart
from .cumulants import build_boolean, build_free, build_monotone, moment_family
from .ncpart import EnumerationBound, enumerate_interval, enumerate_nc
from .ovps import (
    EXACT_BASIS_LIMIT,
    OVMatrixSpace,
    elementary_batch,
    matrix_from_json,
    matrix_to_json,
    probe_batch,
    random_hermitian,
)
from .suites import SUITES, VerifyContext, run_suites

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_CONFIG = {
    "d": 2,
    "k": 2,
    "variables": {"a": {"seed": 101, "hermitian": True}, "b": {"seed": 102, "hermitian": True}},
    "max_order": 4,
    "tolerance": 1e-9,
    "seed": 7,
    "suites": sorted(SUITES),
}


class ConfigError(ValueError):
    pass


class RunConfig:
    """Validated run configuration; see DEFAULT_CONFIG for the shape."""

    def __init__(self, data):
        merged = dict(DEFAULT_CONFIG)
        merged.update(data or {})
        self.d = int(merged["d"])
        self.k = int(merged["k"])
        self.max_order = int(merged["max_order"])
        self.tolerance = float(merged["tolerance"])
        self.seed = int(merged["seed"])
        self.suites = list(merged["suites"])
        self.variable_specs = dict(merged["variables"])
        if self.d < 1 or self.k < 1 or self.d * self.k > 16:
            raise ConfigError("require 1 <= d, k and d*k <= 16")
        if not 1 <= self.max_order <= 8:
            raise ConfigError("require 1 <= max_order <= 8")
        if self.tolerance < 1e-12:
            raise ConfigError("tolerance must be at least 1e-12")
        if not self.variable_specs:
            raise ConfigError("at least one variable is required")
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise ConfigError("unknown suites: %s" % ", ".join(unknown))

    @property
    def variable_names(self):
        return list(self.variable_specs)

    def variable_index(self, name):
        try:
            return self.variable_names.index(name)
        except ValueError:
            raise ConfigError("unknown variable %r" % name) from None

    def build_space(self, d=None, k=None) -> OVMatrixSpace:
        d = self.d if d is None else d
        k = self.k if k is None else k
        variables = {}
        for i, (name, spec) in enumerate(self.variable_specs.items()):
            if isinstance(spec, dict):
                rng = np.random.default_rng(int(spec.get("seed", self.seed + i)))
                mat = random_hermitian(rng, d * k)
                if not spec.get("hermitian", True):
                    rng2 = np.random.default_rng(int(spec.get("seed", self.seed + i)) + 1)
                    mat = (mat + random_hermitian(rng2, d * k) * 1j) / np.sqrt(2)
            else:
                mat = matrix_from_json(spec)
                if mat.shape != (d * k, d * k):
                    raise ConfigError(
                        "variable %r has shape %r, expected (%d, %d)"
                        % (name, mat.shape, d * k, d * k)
                    )
            variables[i] = mat
        return OVMatrixSpace(d=d, k=k, variables=variables, seed=self.seed)


def _load_config(ns) -> RunConfig:
    data = {}
    if getattr(ns, "config", None):
        with open(ns.config) as fh:
            data = json.load(fh)
    if getattr(ns, "order", None) is not None:
        data["max_order"] = ns.order
    if getattr(ns, "tol", None) is not None:
        data["tolerance"] = ns.tol
    if getattr(ns, "seed", None) is not None:
        data["seed"] = ns.seed
    if getattr(ns, "suite", None):
        data["suites"] = [s.strip() for s in ns.suite.split(",") if s.strip()]
    return RunConfig(data)


def _emit(ns, payload) -> None:
    indent = getattr(ns, "json_indent", None)
    print(json.dumps(payload, sort_keys=True, indent=indent))


# ---------------------------------------------------------------------------
# Subcommands


def cmd_enumerate(ns) -> int:
    kind = enumerate_interval if ns.interval else enumerate_nc
    try:
        parts = kind(ns.p)
    except EnumerationBound as exc:
        _emit(ns, {"error": str(exc)})
        return EXIT_USAGE
    _emit(ns, {"count": len(parts), "partitions": [ncpart.to_text(pi) for pi in parts]})
    return EXIT_OK


def _parse_word(config: RunConfig, text: str):
    text = text.strip()
    if text == "e":
        return ()
    return tuple(config.variable_index(t) for t in text.split("."))


def cmd_cumulants(ns) -> int:
    config = _load_config(ns)
    word = _parse_word(config, ns.word)
    if len(word) > config.max_order:
        raise ConfigError(
            "word length %d exceeds max_order %d" % (len(word), config.max_order)
        )
    space = config.build_space()
    moments = moment_family(space, config.max_order)
    family = {
        "moment": lambda: moments,
        "free": lambda: build_free(moments),
        "boolean": lambda: build_boolean(moments),
        "monotone": lambda: build_monotone(moments),
    }[ns.kind]()
    gen = family.generator(word)
    if (space.d * space.d) ** gen.arity <= EXACT_BASIS_LIMIT:
        batch, basis = elementary_batch(space.d, gen.arity), "elementary"
    else:
        batch, basis = probe_batch(space.d, gen.arity, seed=config.seed), "probes"
    values = gen.eval_batch(batch)
    _emit(
        ns,
        {
            "kind": ns.kind,
            "word": ns.word,
            "arity": gen.arity,
            "d": space.d,
            "k": space.k,
            "basis": basis,
            "values": [matrix_to_json(v) for v in values],
        },
    )
    return EXIT_OK


def cmd_verify(ns) -> int:
    config = _load_config(ns)
    ctx = VerifyContext(
        space=config.build_space(),
        scalar_space=config.build_space(d=1, k=4),
        tol=config.tolerance,
        seed=config.seed,
        max_order=config.max_order,
        hopf_size=min(config.max_order + 1, 5),
        hopf_letters=3,
        numeric_size=config.max_order,
        fault_word=(0, 0) if ns.inject_fault else None,
    )
    report = run_suites(ctx, config.suites)
    payload = {
        "config": {
            "d": config.d,
            "k": config.k,
            "max_order": config.max_order,
            "seed": config.seed,
            "suites": sorted(config.suites),
            "tolerance": config.tolerance,
            "fault_injected": bool(ns.inject_fault),
        },
        "passed": report["passed"],
        "suites": report["suites"],
    }
    _emit(ns, payload)
    return EXIT_OK if report["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# Entry point


def _add_common(sub):
    sub.add_argument("--config", help="path to a JSON configuration file")
    sub.add_argument("--order", type=int, help="override max_order")
    sub.add_argument("--tol", type=float, help="override the tolerance")
    sub.add_argument("--seed", type=int, help="override the seed")
    sub.add_argument("--json-indent", type=int, default=None, help="pretty-print JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ovc",
        description="non-crossing partition operads and operator-valued moment-cumulant checks",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_enum = subs.add_parser("enumerate", help="list non-crossing or interval partitions")
    p_enum.add_argument("p", type=int, help="number of partitioned elements")
    p_enum.add_argument("--interval", action="store_true", help="interval partitions only")
    _add_common(p_enum)
    p_enum.set_defaults(fn=cmd_enumerate)

    p_cum = subs.add_parser("cumulants", help="evaluate a moment or cumulant map")
    p_cum.add_argument(
        "--kind",
        choices=("moment", "free", "boolean", "monotone"),
        required=True,
    )
    p_cum.add_argument(
        "--word",
        required=True,
        help="variable word, names joined by '.', e.g. a.b.a ('e' for the empty word)",
    )
    _add_common(p_cum)
    p_cum.set_defaults(fn=cmd_cumulants)

    p_ver = subs.add_parser("verify", help="run verification suites")
    p_ver.add_argument("--suite", help="comma-separated suite names (default: all)")
    p_ver.add_argument(
        "--inject-fault",
        action="store_true",
        help="corrupt one free-cumulant table entry; the run must then fail",
    )
    _add_common(p_ver)
    p_ver.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.fn(ns)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
