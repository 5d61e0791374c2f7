"""Concrete operator-valued probability spaces over matrix algebras.

The model: A is the algebra of (d*k) x (d*k) complex matrices, B the d x d
matrices embedded as b -> b (x) I_k, and the conditional expectation takes
the normalized trace of each k x k block.  Multilinear maps B^n -> B are
held as evaluation DAGs whose leaves are generator maps and whose internal
nodes are operadic compositions or pointwise linear combinations; evaluation
is vectorized over batches of argument tuples.

All tolerances are relative with an absolute floor of 1e-12.
"""

from __future__ import annotations

import itertools

import numpy as np

DEFAULT_TOL = 1e-9
ABS_FLOOR = 1e-12
EXACT_BASIS_LIMIT = 4096
N_PROBES = 20
_PROBE_SEED = 0x0C0FFEE


class DimensionMismatch(ValueError):
    """Matrix or arity dimensions do not match the owning space."""


def matrix_to_json(m) -> list:
    """Nested [re, im] pairs, row-major."""
    m = np.asarray(m)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in data])


def random_matrix(rng, n, scale=1.0) -> np.ndarray:
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)


def random_hermitian(rng, n, scale=1.0) -> np.ndarray:
    m = random_matrix(rng, n, scale)
    return (m + m.conj().T) / 2


class OVMatrixSpace:
    """Operator-valued probability space (A, E, B) on block matrices.

    ``variables`` maps variable indices to elements of A; pass an int to get
    that many seeded pseudorandom Hermitian variables instead.
    """

    def __init__(self, d: int, k: int, variables=2, seed: int = 7, check: bool = True):
        if d < 1 or k < 1:
            raise DimensionMismatch("dimensions must be positive")
        self.d = d
        self.k = k
        self.dk = d * k
        self.seed = seed
        if isinstance(variables, int):
            rng = np.random.default_rng(seed)
            variables = {
                i: random_hermitian(rng, self.dk) for i in range(variables)
            }
        self.variables = {}
        for idx, mat in variables.items():
            mat = np.asarray(mat, dtype=complex)
            if mat.shape != (self.dk, self.dk):
                raise DimensionMismatch(
                    "variable %r has shape %r, expected (%d, %d)"
                    % (idx, mat.shape, self.dk, self.dk)
                )
            self.variables[int(idx)] = mat
        self._eye_b = np.eye(d, dtype=complex)
        self._eye_a = np.eye(self.dk, dtype=complex)
        if check:
            self._self_check()

    def _self_check(self):
        assert np.max(np.abs(self.cond_expect(self._eye_a) - self._eye_b)) <= ABS_FLOOR
        rng = np.random.default_rng(self.seed + 1)
        for _ in range(3):
            a = random_matrix(rng, self.dk)
            b1, b2 = random_matrix(rng, self.d), random_matrix(rng, self.d)
            lhs = self.cond_expect(self.embed(b1) @ a @ self.embed(b2))
            rhs = b1 @ self.cond_expect(a) @ b2
            assert np.max(np.abs(lhs - rhs)) <= ABS_FLOOR * max(1.0, np.max(np.abs(rhs)))

    @property
    def identity_b(self) -> np.ndarray:
        return self._eye_b

    @property
    def identity_a(self) -> np.ndarray:
        return self._eye_a

    def variable(self, idx: int) -> np.ndarray:
        if idx not in self.variables:
            raise KeyError("unknown variable index %r" % (idx,))
        return self.variables[idx]

    def embed(self, b) -> np.ndarray:
        """b -> b (x) I_k, vectorized over leading axes."""
        b = np.asarray(b, dtype=complex)
        if b.shape[-2:] != (self.d, self.d):
            raise DimensionMismatch("expected trailing shape (%d, %d)" % (self.d, self.d))
        out = np.einsum("...ij,ab->...iajb", b, np.eye(self.k))
        return out.reshape(b.shape[:-2] + (self.dk, self.dk))

    def cond_expect(self, a) -> np.ndarray:
        """Blockwise normalized trace: entry (i, j) is tr(block_ij) / k."""
        a = np.asarray(a, dtype=complex)
        if a.shape[-2:] != (self.dk, self.dk):
            raise DimensionMismatch(
                "expected trailing shape (%d, %d)" % (self.dk, self.dk)
            )
        blocks = a.reshape(a.shape[:-2] + (self.d, self.k, self.d, self.k))
        return np.einsum("...iaja->...ij", blocks) / self.k


class MultiMap:
    """Multilinear map B^{(x) arity} -> B over a matrix space.

    ``kind`` is one of 'gen' (leaf evaluator), 'compose' (operadic
    composition) or 'lincomb' (pointwise linear combination).  Instances are
    immutable; evaluation accepts stacked argument batches of shape
    (N, d, d) per slot.
    """

    __slots__ = ("space", "arity", "kind", "fn", "label", "parts")

    def __init__(self, space, arity, kind, fn=None, label="", parts=()):
        self.space = space
        self.arity = arity
        self.kind = kind
        self.fn = fn
        self.label = label
        self.parts = tuple(parts)

    def eval_batch(self, args) -> np.ndarray:
        if len(args) != self.arity:
            raise DimensionMismatch(
                "%s expects %d arguments, got %d" % (self, self.arity, len(args))
            )
        if self.kind == "gen":
            return self.fn(args)
        if self.kind == "compose":
            alpha, betas = self.parts[0], self.parts[1:]
            fed, pos = [], 0
            for beta in betas:
                fed.append(beta.eval_batch(args[pos : pos + beta.arity]))
                pos += beta.arity
            return alpha.eval_batch(fed)
        if self.kind == "lincomb":
            n = args[0].shape[0] if args else 1
            total = np.zeros((n, self.space.d, self.space.d), dtype=complex)
            for coeff, m in self.parts:
                total += complex(coeff) * m.eval_batch(args)
            return total
        raise AssertionError(self.kind)

    def eval(self, *args) -> np.ndarray:
        batch = [np.asarray(a, dtype=complex)[None, :, :] for a in args]
        return self.eval_batch(batch)[0]

    def __repr__(self):
        return "MultiMap(%s, arity=%d)" % (self.label or self.kind, self.arity)


def identity_map(space) -> MultiMap:
    return MultiMap(space, 1, "gen", fn=lambda args: args[0], label="id_B")


def moment_map(space, var_indices) -> MultiMap:
    """(b_0, ..., b_n) -> E(b_0 a_{v_1} b_1 ... a_{v_n} b_n).

    With no variables this is the identity on B.
    """
    var_indices = tuple(int(v) for v in var_indices)
    mats = [space.variable(v) for v in var_indices]

    def fn(args):
        acc = space.embed(args[0])
        for mat, b in zip(mats, args[1:]):
            acc = acc @ mat @ space.embed(b)
        return space.cond_expect(acc)

    label = "E[%s]" % ",".join(str(v) for v in var_indices)
    return MultiMap(space, len(var_indices) + 1, "gen", fn=fn, label=label)


def sandwich_map(space, mats, label="sandwich") -> MultiMap:
    """(b_1, ..., b_n) -> A_0 b_1 A_1 ... b_n A_n for fixed d x d matrices."""
    mats = [np.asarray(m, dtype=complex) for m in mats]

    def fn(args):
        acc = np.broadcast_to(mats[0], args[0].shape).copy()
        for mat, b in zip(mats[1:], args):
            acc = acc @ b @ mat
        return acc

    return MultiMap(space, len(mats) - 1, "gen", fn=fn, label=label)


def random_multimap(space, arity, rng, label="random") -> MultiMap:
    return sandwich_map(
        space, [random_matrix(rng, space.d) for _ in range(arity + 1)], label=label
    )


def multimap_compose(alpha: MultiMap, betas) -> MultiMap:
    """Operadic composition: feed grouped arguments through the betas, then
    through alpha.  Composing with identities in every slot returns alpha."""
    betas = tuple(betas)
    if len(betas) != alpha.arity:
        raise DimensionMismatch(
            "expected %d inner maps, got %d" % (alpha.arity, len(betas))
        )
    if any(b.space is not alpha.space for b in betas):
        raise DimensionMismatch("maps live over different spaces")
    if all(b.kind == "gen" and b.label == "id_B" for b in betas):
        return alpha
    if alpha.kind == "gen" and alpha.label == "id_B":
        return betas[0]
    arity = sum(b.arity for b in betas)
    return MultiMap(alpha.space, arity, "compose", parts=(alpha,) + betas)


def multimap_partial(alpha: MultiMap, slot: int, beta: MultiMap) -> MultiMap:
    """Insert ``beta`` into input ``slot`` of ``alpha`` (1-based)."""
    if not 1 <= slot <= alpha.arity:
        raise DimensionMismatch("slot %d out of range 1..%d" % (slot, alpha.arity))
    betas = [identity_map(alpha.space)] * alpha.arity
    betas[slot - 1] = beta
    return multimap_compose(alpha, betas)


def multimap_lincomb(space, arity, terms) -> MultiMap:
    """Pointwise linear combination; flattens nested combinations."""
    flat = []
    for coeff, m in terms:
        if m.arity != arity:
            raise DimensionMismatch("arity mismatch in linear combination")
        if complex(coeff) == 0:
            continue
        if m.kind == "lincomb":
            flat.extend((complex(coeff) * complex(c2), m2) for c2, m2 in m.parts)
        else:
            flat.append((complex(coeff), m))
    return MultiMap(space, arity, "lincomb", parts=tuple(flat))


def multimap_zero(space, arity) -> MultiMap:
    return MultiMap(space, arity, "lincomb", parts=())


def multimap_scale(coeff, m: MultiMap) -> MultiMap:
    return multimap_lincomb(m.space, m.arity, [(coeff, m)])


# ---------------------------------------------------------------------------
# Probe batches and numeric equality


def elementary_batch(d: int, arity: int):
    """One batch per slot covering every tuple of elementary matrices."""
    n_mats = d * d
    total = n_mats ** arity
    elems = np.zeros((n_mats, d, d), dtype=complex)
    for a in range(d):
        for b in range(d):
            elems[a * d + b, a, b] = 1.0
    codes = np.arange(total)
    batches = []
    for slot in range(arity):
        idx = (codes // (n_mats ** (arity - 1 - slot))) % n_mats
        batches.append(elems[idx])
    return batches


def probe_batch(d: int, arity: int, n_probes: int = N_PROBES, seed: int = _PROBE_SEED):
    rng = np.random.default_rng(seed)
    return [
        (rng.standard_normal((n_probes, d, d)) + 1j * rng.standard_normal((n_probes, d, d)))
        / np.sqrt(2)
        for _ in range(arity)
    ]


def argument_batch(d: int, arity: int, seed: int = _PROBE_SEED, limit: int = EXACT_BASIS_LIMIT):
    """Elementary-basis batch when feasible, seeded probes otherwise."""
    if (d * d) ** arity <= limit:
        return elementary_batch(d, arity)
    return probe_batch(d, arity, seed=seed)


def deviation(x, y) -> float:
    """Relative max deviation with an absolute floor of 1e-12."""
    diff = float(np.max(np.abs(x - y))) if np.size(x) else 0.0
    scale = max(float(np.max(np.abs(x))) if np.size(x) else 0.0,
                float(np.max(np.abs(y))) if np.size(y) else 0.0,
                1.0)
    if diff <= ABS_FLOOR:
        return 0.0
    return diff / scale


def multimap_dev(f: MultiMap, g: MultiMap, seed: int = _PROBE_SEED) -> float:
    """Max relative deviation of f and g over the probe batch."""
    if f.arity != g.arity:
        raise DimensionMismatch("arity %d vs %d" % (f.arity, g.arity))
    args = argument_batch(f.space.d, f.arity, seed=seed)
    return deviation(f.eval_batch(args), g.eval_batch(args))


def multimap_eq(f: MultiMap, g: MultiMap, tol: float = DEFAULT_TOL, seed: int = _PROBE_SEED) -> bool:
    """Decide f == g by evaluating on all tuples of elementary matrices when
    (d^2)^arity <= 4096, otherwise on 20 seeded pseudorandom tuples."""
    return multimap_dev(f, g, seed=seed) <= tol


# ---------------------------------------------------------------------------
# Words of maps


class MultiMapWord:
    """Horizontal word of multilinear maps: outputs = length, inputs = total
    arity."""

    __slots__ = ("space", "maps")

    def __init__(self, space, maps=()):
        self.space = space
        self.maps = tuple(maps)
        assert all(m.space is space for m in self.maps)

    @property
    def outputs(self):
        return len(self.maps)

    @property
    def inputs(self):
        return sum(m.arity for m in self.maps)

    def profile(self):
        return tuple(m.arity for m in self.maps)

    def __iter__(self):
        return iter(self.maps)

    def __len__(self):
        return len(self.maps)

    def __repr__(self):
        return "MultiMapWord(%r)" % (list(self.maps),)


def identity_word(space, n) -> MultiMapWord:
    return MultiMapWord(space, (identity_map(space),) * n)


def vcompose_maps(x: MultiMapWord, y: MultiMapWord) -> MultiMapWord:
    """Group the maps of ``y`` by the arities of the maps of ``x`` and compose
    letter by letter."""
    if x.inputs != y.outputs:
        raise DimensionMismatch(
            "vertical mismatch: %d inputs vs %d outputs" % (x.inputs, y.outputs)
        )
    out, pos = [], 0
    for m in x.maps:
        out.append(multimap_compose(m, y.maps[pos : pos + m.arity]))
        pos += m.arity
    return MultiMapWord(x.space, out)


def hconcat_maps(x: MultiMapWord, y: MultiMapWord) -> MultiMapWord:
    return MultiMapWord(x.space, x.maps + y.maps)
