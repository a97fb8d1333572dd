"""A loop-free, prefix-free description language for integer n-tuples.

Programs are conditioned on the vector length ``n``. Each program has a
bit-exact self-delimiting encoding:

    opcode (3 bits)   ZERO=000 CONST=001 UNIT=010 LIT=011
                      SUM=100  SCALE=101 WALSH=110 (111 reserved)
    index             big-endian, ceil(log2 n) bits
    integer           Elias gamma of zigzag(v) + 1

    CONST c | UNIT i c | LIT v_1..v_n | SUM p q | SCALE c p | WALSH i

``K_D(x)`` is the length of the shortest encoding that evaluates to ``x``.
It is computed exactly, up to a bit budget, by :class:`Codebook`.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Iterator, Literal, Union

import numpy as np

from .linalg import INT_GUARD, ExactArithmeticError
from .walsh import is_power_of_two, walsh_function, walsh_system

MAX_BUDGET = 40

OPCODES = {
    "zero": "000",
    "const": "001",
    "unit": "010",
    "lit": "011",
    "sum": "100",
    "scale": "101",
    "walsh": "110",
}
_OP_BY_BITS = {v: k for k, v in OPCODES.items()}


class DecodeError(ValueError):
    """Bit string is not a valid program encoding."""


# --- program AST -----------------------------------------------------------

@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Const:
    c: int


@dataclass(frozen=True)
class Unit:
    i: int
    c: int


@dataclass(frozen=True)
class Lit:
    values: tuple[int, ...]


@dataclass(frozen=True)
class Sum:
    left: "Program"
    right: "Program"


@dataclass(frozen=True)
class Scale:
    c: int
    inner: "Program"


@dataclass(frozen=True)
class Walsh:
    i: int


Program = Union[Zero, Const, Unit, Lit, Sum, Scale, Walsh]


def to_sexpr(p: Program) -> str:
    """Render a program as an S-expression, e.g. ``(sum (unit 0 2) (unit 0 3))``."""
    if isinstance(p, Zero):
        return "(zero)"
    if isinstance(p, Const):
        return f"(const {p.c})"
    if isinstance(p, Unit):
        return f"(unit {p.i} {p.c})"
    if isinstance(p, Lit):
        return "(lit " + " ".join(str(v) for v in p.values) + ")"
    if isinstance(p, Sum):
        return f"(sum {to_sexpr(p.left)} {to_sexpr(p.right)})"
    if isinstance(p, Scale):
        return f"(scale {p.c} {to_sexpr(p.inner)})"
    if isinstance(p, Walsh):
        return f"(walsh {p.i})"
    raise TypeError(f"not a program: {p!r}")


# --- integer and index codes -----------------------------------------------

def zigzag(v: int) -> int:
    return 2 * v if v >= 0 else -2 * v - 1


def unzigzag(z: int) -> int:
    return z // 2 if z % 2 == 0 else -(z + 1) // 2


def gamma(m: int) -> str:
    """Elias gamma code of a positive integer."""
    if m < 1:
        raise ValueError(f"gamma code needs m >= 1, got {m}")
    body = bin(m)[2:]
    return "0" * (len(body) - 1) + body


def int_bits(v: int) -> str:
    return gamma(zigzag(v) + 1)


def int_len(v: int) -> int:
    return 2 * (zigzag(v) + 1).bit_length() - 1


def index_width(n: int) -> int:
    return (n - 1).bit_length()


def ints_with_code_length(k: int) -> list[int]:
    """All integers whose code is exactly k bits, in code order."""
    if k < 1 or k % 2 == 0:
        return []
    j = (k - 1) // 2
    return [unzigzag(m - 1) for m in range(1 << j, 1 << (j + 1))]


# --- encode / decode / evaluate --------------------------------------------

def _check_index(i: int, n: int) -> None:
    if not 0 <= i < n:
        raise ValueError(f"index {i} out of range for n={n}")


def index_bits(i: int, n: int) -> str:
    _check_index(i, n)
    w = index_width(n)
    return format(i, f"0{w}b") if w else ""


def encode(p: Program, n: int) -> str:
    """Self-delimiting bit string of ``p`` as a '0'/'1' string."""
    if isinstance(p, Zero):
        return OPCODES["zero"]
    if isinstance(p, Const):
        return OPCODES["const"] + int_bits(p.c)
    if isinstance(p, Unit):
        return OPCODES["unit"] + index_bits(p.i, n) + int_bits(p.c)
    if isinstance(p, Lit):
        if len(p.values) != n:
            raise ValueError(f"LIT needs {n} values, got {len(p.values)}")
        return OPCODES["lit"] + "".join(int_bits(v) for v in p.values)
    if isinstance(p, Sum):
        return OPCODES["sum"] + encode(p.left, n) + encode(p.right, n)
    if isinstance(p, Scale):
        return OPCODES["scale"] + int_bits(p.c) + encode(p.inner, n)
    if isinstance(p, Walsh):
        if not is_power_of_two(n):
            raise ValueError(f"WALSH is invalid for n={n} (not a power of two)")
        return OPCODES["walsh"] + index_bits(p.i, n)
    raise TypeError(f"not a program: {p!r}")


def encoded_length(p: Program, n: int) -> int:
    return len(encode(p, n))


class _Reader:
    def __init__(self, bits: str, n: int):
        if any(ch not in "01" for ch in bits):
            raise DecodeError("bit string may only contain '0' and '1'")
        self.bits = bits
        self.pos = 0
        self.n = n

    def take(self, k: int) -> str:
        if self.pos + k > len(self.bits):
            raise DecodeError(f"truncated stream at bit {self.pos}")
        out = self.bits[self.pos:self.pos + k]
        self.pos += k
        return out

    def integer(self) -> int:
        zeros = 0
        while True:
            if self.pos >= len(self.bits):
                raise DecodeError(f"truncated integer at bit {self.pos}")
            if self.bits[self.pos] == "1":
                break
            zeros += 1
            self.pos += 1
        m = int(self.take(zeros + 1), 2)
        return unzigzag(m - 1)

    def index(self) -> int:
        w = index_width(self.n)
        i = int(self.take(w), 2) if w else 0
        if i >= self.n:
            raise DecodeError(f"index {i} out of range for n={self.n}")
        return i

    def program(self) -> Program:
        op = _OP_BY_BITS.get(self.take(3))
        if op is None:
            raise DecodeError(f"invalid opcode 111 at bit {self.pos - 3}")
        if op == "zero":
            return Zero()
        if op == "const":
            return Const(self.integer())
        if op == "unit":
            i = self.index()
            return Unit(i, self.integer())
        if op == "lit":
            return Lit(tuple(self.integer() for _ in range(self.n)))
        if op == "sum":
            left = self.program()
            return Sum(left, self.program())
        if op == "scale":
            c = self.integer()
            return Scale(c, self.program())
        if not is_power_of_two(self.n):
            raise DecodeError(f"WALSH opcode is invalid for n={self.n}")
        return Walsh(self.index())


def decode(bits: str, n: int) -> tuple[Program, int]:
    """Parse one program from the front of ``bits``; return it and the bits consumed."""
    reader = _Reader(bits, n)
    prog = reader.program()
    return prog, reader.pos


def decode_exact(bits: str, n: int) -> Program:
    prog, used = decode(bits, n)
    if used != len(bits):
        raise DecodeError(f"{len(bits) - used} trailing bits after program")
    return prog


def _eval(p: Program, n: int) -> list[int]:
    if isinstance(p, Zero):
        return [0] * n
    if isinstance(p, Const):
        return [p.c] * n
    if isinstance(p, Unit):
        _check_index(p.i, n)
        out = [0] * n
        out[p.i] = p.c
        return out
    if isinstance(p, Lit):
        if len(p.values) != n:
            raise ValueError(f"LIT needs {n} values, got {len(p.values)}")
        return list(p.values)
    if isinstance(p, Sum):
        return [a + b for a, b in zip(_eval(p.left, n), _eval(p.right, n))]
    if isinstance(p, Scale):
        return [p.c * a for a in _eval(p.inner, n)]
    if isinstance(p, Walsh):
        return [int(v) for v in walsh_function(n, p.i)]
    raise TypeError(f"not a program: {p!r}")


def evaluate(p: Program, n: int) -> np.ndarray:
    """Output vector of ``p`` (exact; raises if an entry leaves the int64 guard)."""
    out = _eval(p, n)
    if any(abs(v) >= INT_GUARD for v in out):
        raise ExactArithmeticError("program output exceeds the int64 guard")
    return np.array(out, dtype=np.int64)


# --- streaming enumeration -------------------------------------------------

def _exact_programs(n: int, L: int, memo: dict) -> list[tuple[str, Program, tuple]]:
    """All programs with encoding length exactly L, sorted by bit string."""
    if L in memo:
        return memo[L]
    w = index_width(n)
    p = L - 3
    out: list[tuple[str, Program, tuple]] = []
    if L == 3:
        out.append(("000", Zero(), (0,) * n))
    for c in ints_with_code_length(p):
        out.append(("001" + int_bits(c), Const(c), (c,) * n))
    for i in range(n):
        for c in ints_with_code_length(p - w):
            v = [0] * n
            v[i] = c
            prog = Unit(i, c)
            out.append((encode(prog, n), prog, tuple(v)))
    for lengths in _odd_compositions(p, n):
        for vals in itertools.product(*(ints_with_code_length(k) for k in lengths)):
            prog = Lit(tuple(vals))
            out.append((encode(prog, n), prog, tuple(vals)))
    for l1 in range(3, p - 2):
        for b1, p1, v1 in _exact_programs(n, l1, memo):
            for b2, p2, v2 in _exact_programs(n, p - l1, memo):
                out.append(("100" + b1 + b2, Sum(p1, p2), tuple(a + b for a, b in zip(v1, v2))))
    for k in range(1, p - 2, 2):
        for c in ints_with_code_length(k):
            for b2, p2, v2 in _exact_programs(n, p - k, memo):
                out.append(("101" + int_bits(c) + b2, Scale(c, p2), tuple(c * a for a in v2)))
    if is_power_of_two(n) and p == w:
        for i in range(n):
            out.append((encode(Walsh(i), n), Walsh(i), tuple(int(v) for v in walsh_function(n, i))))
    out.sort(key=lambda t: t[0])
    memo[L] = out
    return out


def _odd_compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Ordered tuples of ``parts`` odd positive integers summing to ``total``."""
    if total < parts or (total - parts) % 2:
        return
    extra = (total - parts) // 2
    for cuts in itertools.combinations(range(extra + parts - 1), parts - 1):
        prev = -1
        sizes = []
        for c in cuts + (extra + parts - 1,):
            sizes.append(c - prev - 1)
            prev = c
        yield tuple(2 * s + 1 for s in sizes)


def enumerate_programs(n: int, lmax: int) -> Iterator[tuple[str, Program, np.ndarray]]:
    """Every valid encoding of length <= lmax, shortest first, ties in bit order."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if lmax < 3:
        raise ValueError("budget must be at least 3 bits")
    memo: dict = {}
    for L in range(3, lmax + 1):
        for bits, prog, vec in _exact_programs(n, L, memo):
            yield bits, prog, np.array(vec, dtype=np.int64)


# --- codebook: K_D for every vector up to a budget --------------------------

@dataclass
class ComplexityResult:
    status: Literal["found", "budget-exhausted"]
    budget: int
    kd_bits: int | None = None
    witness: Program | None = None
    vector: np.ndarray | None = field(default=None, repr=False)

    @property
    def found(self) -> bool:
        return self.status == "found"

    def to_dict(self) -> dict:
        out = {"status": self.status, "budget": self.budget, "kd_bits": self.kd_bits}
        if self.found:
            out["witness"] = to_sexpr(self.witness)
            out["witness_bits"] = encode_for_report(self)
            if self.vector is not None:
                out["vector"] = [int(v) for v in self.vector]
        return out


def encode_for_report(result: ComplexityResult) -> str | None:
    if result.witness is None or result.vector is None:
        return None
    return encode(result.witness, len(result.vector))


def _vec_key(v: np.ndarray) -> bytes:
    return np.ascontiguousarray(v, dtype=np.int64).tobytes()


class Codebook:
    """Distinct vectors with K_D <= lmax, in the order the enumerator first
    produces them (by level, then by the bit string of the first program).

    ``codes[k]`` holds the canonical witness encoding of ``vectors[k]`` as an
    integer of ``levels[k]`` bits.
    """

    def __init__(self, n: int, lmax: int, vectors: np.ndarray, levels: np.ndarray,
                 codes: np.ndarray, bound: int | None = None):
        self.n = n
        self.lmax = lmax
        self.vectors = vectors
        self.levels = levels
        self.codes = codes
        self.bound = bound
        for a in (vectors, levels, codes):
            a.setflags(write=False)
        self._index: dict[bytes, int] | None = None

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def _lookup(self) -> dict[bytes, int]:
        if self._index is None:
            self._index = {_vec_key(v): k for k, v in enumerate(self.vectors)}
        return self._index

    def position(self, x: np.ndarray) -> int:
        return self._lookup().get(_vec_key(x), -1)

    def witness(self, k: int) -> Program:
        L = int(self.levels[k])
        return decode_exact(format(int(self.codes[k]), f"0{L}b"), self.n)

    def witness_bits(self, k: int) -> str:
        return format(int(self.codes[k]), f"0{int(self.levels[k])}b")

    def result(self, k: int) -> ComplexityResult:
        return ComplexityResult("found", self.lmax, int(self.levels[k]), self.witness(k),
                                self.vectors[k])

    def kd(self, x: np.ndarray) -> ComplexityResult:
        x = np.asarray(x, dtype=np.int64)
        if x.shape != (self.n,):
            raise ValueError(f"expected a length-{self.n} vector, got shape {x.shape}")
        k = self.position(x)
        if k < 0:
            return ComplexityResult("budget-exhausted", self.lmax)
        return self.result(k)

    def upto(self, level: int) -> int:
        return int(np.searchsorted(self.levels, level, side="right"))

    def vectors_upto(self, level: int) -> tuple[np.ndarray, np.ndarray]:
        k = self.upto(level)
        return self.vectors[:k], self.levels[:k]

    def level_slices(self) -> Iterator[tuple[int, slice]]:
        for L in np.unique(self.levels):
            lo = int(np.searchsorted(self.levels, L, side="left"))
            hi = int(np.searchsorted(self.levels, L, side="right"))
            yield int(L), slice(lo, hi)

    def counts_by_level(self) -> dict[int, int]:
        return {L: s.stop - s.start for L, s in self.level_slices()}

    def truncate(self, lmax: int) -> "Codebook":
        if lmax >= self.lmax:
            return self
        k = self.upto(lmax)
        return Codebook(self.n, lmax, self.vectors[:k], self.levels[:k], self.codes[:k], self.bound)

    def restrict(self, bound: int | None) -> "Codebook":
        """Keep only vectors inside the grid ``|entry| <= bound`` (None keeps all)."""
        if bound is None:
            return self
        keep = np.abs(self.vectors).max(axis=1) <= bound
        return Codebook(self.n, self.lmax, self.vectors[keep], self.levels[keep],
                        self.codes[keep], bound)


def _dedupe_min_code(V: np.ndarray, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if V.shape[0] == 0:
        return V, C
    order = np.lexsort((C,) + tuple(V[:, j] for j in range(V.shape[1] - 1, -1, -1)))
    V, C = V[order], C[order]
    keep = np.ones(V.shape[0], dtype=bool)
    keep[1:] = (V[1:] != V[:-1]).any(axis=1)
    return V[keep], C[keep]


def _build_codebook(n: int, lmax: int) -> Codebook:
    w = index_width(n)
    # exact[L]: every vector some length-L program produces, with its smallest code
    exact: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    seen: set[bytes] = set()
    out_v, out_l, out_c = [], [], []
    for L in range(3, lmax + 1):
        p = L - 3
        vs: list[np.ndarray] = []
        cs: list[np.ndarray] = []

        def add(vec_rows, code_vals):
            vs.append(np.asarray(vec_rows, dtype=np.int64).reshape(-1, n))
            cs.append(np.asarray(code_vals, dtype=np.int64).reshape(-1))

        if L == 3:
            add(np.zeros(n), [0])
        for c in ints_with_code_length(p):
            add(np.full(n, c), [(1 << p) | int(int_bits(c), 2)])
        if p - w >= 1:
            for i in range(n):
                for c in ints_with_code_length(p - w):
                    v = np.zeros(n, dtype=np.int64)
                    v[i] = c
                    add(v, [(2 << p) | (i << (p - w)) | int(int_bits(c), 2)])
        for lengths in _odd_compositions(p, n):
            slots = [ints_with_code_length(k) for k in lengths]
            vals = np.array(list(itertools.product(*slots)), dtype=np.int64).reshape(-1, n)
            codes = np.zeros(vals.shape[0], dtype=np.int64)
            for j, k in enumerate(lengths):
                m = np.where(vals[:, j] >= 0, 2 * vals[:, j], -2 * vals[:, j] - 1) + 1
                codes = (codes << k) | m
            add(vals, (3 << p) | codes)
        for l1 in range(3, p - 2):
            l2 = p - l1
            if l1 in exact and l2 in exact:
                V1, C1 = exact[l1]
                V2, C2 = exact[l2]
                S = V1[:, None, :] + V2[None, :, :]
                C = (4 << p) | (C1[:, None] << l2) | C2[None, :]
                add(S, C)
        for k in range(1, p - 2, 2):
            l2 = p - k
            if l2 in exact:
                V2, C2 = exact[l2]
                for c in ints_with_code_length(k):
                    add(c * V2, (5 << p) | (int(int_bits(c), 2) << l2) | C2)
        if is_power_of_two(n) and p == w:
            add(walsh_system(n).rows, [(6 << p) | i for i in range(n)])
        if not vs:
            continue
        V = np.concatenate(vs)
        C = np.concatenate(cs)
        if np.abs(V).max(initial=0) >= INT_GUARD >> 8:
            raise ExactArithmeticError(f"level {L} produced entries beyond the guard")
        V, C = _dedupe_min_code(V, C)
        exact[L] = (V, C)
        fresh = np.array([_vec_key(v) not in seen for v in V], dtype=bool)
        Vn, Cn = V[fresh], C[fresh]
        order = np.argsort(Cn, kind="stable")
        Vn, Cn = Vn[order], Cn[order]
        seen.update(_vec_key(v) for v in Vn)
        out_v.append(Vn)
        out_c.append(Cn)
        out_l.append(np.full(Vn.shape[0], L, dtype=np.int64))
    return Codebook(
        n, lmax,
        np.concatenate(out_v) if out_v else np.zeros((0, n), dtype=np.int64),
        np.concatenate(out_l) if out_l else np.zeros(0, dtype=np.int64),
        np.concatenate(out_c) if out_c else np.zeros(0, dtype=np.int64),
    )


_CACHE: dict[int, Codebook] = {}
_CACHE_LOCK = threading.Lock()


def codebook(n: int, lmax: int) -> Codebook:
    """Codebook for length-n vectors up to ``lmax`` bits (memoised per n)."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 3 <= lmax <= MAX_BUDGET:
        raise ValueError(f"budget must be in 3..{MAX_BUDGET}, got {lmax}")
    with _CACHE_LOCK:
        book = _CACHE.get(n)
        if book is None or book.lmax < lmax:
            book = _build_codebook(n, lmax)
            _CACHE[n] = book
    return book.truncate(lmax)


def clear_cache() -> None:
    with _CACHE_LOCK:
        _CACHE.clear()


def kd(x, lmax: int) -> ComplexityResult:
    """Shortest-program length of ``x`` within ``lmax`` bits."""
    x = np.asarray(x, dtype=np.int64)
    return codebook(x.shape[0], lmax).kd(x)
