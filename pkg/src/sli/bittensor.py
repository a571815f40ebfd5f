"""Packed bit tensors and integer value tensors.

A BitTensor stores one bit per tuple of a shape's index space, packed
into 64-bit words: linear index L(i0..im-1) is row-major with the LAST
axis fastest, bit L lives in word L//64 at bit position L%64.  Bits past
the last valid index in the final word are always zero; every kernel
preserves that invariant.

The boolean connectives and popcount operate word-at-a-time on the packed
array (one pass, no per-bit loop).  Structural kernels (axis insertion,
permutation, reductions over unaligned axes) round-trip through numpy's
packbits/unpackbits, which are single C passes as well; reductions whose
trailing block is word-aligned stay on the packed words.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import (
    ArithmeticOverflow,
    BitBudgetOverflow,
    DuplicateVariable,
    IndexOutOfRange,
    InvalidPermutation,
    ShapeMismatch,
    UnknownVariable,
)
from .logic import Variable

DEFAULT_BIT_BUDGET = 2**33

_WORD = np.uint64
_FULL_WORD = np.uint64(0xFFFFFFFFFFFFFFFF)

# portable popcount fallback, one table lookup per byte
_POP8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)
_HAVE_BITWISE_COUNT = hasattr(np, "bitwise_count")


@dataclass(frozen=True)
class Shape:
    """Ordered named axes: ((variable, extent), ...).  Variables distinct."""

    axes: tuple[tuple[Variable, int], ...]

    def __post_init__(self):
        seen = set()
        for v, e in self.axes:
            if v in seen:
                raise DuplicateVariable(f"variable {v.name} appears twice in shape")
            seen.add(v)
            if e < 0:
                raise ShapeMismatch(f"negative extent for {v.name}")

    @property
    def vars(self) -> tuple[Variable, ...]:
        return tuple(v for v, _ in self.axes)

    @property
    def extents(self) -> tuple[int, ...]:
        return tuple(e for _, e in self.axes)

    @property
    def nbits(self) -> int:
        n = 1
        for _, e in self.axes:
            n *= e
        return n

    def axis_of(self, var: Variable) -> int:
        for i, (v, _) in enumerate(self.axes):
            if v == var:
                return i
        raise UnknownVariable(f"variable {var.name} not in shape")

    def drop(self, k: int) -> "Shape":
        return Shape(self.axes[:k] + self.axes[k + 1 :])

    def insert(self, k: int, var: Variable, extent: int) -> "Shape":
        return Shape(self.axes[:k] + ((var, extent),) + self.axes[k:])


def _check_budget(nbits: int, budget: int) -> None:
    if nbits > budget:
        raise BitBudgetOverflow(f"tensor of {nbits} bits exceeds budget of {budget}")


def _nwords(nbits: int) -> int:
    return (nbits + 63) // 64


def _last_mask(nbits: int) -> np.uint64:
    rem = nbits % 64
    if rem == 0:
        return _FULL_WORD
    return np.uint64((1 << rem) - 1)


def _pack(bools: np.ndarray, nbits: int) -> np.ndarray:
    packed = np.packbits(bools, bitorder="little")
    out = np.zeros(_nwords(nbits) * 8, dtype=np.uint8)
    out[: packed.size] = packed
    words = out.view(_WORD)
    words.flags.writeable = False
    return words


def _unpack(words: np.ndarray, nbits: int) -> np.ndarray:
    return np.unpackbits(words.view(np.uint8), count=nbits, bitorder="little").astype(bool)


class BitTensor:
    """Immutable packed bit tensor over a Shape."""

    __slots__ = ("shape", "words")

    def __init__(self, shape: Shape, words: np.ndarray):
        if words.dtype != _WORD or words.ndim != 1 or words.size != _nwords(shape.nbits):
            raise ShapeMismatch("word array does not match shape")
        if not words.flags.writeable:
            self.words = words
        else:
            w = words.copy()
            w.flags.writeable = False
            self.words = w
        self.shape = shape

    # -- constructors ------------------------------------------------------

    @staticmethod
    def empty(shape: Shape, budget: int = DEFAULT_BIT_BUDGET) -> "BitTensor":
        _check_budget(shape.nbits, budget)
        return BitTensor(shape, np.zeros(_nwords(shape.nbits), dtype=_WORD))

    @staticmethod
    def full(shape: Shape, budget: int = DEFAULT_BIT_BUDGET) -> "BitTensor":
        _check_budget(shape.nbits, budget)
        nbits = shape.nbits
        words = np.full(_nwords(nbits), _FULL_WORD, dtype=_WORD)
        if nbits and words.size:
            words[-1] &= _last_mask(nbits)
        return BitTensor(shape, words)

    @staticmethod
    def from_bools(shape: Shape, bools: np.ndarray, budget: int = DEFAULT_BIT_BUDGET) -> "BitTensor":
        _check_budget(shape.nbits, budget)
        flat = np.asarray(bools, dtype=bool).ravel()
        if flat.size != shape.nbits:
            raise ShapeMismatch("boolean data does not match shape")
        return BitTensor(shape, _pack(flat, shape.nbits))

    @staticmethod
    def from_ones(
        shape: Shape, ones: Iterable[tuple[int, ...]], budget: int = DEFAULT_BIT_BUDGET
    ) -> "BitTensor":
        _check_budget(shape.nbits, budget)
        flat = np.zeros(shape.nbits, dtype=bool)
        extents = shape.extents
        tuples = list(ones)
        if tuples:
            idx = np.array(tuples, dtype=np.int64).reshape(len(tuples), len(extents))
            flat[np.ravel_multi_index(tuple(idx.T), extents)] = True
        return BitTensor(shape, _pack(flat, shape.nbits))

    # -- word-level connectives --------------------------------------------

    def bit_and(self, other: "BitTensor") -> "BitTensor":
        if self.shape != other.shape:
            raise ShapeMismatch("bit_and over different shapes")
        return BitTensor(self.shape, np.bitwise_and(self.words, other.words))

    def bit_or(self, other: "BitTensor") -> "BitTensor":
        if self.shape != other.shape:
            raise ShapeMismatch("bit_or over different shapes")
        return BitTensor(self.shape, np.bitwise_or(self.words, other.words))

    def bit_not(self) -> "BitTensor":
        words = np.bitwise_not(self.words)
        nbits = self.shape.nbits
        if nbits and words.size:
            words[-1] &= _last_mask(nbits)
        return BitTensor(self.shape, words)

    __and__ = bit_and
    __or__ = bit_or
    __invert__ = bit_not

    def popcount(self) -> int:
        if _HAVE_BITWISE_COUNT:
            return int(np.bitwise_count(self.words).sum())
        return int(_POP8[self.words.view(np.uint8)].sum(dtype=np.int64))

    def any(self) -> bool:
        return bool(self.words.any())

    # -- structural kernels --------------------------------------------------

    def to_bools(self) -> np.ndarray:
        return _unpack(self.words, self.shape.nbits)

    def insert_axis(
        self, pos: int, var: Variable, extent: int, budget: int = DEFAULT_BIT_BUDGET
    ) -> "BitTensor":
        """Replicate along a new axis at position pos (Cartesian product)."""
        shape = self.shape.insert(pos, var, extent)
        _check_budget(shape.nbits, budget)
        nbits = self.shape.nbits
        if pos == 0 and nbits % 64 == 0 and nbits:
            return BitTensor(shape, np.tile(self.words, extent))
        inner = 1
        for _, e in self.shape.axes[pos:]:
            inner *= e
        bools = self.to_bools()
        if inner:
            out = np.repeat(bools.reshape(-1, inner), extent, axis=0).ravel()
        else:
            out = np.zeros(0, dtype=bool)
        return BitTensor(shape, _pack(out, shape.nbits))

    def permute_axes(self, perm: tuple[int, ...]) -> "BitTensor":
        m = len(self.shape.axes)
        if sorted(perm) != list(range(m)):
            raise InvalidPermutation(f"{perm} is not a permutation of 0..{m - 1}")
        shape = Shape(tuple(self.shape.axes[p] for p in perm))
        if perm == tuple(range(m)):
            return self
        bools = self.to_bools().reshape(self.shape.extents)
        out = np.ascontiguousarray(bools.transpose(perm)).ravel()
        return BitTensor(shape, _pack(out, shape.nbits))

    def _reduce(self, var: Variable, conj: bool) -> "BitTensor":
        k = self.shape.axis_of(var)
        extents = self.shape.extents
        shape = self.shape.drop(k)
        e = extents[k]
        if e == 0:
            # vacuous: every remaining tuple quantifies over nothing
            return BitTensor.full(shape) if conj else BitTensor.empty(shape)
        if len(extents) == 1:
            value = self.popcount() == e if conj else self.any()
            scalar = BitTensor.full(shape) if value else BitTensor.empty(shape)
            return scalar
        inner = 1
        for x in extents[k + 1 :]:
            inner *= x
        if inner and inner % 64 == 0:
            groups = self.words.reshape(-1, e, inner // 64)
            op = np.bitwise_and if conj else np.bitwise_or
            return BitTensor(shape, op.reduce(groups, axis=1).ravel())
        arr = self.to_bools().reshape(extents)
        out = arr.all(axis=k) if conj else arr.any(axis=k)
        return BitTensor(shape, _pack(out.ravel(), shape.nbits))

    def reduce_all(self, var: Variable) -> "BitTensor":
        return self._reduce(var, conj=True)

    def reduce_any(self, var: Variable) -> "BitTensor":
        return self._reduce(var, conj=False)

    def iter_ones(self) -> Iterator[tuple[int, ...]]:
        """Index tuples whose bit is 1, in lexicographic order."""
        nbits = self.shape.nbits
        if not nbits:
            return
        if not self.shape.axes:
            if self.words[0] & np.uint64(1):
                yield ()
            return
        flat = np.flatnonzero(self.to_bools())
        if flat.size == 0:
            return
        coords = np.unravel_index(flat, self.shape.extents)
        for row in zip(*(c.tolist() for c in coords)):
            yield row

    def get(self, idx: tuple[int, ...]) -> bool:
        if len(idx) != len(self.shape.axes):
            raise ShapeMismatch("index arity does not match shape")
        extents = self.shape.extents
        linear = 0
        for i, e in zip(idx, extents):
            if not 0 <= i < e:
                raise IndexOutOfRange(f"index {idx} outside extents {extents}")
            linear = linear * e + i
        return bool((self.words[linear // 64] >> np.uint64(linear % 64)) & np.uint64(1))

    def dump(self) -> str:
        """Textual form: a shape header, then one 0/1 row per last-axis run."""
        if not self.shape.axes:
            header = "()"
            rows = ["1" if self.get(()) else "0"]
        else:
            header = " ".join(f"{v.name}:{e}" for v, e in self.shape.axes)
            bools = self.to_bools()
            last = self.shape.extents[-1]
            if last == 0 or bools.size == 0:
                rows = []
            else:
                grid = bools.reshape(-1, last)
                rows = ["".join("1" if b else "0" for b in row) for row in grid]
        return "\n".join([header] + rows)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitTensor)
            and self.shape == other.shape
            and np.array_equal(self.words, other.words)
        )

    def __hash__(self):
        return hash((self.shape, self.words.tobytes()))

    def __repr__(self) -> str:
        names = ",".join(f"{v.name}:{e}" for v, e in self.shape.axes)
        return f"BitTensor({names}; {self.popcount()}/{self.shape.nbits} ones)"


class ValueTensor:
    """Immutable int64 tensor over a Shape; used for term evaluation."""

    __slots__ = ("shape", "values")

    def __init__(self, shape: Shape, values: np.ndarray):
        values = np.asarray(values, dtype=np.int64).ravel()
        if values.size != shape.nbits:
            raise ShapeMismatch("value data does not match shape")
        if values.flags.writeable:
            values = values.copy()
            values.flags.writeable = False
        self.shape = shape
        self.values = values

    @staticmethod
    def constant(shape: Shape, value: int) -> "ValueTensor":
        return ValueTensor(shape, np.full(shape.nbits, value, dtype=np.int64))

    @staticmethod
    def axis_values(shape: Shape, var: Variable, base: np.ndarray) -> "ValueTensor":
        """Tensor whose entry at index tuple i is base[i_k] for var's axis k."""
        k = shape.axis_of(var)
        extents = shape.extents
        if base.size != extents[k]:
            raise ShapeMismatch("axis value table does not match extent")
        view = [1] * len(extents)
        view[k] = extents[k]
        arr = np.broadcast_to(base.reshape(view), extents)
        return ValueTensor(shape, np.ascontiguousarray(arr).ravel())

    def val_map2(self, op: str, other: "ValueTensor") -> "ValueTensor":
        if self.shape != other.shape:
            raise ShapeMismatch("val_map2 over different shapes")
        a, b = self.values, other.values
        with np.errstate(over="ignore"):
            if op == "+":
                r = a + b
                bad = ((b > 0) & (r < a)) | ((b < 0) & (r > a))
            elif op == "-":
                r = a - b
                bad = ((b < 0) & (r < a)) | ((b > 0) & (r > a))
            elif op == "*":
                r = a * b
                nz = b != 0
                bad = np.zeros(r.shape, dtype=bool)
                bad[nz] = r[nz] // b[nz] != a[nz]
            else:
                raise ValueError(f"unknown arithmetic op: {op}")
        if bad.any():
            raise ArithmeticOverflow(f"64-bit overflow in {op}")
        return ValueTensor(self.shape, r)

    def val_compare(self, op: str, other: "ValueTensor") -> BitTensor:
        if self.shape != other.shape:
            raise ShapeMismatch("val_compare over different shapes")
        a, b = self.values, other.values
        if op == "=":
            r = a == b
        elif op == "~=":
            r = a != b
        elif op == "<":
            r = a < b
        elif op == "=<":
            r = a <= b
        elif op == ">":
            r = a > b
        elif op == ">=":
            r = a >= b
        else:
            raise ValueError(f"unknown comparison op: {op}")
        return BitTensor(self.shape, _pack(r, self.shape.nbits))

    def gather(self, table: np.ndarray) -> "ValueTensor":
        """Look self's entries up in a 1-D table (bounds checked)."""
        table = np.asarray(table, dtype=np.int64)
        idx = self.values
        if idx.size and (idx.min() < 0 or idx.max() >= table.size):
            raise IndexOutOfRange("gather index outside table")
        return ValueTensor(self.shape, table[idx])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ValueTensor)
            and self.shape == other.shape
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.shape, self.values.tobytes()))
