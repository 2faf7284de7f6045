"""Binary codes, weight vectors and coordinate restriction.

A code is a set of distinct 0/1 words over ``m`` coordinates.  Words are held
as rows of a boolean matrix; coordinate ``j`` of a word is column ``j``.  In
the bit-string form used for I/O the leftmost character is coordinate 0.

Two pieces of metadata ride along with every code:

* ``coords`` -- the label of each column in some ancestor code, so that
  restrictions can be mapped back onto the original coordinates;
* ``mult`` -- a positive copy count per column.  A column with ``mult = k``
  stands for ``k`` identical unweighted coordinates.  Plain codes have all
  counts equal to one; the bounded-weight reduction uses larger counts to
  represent duplicated coordinates without materialising them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np

REL_TOL = 1e-12


class ChainsparseError(Exception):
    """Base class for library errors."""


class CodeInputError(ChainsparseError, ValueError):
    """Malformed input: bad coordinates, lengths or parameters."""


class InexactError(ChainsparseError):
    """An exact search ran out of node budget."""

    def __init__(self, message: str, lower: int):
        super().__init__(message)
        self.lower = lower


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _unique_rows(matrix: np.ndarray) -> np.ndarray:
    n, m = matrix.shape
    if n <= 1:
        return matrix
    if m == 0:
        return matrix[:1]
    # big-endian packing makes byte order agree with bit-string order
    packed = np.packbits(matrix, axis=1)
    uniq = np.unique(packed, axis=0)
    return np.unpackbits(uniq, axis=1, count=m).astype(bool)


def word_to_int(row: np.ndarray) -> int:
    return int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little")


def int_to_row(x: int, m: int) -> np.ndarray:
    nbytes = (m + 7) // 8
    raw = np.frombuffer(x.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little", count=m).astype(bool)


def parse_word(word, m: int | None = None) -> np.ndarray:
    """Accept a bit string, a 0/1 sequence or an array and return a bool row."""
    if isinstance(word, str):
        if any(ch not in "01" for ch in word):
            raise CodeInputError(f"not a bit string: {word!r}")
        row = np.frombuffer(word.encode(), dtype=np.uint8) == ord("1")
    else:
        row = np.asarray(word).astype(bool).ravel()
    if m is not None and row.shape[0] != m:
        raise CodeInputError(f"word has length {row.shape[0]}, expected {m}")
    return row


def row_to_str(row: np.ndarray) -> str:
    return (np.asarray(row, dtype=np.uint8) + ord("0")).tobytes().decode("ascii")


class Code:
    """A deduplicated set of binary words over ``m`` coordinates.

    Instances are immutable.  Rows are kept in ascending bit-string order so
    iteration and word indices are deterministic.
    """

    __slots__ = ("_matrix", "_coords", "_mult", "_cache")

    def __init__(self, matrix, coords=None, mult=None):
        arr = np.asarray(matrix, dtype=bool)
        if arr.ndim != 2:
            raise CodeInputError("code matrix must be two-dimensional")
        m = arr.shape[1]
        self._matrix = _frozen(np.ascontiguousarray(_unique_rows(arr)))
        if coords is None:
            coords = np.arange(m, dtype=np.int64)
        coords = np.asarray(coords, dtype=np.int64)
        if coords.shape != (m,):
            raise CodeInputError("coords must have one label per coordinate")
        if mult is None:
            mult = np.ones(m, dtype=np.int64)
        mult = np.asarray(mult, dtype=np.int64)
        if mult.shape != (m,) or (m and mult.min() < 1):
            raise CodeInputError("mult must hold a positive count per coordinate")
        self._coords = _frozen(coords.copy())
        self._mult = _frozen(mult.copy())
        self._cache = {}

    # construction helpers
    @classmethod
    def from_strings(cls, words: Iterable[str], m: int | None = None) -> "Code":
        words = list(words)
        if m is None:
            if not words:
                raise CodeInputError("cannot infer m from an empty word list")
            m = len(words[0])
        rows = [parse_word(w, m) for w in words]
        return cls(np.array(rows, dtype=bool).reshape(len(rows), m))

    @classmethod
    def from_ints(cls, m: int, words: Iterable[int]) -> "Code":
        rows = [int_to_row(int(w), m) for w in words]
        return cls(np.array(rows, dtype=bool).reshape(len(rows), m))

    @classmethod
    def identity(cls, n: int) -> "Code":
        return cls(np.eye(n, dtype=bool))

    # basic accessors
    @property
    def m(self) -> int:
        return self._matrix.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    @property
    def mult(self) -> np.ndarray:
        return self._mult

    @property
    def expanded_m(self) -> int:
        """Number of coordinates once every column is expanded into its copies."""
        return int(self._mult.sum())

    @property
    def is_plain(self) -> bool:
        return bool(np.all(self._mult == 1))

    def __len__(self) -> int:
        return self._matrix.shape[0]

    def __iter__(self):
        return iter(self.as_strings())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Code):
            return NotImplemented
        return (
            self.m == other.m
            and np.array_equal(self._matrix, other._matrix)
            and np.array_equal(self._mult, other._mult)
        )

    def __hash__(self):
        return hash((self.m, self._matrix.tobytes(), self._mult.tobytes()))

    def __repr__(self) -> str:
        shown = self.as_strings()[:6]
        more = "" if len(self) <= 6 else f", ... ({len(self)} words)"
        return f"Code(m={self.m}, words={shown}{more})"

    def as_strings(self) -> list[str]:
        if "strings" not in self._cache:
            self._cache["strings"] = [row_to_str(r) for r in self._matrix]
        return self._cache["strings"]

    @property
    def words(self) -> tuple[int, ...]:
        """Words as Python ints; bit ``j`` is coordinate ``j``."""
        if "ints" not in self._cache:
            self._cache["ints"] = tuple(word_to_int(r) for r in self._matrix)
        return self._cache["ints"]

    def weights(self) -> np.ndarray:
        """Per-word weight counted with multiplicity."""
        if "weights" not in self._cache:
            self._cache["weights"] = _frozen(self._matrix.astype(np.int64) @ self._mult)
        return self._cache["weights"]

    def support_mask(self) -> np.ndarray:
        if "supp" not in self._cache:
            self._cache["supp"] = _frozen(self._matrix.any(axis=0))
        return self._cache["supp"]

    def nonzero_mask(self) -> np.ndarray:
        return self._matrix.any(axis=1)

    def index_of(self, word) -> int:
        row = parse_word(word, self.m)
        hits = np.flatnonzero((self._matrix == row).all(axis=1))
        if hits.size == 0:
            raise CodeInputError("word is not in the code")
        return int(hits[0])

    def subcode(self, word_indices: Iterable[int]) -> "Code":
        idx = sorted(set(int(i) for i in word_indices))
        return Code(self._matrix[idx], self._coords, self._mult)

    def with_word(self, word) -> "Code":
        row = parse_word(word, self.m)
        return Code(np.vstack([self._matrix, row[None, :]]), self._coords, self._mult)

    def with_mult(self, mult) -> "Code":
        return Code(self._matrix, self._coords, mult)

    def column_classes(self) -> "ColumnClasses":
        """Group the nonzero columns by which words hit them."""
        if "cols" not in self._cache:
            self._cache["cols"] = _column_classes(self)
        return self._cache["cols"]


@dataclass(frozen=True)
class ColumnClasses:
    """Distinct nonzero columns of a code.

    ``masks[k]`` is the set of word indices hitting class ``k`` (as an int
    bitmask), ``members[k]`` the coordinates in the class (ascending) and
    ``sizes[k]`` their total multiplicity.  Classes are ordered by their
    smallest coordinate.
    """

    masks: tuple[int, ...]
    members: tuple[np.ndarray, ...]
    sizes: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.masks)

    def first_coord(self, k: int) -> int:
        return int(self.members[k][0])


def _column_classes(code: Code) -> ColumnClasses:
    n, m = code.matrix.shape
    if n == 0 or m == 0:
        return ColumnClasses((), (), ())
    packed = np.packbits(code.matrix, axis=0, bitorder="little")
    cols = np.ascontiguousarray(packed.T)
    width = cols.shape[1]
    keys = cols.view(np.dtype((np.void, width))).ravel()
    uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(first, kind="stable")
    masks, members, sizes = [], [], []
    mult = code.mult
    groups = np.argsort(inverse, kind="stable")
    bounds = np.searchsorted(inverse[groups], np.arange(len(uniq) + 1))
    for u in order:
        mask = int.from_bytes(bytes(uniq[u]), "little")
        if mask == 0:
            continue
        mem = groups[bounds[u]:bounds[u + 1]]
        masks.append(mask)
        members.append(_frozen(np.sort(mem)))
        sizes.append(int(mult[mem].sum()))
    return ColumnClasses(tuple(masks), tuple(members), tuple(sizes))


class WeightVector:
    """Nonnegative weights on the coordinates of a code."""

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.asarray(values, dtype=np.float64).ravel()
        if arr.size and (not np.all(np.isfinite(arr)) or arr.min() < 0):
            raise CodeInputError("weights must be finite and nonnegative")
        self._values = _frozen(arr.copy())

    @classmethod
    def ones(cls, m: int) -> "WeightVector":
        return cls(np.ones(m))

    @property
    def m(self) -> int:
        return self._values.shape[0]

    @property
    def values(self) -> np.ndarray:
        return self._values

    def support(self) -> np.ndarray:
        return np.flatnonzero(self._values != 0)

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self._values))

    def __getitem__(self, i):
        return self._values[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightVector):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    def __repr__(self) -> str:
        return f"WeightVector(m={self.m}, support={self.support_size})"


def as_weights(w, m: int) -> np.ndarray:
    arr = w.values if isinstance(w, WeightVector) else np.asarray(w, dtype=np.float64).ravel()
    if arr.shape[0] != m:
        raise CodeInputError(f"weight vector has length {arr.shape[0]}, expected {m}")
    return arr


def restrict(code: Code, keep: Iterable[int]) -> Code:
    """Project every word onto ``keep`` and merge the duplicates this creates.

    ``keep`` is a set of coordinate indices of ``code``; the result lists them
    in ascending order and carries their labels and multiplicities along.
    """
    if isinstance(keep, np.ndarray) and keep.dtype == bool:
        if keep.shape != (code.m,):
            raise CodeInputError("boolean keep-mask has the wrong length")
        idx = np.flatnonzero(keep)
    else:
        idx = np.unique(np.asarray(list(keep) if not isinstance(keep, np.ndarray) else keep,
                                   dtype=np.int64))
        if idx.size and (idx[0] < 0 or idx[-1] >= code.m):
            raise CodeInputError(f"coordinate out of range for m={code.m}")
    return Code(code.matrix[:, idx], code.coords[idx], code.mult[idx])


def complement(code: Code, coords: Iterable[int]) -> np.ndarray:
    keep = np.ones(code.m, dtype=bool)
    keep[np.asarray(list(coords), dtype=np.int64)] = False
    return keep


def support(code: Code) -> frozenset[int]:
    """Coordinates hit by at least one word."""
    return frozenset(int(i) for i in np.flatnonzero(code.support_mask()))


def weighted_value(word, w) -> float:
    """Inner product of a word's indicator with a weight vector."""
    wv = w.values if isinstance(w, WeightVector) else np.asarray(w, dtype=np.float64).ravel()
    row = parse_word(word)
    if row.shape[0] != wv.shape[0]:
        raise CodeInputError(f"word length {row.shape[0]} does not match weights {wv.shape[0]}")
    return float(wv[row].sum())


def within(value: float, target: float, eps: float) -> bool:
    """``value`` lies in ``(1 +- eps) * target`` up to the rounding floor."""
    slack = REL_TOL * max(1.0, abs(target))
    return abs(value - target) <= eps * target + slack


# JSON I/O

def code_to_json(code: Code) -> dict:
    out = {"m": code.m, "words": code.as_strings()}
    if not code.is_plain:
        out["multiplicity"] = code.mult.tolist()
    if not np.array_equal(code.coords, np.arange(code.m)):
        out["coords"] = code.coords.tolist()
    return out


def code_from_json(data: dict) -> Code:
    try:
        m = int(data["m"])
        words = list(data["words"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CodeInputError(f"bad code JSON: {exc}") from None
    if m < 0:
        raise CodeInputError("m must be nonnegative")
    rows = np.array([parse_word(w, m) for w in words], dtype=bool).reshape(len(words), m)
    return Code(rows, data.get("coords"), data.get("multiplicity"))


def weights_to_json(w: WeightVector) -> dict:
    return {"m": w.m, "weights": w.values.tolist()}


def weights_from_json(data: dict) -> WeightVector:
    try:
        m = int(data["m"])
        vals = [float(x) for x in data["weights"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise CodeInputError(f"bad weights JSON: {exc}") from None
    if len(vals) != m:
        raise CodeInputError("weights length does not match m")
    return WeightVector(vals)


def load_code(path) -> Code:
    with open(path) as fh:
        return code_from_json(json.load(fh))


def load_weights(path) -> WeightVector:
    with open(path) as fh:
        return weights_from_json(json.load(fh))


def seeded_rng(seed, *path: int) -> np.random.Generator:
    """Generator for the named substream ``path`` of ``seed``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path)))
