"""Two-universal and strongly two-universal hash families over bit-strings,
plus non-degenerate linear functions and their composition law.

Families are full random-matrix classes: the linear family contains every
l x n GF(2) matrix, the affine family additionally every offset. Keeping the
families complete makes two-universality a counting identity and lets small
instances be averaged exhaustively. Members are packed into machine words;
evaluation is XOR-and-parity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bits import parity, parity_u64
from .errors import CapacityError, InputError

ENUM_CAP = 1 << 20


@dataclass(frozen=True)
class HashMember:
    """One function of a family: l rows of n bits each, optional offset."""

    rows: tuple        # l ints, each an n-bit row mask
    offset: int | None  # l-bit int for affine members, None for linear

    def to_hex(self) -> str:
        body = ",".join(format(r, "x") for r in self.rows)
        if self.offset is None:
            return body
        return body + "+" + format(self.offset, "x")

    @staticmethod
    def from_hex(text: str) -> "HashMember":
        if "+" in text:
            body, off = text.split("+")
            offset = int(off, 16)
        else:
            body, offset = text, None
        return HashMember(tuple(int(r, 16) for r in body.split(",")), offset)


class HashFamily:
    """GF(2) hash family from n bits to l bits.

    kind="linear": all l x n matrices (two-universal).
    kind="affine": all matrices plus all offsets (strongly two-universal).
    """

    def __init__(self, n: int, ell: int, kind: str = "linear"):
        if n < 1 or ell < 1:
            raise InputError("need n >= 1 and ell >= 1")
        if kind not in ("linear", "affine"):
            raise InputError(f"unknown family kind {kind!r}")
        self.n = n
        self.ell = ell
        self.kind = kind

    @property
    def size(self) -> int:
        count = 1 << (self.n * self.ell)
        if self.kind == "affine":
            count <<= self.ell
        return count

    def eval(self, member: HashMember, x: int) -> int:
        """Evaluate on a packed n-bit input; returns a packed l-bit output."""
        if x >> self.n:
            raise InputError("input longer than the family domain")
        out = 0
        for r in member.rows:
            out = (out << 1) | parity(r & x)
        if member.offset is not None:
            out ^= member.offset
        return out

    def member(self, index: int) -> HashMember:
        """Stable indexing of the full family."""
        if index < 0 or index >= self.size:
            raise InputError("member index out of range")
        offset = None
        if self.kind == "affine":
            offset = index & ((1 << self.ell) - 1)
            index >>= self.ell
        rows = []
        mask = (1 << self.n) - 1
        for _ in range(self.ell):
            rows.append(index & mask)
            index >>= self.n
        return HashMember(tuple(rows), offset)

    def sample(self, rng) -> HashMember:
        if self.size <= 1 << 62:
            return self.member(int(rng.integers(self.size)))
        # row-wise sampling for families too large to index
        rows = []
        for _ in range(self.ell):
            bits = rng.integers(0, 2, self.n)
            rows.append(sum(int(b) << (self.n - 1 - i)
                            for i, b in enumerate(bits)))
        offset = None
        if self.kind == "affine":
            obits = rng.integers(0, 2, self.ell)
            offset = sum(int(b) << (self.ell - 1 - i)
                         for i, b in enumerate(obits))
        return HashMember(tuple(rows), offset)

    def members(self):
        if self.size > ENUM_CAP:
            raise CapacityError(
                f"family of size {self.size} exceeds the enumeration cap")
        return (self.member(i) for i in range(self.size))

    def eval_table(self) -> np.ndarray:
        """Outputs of every member on every input, shape (size, 2^n).

        Exploits the product structure: the table for row-vector a on all x
        is a parity table, and rows/offsets are independent coordinates of
        the member index.
        """
        if self.size > ENUM_CAP or (self.size << self.n) > (ENUM_CAP << 6):
            raise CapacityError("eval table too large")
        xs = np.arange(1 << self.n, dtype=np.uint64)
        row_vals = np.arange(1 << self.n, dtype=np.uint64)
        par = parity_u64(row_vals[:, None] & xs[None, :]).astype(np.uint32)
        # member() packs row j into index bits [j*n, (j+1)*n) and eval()
        # emits row j at output bit ell-1-j; build coordinates high-row
        # first so the index packing comes out right.
        table = np.zeros((1, 1 << self.n), dtype=np.uint32)
        for k in range(self.ell):
            table = table[:, None, :] | (par[None, :, :] << np.uint32(k))
            table = table.reshape(-1, 1 << self.n)
        if self.kind == "affine":
            offsets = np.arange(1 << self.ell, dtype=np.uint32)
            table = table[:, None, :] ^ offsets[None, :, None]
            table = table.reshape(-1, 1 << self.n)
        return table

    def is_two_universal(self) -> bool:
        """Exhaustive collision check Pr[F(x)=F(y)] <= 2^-l for all x != y."""
        table = self.eval_table()
        npts = 1 << self.n
        thresh = self.size / (1 << self.ell)
        for x in range(npts):
            coll = (table[:, x + 1:] == table[:, x:x + 1]).sum(axis=0)
            if (coll > thresh).any():
                return False
        return True

    def is_strongly_two_universal(self) -> bool:
        """Exhaustive pair-histogram check: (F(x), F(y)) uniform over
        2^{2l} values for all x != y.

        The affine family factors exactly: with F = (M, b), the pair
        (Mx+b, My+b) is uniform iff b is (it is, by enumeration) and
        M(x+y) is uniform over all matrices, so it suffices to histogram
        every linear-table column at every nonzero difference. For the
        histogram over the full member set see
        `pair_histogram`, used by the tests to cross-check this path at
        small sizes.
        """
        if self.kind == "affine":
            linear = HashFamily(self.n, self.ell, "linear")
            table = linear.eval_table()
            want = linear.size / (1 << self.ell)
            for z in range(1, 1 << self.n):
                counts = np.bincount(table[:, z], minlength=1 << self.ell)
                if (counts != want).any():
                    return False
            return True
        return _pair_histogram_uniform(self.eval_table(), self.n, self.ell,
                                       self.size)

    def pair_histogram(self, x: int, y: int) -> np.ndarray:
        """Joint histogram of (F(x), F(y)) over the whole family."""
        table = self.eval_table()
        pair = (table[:, x].astype(np.int64) << self.ell) | table[:, y]
        return np.bincount(pair, minlength=1 << (2 * self.ell))


def _pair_histogram_uniform(table: np.ndarray, n: int, ell: int,
                            size: int) -> bool:
    npts = 1 << n
    want = size / (1 << (2 * ell))
    for x in range(npts):
        for y in range(x + 1, npts):
            pair = (table[:, x].astype(np.int64) << ell) | table[:, y]
            counts = np.bincount(pair, minlength=1 << (2 * ell))
            if (counts != want).any():
                return False
    return True


def pad_substring(x: str, index_set) -> str:
    """x restricted to the (0-based, sorted) index set, zero-padded back to
    the original length."""
    idx = sorted(set(index_set))
    if any(i < 0 or i >= len(x) for i in idx):
        raise InputError("index outside the string")
    kept = "".join(x[i] for i in idx)
    return kept + "0" * (len(x) - len(kept))


# ---------------------------------------------------------------------------
# Non-degenerate linear functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NDLF:
    """beta(s0, s1) = <a0, s0> xor <a1, s1> with both masks nonzero."""

    a0: int
    a1: int
    ell: int

    def __post_init__(self):
        if self.a0 == 0 or self.a1 == 0:
            raise InputError("NDLF masks must be nonzero")
        if self.a0 >> self.ell or self.a1 >> self.ell:
            raise InputError("mask wider than ell bits")

    def __call__(self, s0: int, s1: int) -> int:
        return parity(self.a0 & s0) ^ parity(self.a1 & s1)

    def table(self) -> np.ndarray:
        s = np.arange(1 << self.ell, dtype=np.uint64)
        p0 = parity_u64(np.uint64(self.a0) & s)
        p1 = parity_u64(np.uint64(self.a1) & s)
        return p0[:, None] ^ p1[None, :]


def enumerate_ndlf(ell: int):
    """All (2^l - 1)^2 non-degenerate linear functions on l-bit pairs."""
    if ell < 1:
        raise InputError("ell must be positive")
    if ell > 16:
        raise CapacityError("NDLF enumeration capped at ell <= 16")
    for a0 in range(1, 1 << ell):
        for a1 in range(1, 1 << ell):
            yield NDLF(a0, a1, ell)


def is_two_balanced(table: np.ndarray) -> bool:
    """A binary function on l-bit pairs is 2-balanced when every row and
    every column of its table is balanced."""
    t = np.asarray(table)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise InputError("expected a square 2^l x 2^l function table")
    size = t.shape[0]
    if size & (size - 1):
        raise InputError("table side must be a power of two")
    half = size // 2
    return bool((t.sum(axis=0) == half).all()
                and (t.sum(axis=1) == half).all())


class ComposedFamily:
    """One-bit family h(x0, x1) = beta(f0(x0), f1(x1)) from two strongly
    two-universal factor families and a 2-balanced combiner."""

    def __init__(self, beta, fam0: HashFamily, fam1: HashFamily):
        if fam0.kind != "affine" or fam1.kind != "affine":
            # the identity-only linear counterexample shows plain
            # two-universality is not enough
            raise InputError("composition needs strongly two-universal "
                             "(affine) factor families")
        if fam0.ell != fam1.ell:
            raise InputError("factor families must share the output length")
        tab = beta.table() if isinstance(beta, NDLF) else np.asarray(beta)
        if not is_two_balanced(tab):
            raise InputError("combiner is not 2-balanced")
        self.beta_table = tab
        self.fam0 = fam0
        self.fam1 = fam1
        self.n = fam0.n + fam1.n
        self.ell = 1

    @property
    def size(self) -> int:
        return self.fam0.size * self.fam1.size

    def member(self, index: int):
        i0, i1 = divmod(index, self.fam1.size)
        return self.fam0.member(i0), self.fam1.member(i1)

    def eval(self, member, x0: int, x1: int) -> int:
        m0, m1 = member
        return int(self.beta_table[self.fam0.eval(m0, x0),
                                   self.fam1.eval(m1, x1)])

    def eval_table(self) -> np.ndarray:
        t0 = self.fam0.eval_table()
        t1 = self.fam1.eval_table()
        out = self.beta_table[t0[:, None, :, None], t1[None, :, None, :]]
        return out.reshape(self.size, 1 << self.n).astype(np.uint32)

    def is_strongly_two_universal(self) -> bool:
        return _pair_histogram_uniform(self.eval_table(), self.n, self.ell,
                                       self.size)


def compose_balanced(beta, fam0: HashFamily, fam1: HashFamily,
                     verify: bool = False) -> ComposedFamily:
    """Build the composed family; optionally verify strong two-universality
    exhaustively (small parameters only)."""
    fam = ComposedFamily(beta, fam0, fam1)
    if verify and not fam.is_strongly_two_universal():
        raise InputError("composed family failed the exhaustive "
                         "two-universality histogram")
    return fam


def gf2_matvec_stream(seed: int, ell: int, x_bits: np.ndarray) -> np.ndarray:
    """Apply a seeded random l x m GF(2) matrix to a long bit vector without
    materializing the matrix; rows are drawn as packed 64-bit words."""
    m = len(x_bits)
    words = (m + 63) // 64
    padded = np.zeros(words * 64, dtype=np.uint8)
    padded[:m] = x_bits
    x_packed = np.zeros(words, dtype=np.uint64)
    for w in range(words):
        chunk = padded[w * 64:(w + 1) * 64]
        val = 0
        for b in chunk:
            val = (val << 1) | int(b)
        x_packed[w] = val
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, 1 << 63, size=(ell, words), dtype=np.uint64)
    rows = (rows << np.uint64(1)) | rng.integers(
        0, 2, size=(ell, words), dtype=np.uint64)
    return parity_u64(rows & x_packed[None, :]).sum(axis=1).astype(np.uint8) & 1
