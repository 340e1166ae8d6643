"""Exact sparse linear algebra over the rationals, chain complexes and their cohomology.

Scalars are :class:`fractions.Fraction`.  Matrices are stored row-wise as
``{row: {col: value}}`` with no explicit zeros.  Elimination runs a
fraction-free integer forward pass (pivot = first column, then smallest row
index) followed by an exact back substitution, so bases come out in reduced
echelon form and are reproducible bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

Vector = Dict[int, Fraction]


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return parse_scalar(x)
    return Fraction(x)


def parse_scalar(text: str) -> Fraction:
    """Parse ``"p"`` or ``"p/q"`` (integers only, no decimals)."""
    t = text.strip()
    num, sep, den = t.partition("/")
    try:
        n = int(num)
        d = int(den) if sep else 1
    except ValueError:
        raise ValueError(f"bad scalar {text!r}") from None
    if d == 0:
        raise ValueError(f"zero denominator in scalar {text!r}")
    return Fraction(n, d)


def format_scalar(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class SparseMatrix:
    """Immutable exact sparse matrix."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, data: Optional[Mapping[int, Mapping[int, object]]] = None):
        self.rows = rows
        self.cols = cols
        clean: Dict[int, Dict[int, Fraction]] = {}
        if data:
            for i, row in data.items():
                if not 0 <= i < rows:
                    raise IndexError(f"row {i} out of range for {rows}x{cols}")
                r = {}
                for j, v in row.items():
                    if not 0 <= j < cols:
                        raise IndexError(f"col {j} out of range for {rows}x{cols}")
                    v = as_fraction(v)
                    if v:
                        r[j] = v
                if r:
                    clean[i] = r
        self._data = clean

    # -- constructors -------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int) -> "SparseMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, {i: {i: 1} for i in range(n)})

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[object]], cols: Optional[int] = None) -> "SparseMatrix":
        rows = len(dense)
        if cols is None:
            cols = len(dense[0]) if rows else 0
        return cls(rows, cols, {i: {j: v for j, v in enumerate(r) if v} for i, r in enumerate(dense)})

    @classmethod
    def from_triplets(cls, rows: int, cols: int, triplets: Iterable[Tuple[int, int, object]]) -> "SparseMatrix":
        data: Dict[int, Dict[int, Fraction]] = {}
        for i, j, v in triplets:
            row = data.setdefault(i, {})
            if j in row:
                raise ValueError(f"duplicate entry at ({i}, {j})")
            row[j] = as_fraction(v)
        return cls(rows, cols, data)

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[Mapping[int, object]]) -> "SparseMatrix":
        data: Dict[int, Dict[int, Fraction]] = {}
        for j, col in enumerate(columns):
            for i, v in col.items():
                data.setdefault(i, {})[j] = v
        return cls(rows, len(columns), data)

    @classmethod
    def from_rows(cls, cols: int, rows: Sequence[Mapping[int, object]]) -> "SparseMatrix":
        return cls(len(rows), cols, {i: dict(r) for i, r in enumerate(rows)})

    # -- access ---------------------------------------------------------
    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij: Tuple[int, int]) -> Fraction:
        i, j = ij
        return self._data.get(i, {}).get(j, Fraction(0))

    def row(self, i: int) -> Vector:
        return dict(self._data.get(i, {}))

    def column(self, j: int) -> Vector:
        return {i: r[j] for i, r in self._data.items() if j in r}

    def columns(self) -> List[Vector]:
        cols: List[Vector] = [dict() for _ in range(self.cols)]
        for i in sorted(self._data):
            for j, v in self._data[i].items():
                cols[j][i] = v
        return cols

    def row_dicts(self) -> List[Vector]:
        return [self.row(i) for i in range(self.rows)]

    def triplets(self) -> List[Tuple[int, int, Fraction]]:
        return [(i, j, self._data[i][j]) for i in sorted(self._data) for j in sorted(self._data[i])]

    def nnz(self) -> int:
        return sum(len(r) for r in self._data.values())

    def to_dense(self) -> List[List[Fraction]]:
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for i, r in self._data.items():
            for j, v in r.items():
                out[i][j] = v
        return out

    def is_zero(self) -> bool:
        return not self._data

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(self.triplets())))

    def __repr__(self) -> str:
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz()})"

    # -- arithmetic -------------------------------------------------------
    def transpose(self) -> "SparseMatrix":
        data: Dict[int, Dict[int, Fraction]] = {}
        for i, r in self._data.items():
            for j, v in r.items():
                data.setdefault(j, {})[i] = v
        return SparseMatrix(self.cols, self.rows, data)

    @property
    def T(self) -> "SparseMatrix":
        return self.transpose()

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        od = other._data
        data: Dict[int, Dict[int, Fraction]] = {}
        for i, r in self._data.items():
            acc: Dict[int, Fraction] = {}
            for k, a in r.items():
                ok = od.get(k)
                if ok:
                    for j, b in ok.items():
                        acc[j] = acc.get(j, 0) + a * b
            acc = {j: v for j, v in acc.items() if v}
            if acc:
                data[i] = acc
        return SparseMatrix(self.rows, other.cols, data)

    def apply(self, vec: Mapping[int, Fraction]) -> Vector:
        out: Vector = {}
        for i, r in self._data.items():
            s = Fraction(0)
            for j, a in r.items():
                b = vec.get(j)
                if b:
                    s += a * b
            if s:
                out[i] = s
        return out

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        data = {i: dict(r) for i, r in self._data.items()}
        for i, r in other._data.items():
            row = data.setdefault(i, {})
            for j, v in r.items():
                row[j] = row.get(j, 0) + v
        return SparseMatrix(self.rows, self.cols, data)

    def __neg__(self) -> "SparseMatrix":
        return self.scale(-1)

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self + (-other)

    def scale(self, c) -> "SparseMatrix":
        c = as_fraction(c)
        if not c:
            return SparseMatrix(self.rows, self.cols)
        return SparseMatrix(self.rows, self.cols, {i: {j: c * v for j, v in r.items()} for i, r in self._data.items()})

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "SparseMatrix":
        cpos = {c: k for k, c in enumerate(cols)}
        data = {}
        for a, i in enumerate(rows):
            r = self._data.get(i)
            if r:
                data[a] = {cpos[j]: v for j, v in r.items() if j in cpos}
        return SparseMatrix(len(rows), len(cols), data)

    def rank(self) -> int:
        return len(echelon(self.row_dicts(), self.cols)[1])

    # -- serialization ------------------------------------------------------
    def to_text(self) -> str:
        lines = [f"{self.rows} {self.cols}"]
        lines += [f"{i} {j} {format_scalar(v)}" for i, j, v in self.triplets()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SparseMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        rows, cols = (int(t) for t in lines[0].split())
        trip = []
        for ln in lines[1:]:
            i, j, v = ln.split()
            trip.append((int(i), int(j), parse_scalar(v)))
        return cls.from_triplets(rows, cols, trip)

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols,
                "entries": [[i, j, format_scalar(v)] for i, j, v in self.triplets()]}


def block_matrix(blocks: Mapping[Tuple[int, int], SparseMatrix], row_sizes: Sequence[int], col_sizes: Sequence[int]) -> SparseMatrix:
    roff = [0]
    for s in row_sizes:
        roff.append(roff[-1] + s)
    coff = [0]
    for s in col_sizes:
        coff.append(coff[-1] + s)
    data: Dict[int, Dict[int, Fraction]] = {}
    for (bi, bj), m in blocks.items():
        if m.shape != (row_sizes[bi], col_sizes[bj]):
            raise ValueError(f"block ({bi},{bj}) has shape {m.shape}")
        for i, j, v in m.triplets():
            row = data.setdefault(roff[bi] + i, {})
            row[coff[bj] + j] = row.get(coff[bj] + j, 0) + v
    return SparseMatrix(roff[-1], coff[-1], data)


def kron(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    data: Dict[int, Dict[int, Fraction]] = {}
    for i1, j1, v1 in a.triplets():
        for i2, j2, v2 in b.triplets():
            data.setdefault(i1 * b.rows + i2, {})[j1 * b.cols + j2] = v1 * v2
    return SparseMatrix(a.rows * b.rows, a.cols * b.cols, data)


# ---------------------------------------------------------------------------
# elimination


def _integer_row(row: Mapping[int, Fraction]) -> Dict[int, int]:
    den = 1
    for v in row.values():
        den = lcm(den, v.denominator)
    out = {j: int(v * den) for j, v in row.items() if v}
    return _primitive(out)


def _primitive(row: Dict[int, int]) -> Dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            break
    if g > 1:
        row = {j: v // g for j, v in row.items()}
    return row


def echelon(rows: Sequence[Mapping[int, object]], ncols: int) -> Tuple[List[Vector], List[int]]:
    """Reduced row echelon form of the row space.

    Returns ``(basis, pivots)``: basis rows have a 1 at their pivot column and
    zeros at every other pivot column; pivots increase.
    """
    work: List[Dict[int, int]] = []
    for r in rows:
        r = {j: as_fraction(v) for j, v in r.items() if v}
        if r:
            work.append(_integer_row(r))
    # fraction-free forward pass; buckets rows by leading column
    by_lead: Dict[int, List[int]] = {}
    for idx, r in enumerate(work):
        by_lead.setdefault(min(r), []).append(idx)
    pivot_rows: Dict[int, Dict[int, int]] = {}
    while by_lead:
        col = min(by_lead)
        idxs = sorted(by_lead.pop(col))
        p = work[idxs[0]]
        a = p[col]
        pivot_rows[col] = p
        for idx in idxs[1:]:
            r = work[idx]
            b = r[col]
            new: Dict[int, int] = {}
            for j, v in r.items():
                new[j] = a * v
            for j, v in p.items():
                new[j] = new.get(j, 0) - b * v
            new = {j: v for j, v in new.items() if v}
            if new:
                new = _primitive(new)
                work[idx] = new
                by_lead.setdefault(min(new), []).append(idx)
    pivots = sorted(pivot_rows)
    basis: Dict[int, Vector] = {}
    for col in reversed(pivots):
        r = pivot_rows[col]
        a = r[col]
        vec: Vector = {j: Fraction(v, a) for j, v in r.items()}
        for j in [j for j in vec if j != col and j in basis]:
            c = vec.pop(j)
            for k, w in basis[j].items():
                if k == j:
                    continue
                nv = vec.get(k, 0) - c * w
                if nv:
                    vec[k] = nv
                else:
                    vec.pop(k, None)
        basis[col] = vec
    return [basis[c] for c in pivots], pivots


def reduce_vector(vec: Mapping[int, Fraction], basis: Sequence[Vector], pivots: Sequence[int]) -> Vector:
    """Reduce ``vec`` modulo an RREF basis (zero out all pivot columns)."""
    out = {j: as_fraction(v) for j, v in vec.items() if v}
    for b, p in zip(basis, pivots):
        c = out.get(p)
        if c:
            for k, w in b.items():
                nv = out.get(k, 0) - c * w
                if nv:
                    out[k] = nv
                else:
                    out.pop(k, None)
    return out


def kernel_basis(m: SparseMatrix) -> List[Vector]:
    basis, pivots = echelon(m.row_dicts(), m.cols)
    pivset = set(pivots)
    out = []
    for f in range(m.cols):
        if f in pivset:
            continue
        v: Vector = {f: Fraction(1)}
        for b, p in zip(basis, pivots):
            c = b.get(f)
            if c:
                v[p] = -c
        out.append(v)
    return out


@dataclass(frozen=True)
class RankKernelImage:
    rank: int
    kernel: SparseMatrix  # columns span ker(m)
    image: SparseMatrix   # columns span im(m), reduced echelon

    @property
    def nullity(self) -> int:
        return self.kernel.cols


def rank_kernel_image(m: SparseMatrix) -> RankKernelImage:
    ker = kernel_basis(m)
    img, _ = echelon(m.columns(), m.rows)
    return RankKernelImage(len(img), SparseMatrix.from_columns(m.cols, ker), SparseMatrix.from_columns(m.rows, img))


def span_rank(vectors: Sequence[Mapping[int, object]], n: int) -> int:
    return len(echelon(vectors, n)[1])


def solve(m: SparseMatrix, rhs: Mapping[int, Fraction]) -> Optional[Vector]:
    """One solution of ``m x = rhs`` (free variables set to zero), or None."""
    aug = [dict(r) for r in m.row_dicts()]
    for i, v in rhs.items():
        if v:
            aug[i][m.cols] = as_fraction(v)
    basis, pivots = echelon(aug, m.cols + 1)
    if pivots and pivots[-1] == m.cols:
        return None
    return {p: b[m.cols] for b, p in zip(basis, pivots) if m.cols in b}


def inverse(m: SparseMatrix) -> SparseMatrix:
    if m.rows != m.cols:
        raise ValueError("inverse of a non-square matrix")
    n = m.rows
    aug = [dict(r) for r in m.row_dicts()]
    for i in range(n):
        aug[i][n + i] = Fraction(1)
    basis, pivots = echelon(aug, 2 * n)
    if pivots != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return SparseMatrix(n, n, {i: {j - n: v for j, v in basis[i].items() if j >= n} for i in range(n)})


def determinant(m: SparseMatrix) -> Fraction:
    """Exact determinant by fraction-free Bareiss elimination."""
    if m.rows != m.cols:
        raise ValueError("determinant of a non-square matrix")
    n = m.rows
    if n == 0:
        return Fraction(1)
    den = 1
    for _, _, v in m.triplets():
        den = lcm(den, v.denominator)
    a = [[int(v * den) for v in row] for row in m.to_dense()]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return Fraction(0)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return Fraction(sign * a[n - 1][n - 1], den ** n)


def quotient_map(subspace: Sequence[Mapping[int, object]], n: int) -> Tuple[SparseMatrix, List[int]]:
    """Projection ``F^n -> F^n / subspace`` in coordinates of the non-pivot columns.

    Returns the matrix and the list of ambient columns used as quotient
    coordinates (unit vectors at those columns lift the quotient basis).
    """
    basis, pivots = echelon(subspace, n)
    pivset = set(pivots)
    free = [j for j in range(n) if j not in pivset]
    pos = {j: k for k, j in enumerate(free)}
    data: Dict[int, Dict[int, Fraction]] = {}
    for j in free:
        data.setdefault(pos[j], {})[j] = Fraction(1)
    for b, p in zip(basis, pivots):
        for j, v in b.items():
            if j != p:
                data.setdefault(pos[j], {})[p] = -v
    return SparseMatrix(len(free), n, data), free


def same_span(a: Sequence[Mapping[int, object]], b: Sequence[Mapping[int, object]], n: int) -> bool:
    ra, rb = span_rank(a, n), span_rank(b, n)
    return ra == rb == span_rank(list(a) + list(b), n)


# ---------------------------------------------------------------------------
# complexes


class ComplexError(ValueError):
    pass


@dataclass(frozen=True)
class ChainComplex:
    """Cochain complex: ``d[k]`` maps degree ``k`` to degree ``k + 1``."""

    dims: Mapping[int, int]
    d: Mapping[int, SparseMatrix] = field(default_factory=dict)

    def __post_init__(self):
        for k, m in self.d.items():
            want = (self.dim(k + 1), self.dim(k))
            if m.shape != want:
                raise ComplexError(f"differential in degree {k} has shape {m.shape}, expected {want}")

    def dim(self, k: int) -> int:
        return self.dims.get(k, 0)

    def diff(self, k: int) -> SparseMatrix:
        m = self.d.get(k)
        return m if m is not None else SparseMatrix.zeros(self.dim(k + 1), self.dim(k))

    @property
    def degrees(self) -> List[int]:
        return sorted(k for k, v in self.dims.items() if v)

    def check(self) -> List[int]:
        """Degrees ``k`` where ``d[k+1] @ d[k]`` is nonzero."""
        return [k for k in sorted(self.d) if not (self.diff(k + 1) @ self.diff(k)).is_zero()]

    def validate(self) -> None:
        bad = self.check()
        if bad:
            raise ComplexError(f"d^2 != 0 starting in degree {bad[0]}")


@dataclass(frozen=True)
class CohomologyGroup:
    degree: int
    dim: int
    representatives: List[Vector]   # cocycles in the ambient degree
    projection: SparseMatrix          # ambient -> H coordinates; kills coboundaries
    cocycle_dim: int
    boundary_dim: int


def cohomology_at(c: ChainComplex, k: int) -> CohomologyGroup:
    n = c.dim(k)
    z = kernel_basis(c.diff(k))
    b_basis, b_piv = echelon(c.diff(k - 1).columns(), n)
    reduced = [reduce_vector(v, b_basis, b_piv) for v in z]
    r_basis, r_piv = echelon(reduced, n)
    proj: Dict[int, Dict[int, Fraction]] = {}
    for a, p in enumerate(r_piv):
        row = {p: Fraction(1)}
        for b, q in zip(b_basis, b_piv):
            c_ = b.get(p)
            if c_:
                row[q] = -c_
        proj[a] = row
    return CohomologyGroup(k, len(r_basis), r_basis, SparseMatrix(len(r_basis), n, proj), len(z), len(b_basis))


def cohomology(c: ChainComplex, degrees: Optional[Iterable[int]] = None) -> Dict[int, CohomologyGroup]:
    bad = c.check()
    if bad:
        raise ComplexError(f"d^2 != 0 starting in degree {bad[0]}")
    if degrees is None:
        degrees = c.degrees
    return {k: cohomology_at(c, k) for k in degrees}


def betti(c: ChainComplex) -> Dict[int, int]:
    return {k: g.dim for k, g in cohomology(c).items()}


@dataclass(frozen=True)
class DoubleComplex:
    """Bigraded spaces with ``dh: (p,q)->(p+1,q)`` and ``dv: (p,q)->(p,q+1)``.

    The raw differentials must commute; totalization multiplies the vertical
    differential on bidegree ``(p, q)`` by ``(-1)**p``.
    """

    dims: Mapping[Tuple[int, int], int]
    dh: Mapping[Tuple[int, int], SparseMatrix] = field(default_factory=dict)
    dv: Mapping[Tuple[int, int], SparseMatrix] = field(default_factory=dict)

    def dim(self, p: int, q: int) -> int:
        return self.dims.get((p, q), 0)

    def h(self, p: int, q: int) -> SparseMatrix:
        m = self.dh.get((p, q))
        return m if m is not None else SparseMatrix.zeros(self.dim(p + 1, q), self.dim(p, q))

    def v(self, p: int, q: int) -> SparseMatrix:
        m = self.dv.get((p, q))
        return m if m is not None else SparseMatrix.zeros(self.dim(p, q + 1), self.dim(p, q))

    def violations(self) -> List[Tuple[str, Tuple[int, int]]]:
        out = []
        for (p, q) in sorted(self.dims):
            for name, m in (("dh", self.h(p, q)), ("dv", self.v(p, q))):
                if m.shape != ((self.dim(p + 1, q) if name == "dh" else self.dim(p, q + 1)), self.dim(p, q)):
                    out.append((f"{name} shape", (p, q)))
            if not (self.h(p + 1, q) @ self.h(p, q)).is_zero():
                out.append(("dh^2", (p, q)))
            if not (self.v(p, q + 1) @ self.v(p, q)).is_zero():
                out.append(("dv^2", (p, q)))
            if not (self.h(p, q + 1) @ self.v(p, q) - self.v(p + 1, q) @ self.h(p, q)).is_zero():
                out.append(("dh dv != dv dh", (p, q)))
        return out

    def blocks(self, n: int) -> List[Tuple[int, int]]:
        return [(p, q) for (p, q) in sorted(self.dims) if p + q == n and self.dims[(p, q)]]


def totalize(dc: DoubleComplex) -> Tuple[ChainComplex, Dict[int, List[Tuple[int, int]]]]:
    """Total complex; also returns the block order (ascending ``p``) per degree."""
    bad = dc.violations()
    if bad:
        what, bideg = bad[0]
        raise ComplexError(f"sign convention violated: {what} at bidegree {bideg}")
    degrees = sorted({p + q for (p, q), v in dc.dims.items() if v})
    layout = {n: dc.blocks(n) for n in degrees}
    dims = {n: sum(dc.dims[b] for b in layout[n]) for n in degrees}
    d = {}
    for n in degrees:
        src, tgt = layout[n], layout.get(n + 1, [])
        if not tgt:
            continue
        blocks = {}
        tpos = {b: k for k, b in enumerate(tgt)}
        for j, (p, q) in enumerate(src):
            if (p + 1, q) in tpos:
                blocks[(tpos[(p + 1, q)], j)] = dc.h(p, q)
            if (p, q + 1) in tpos:
                blocks[(tpos[(p, q + 1)], j)] = dc.v(p, q).scale((-1) ** (p % 2))
        d[n] = block_matrix(blocks, [dc.dims[b] for b in tgt], [dc.dims[b] for b in src])
    return ChainComplex(dims, d), layout


# ---------------------------------------------------------------------------
# dict-vector helpers


def vadd(a: Mapping[int, Fraction], b: Mapping[int, Fraction], c=1) -> Vector:
    out = dict(a)
    for k, v in b.items():
        nv = out.get(k, 0) + c * v
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    return out


def vscale(a: Mapping[int, Fraction], c) -> Vector:
    if not c:
        return {}
    return {k: c * v for k, v in a.items()}


def vaccumulate(acc: Dict, key, value) -> None:
    """``acc[key] += value`` dropping zeros; works for any hashable key."""
    nv = acc.get(key, 0) + value
    if nv:
        acc[key] = nv
    else:
        acc.pop(key, None)
