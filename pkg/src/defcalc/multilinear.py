"""Graded exterior/symmetric powers, Chevalley-Eilenberg differentials, unshuffle coproducts.

Words are nondecreasing tuples of basis indices.  The exterior power of a
graded space is the graded-symmetric power of its shift by one, so a word
of degree-``p`` letters has Koszul parity ``p + 1`` per letter there, and
parity ``p`` in a plain symmetric power.  Odd letters may not repeat.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from math import comb
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .linalg import SparseMatrix, Vector, block_matrix, vaccumulate
from .lie import GeometricModel, LieModel, Representation, trace_pairing

Word = Tuple[int, ...]
Element = Dict[Word, Fraction]

EXTERIOR, SYMMETRIC = "exterior", "symmetric"


def parities(kind: str, degrees: Sequence[int]) -> Tuple[int, ...]:
    if kind == EXTERIOR:
        return tuple((d + 1) % 2 for d in degrees)
    if kind == SYMMETRIC:
        return tuple(d % 2 for d in degrees)
    raise ValueError(f"unknown power kind {kind!r}")


def normalize(word: Sequence[int], par: Sequence[int]) -> Tuple[int, Optional[Word]]:
    """Sort ``word`` into canonical order; returns ``(sign, word)`` or ``(0, None)``."""
    w = list(word)
    sign = 1
    # insertion sort, counting transpositions of two odd letters
    for i in range(1, len(w)):
        j = i
        while j > 0 and w[j - 1] > w[j]:
            if par[w[j - 1]] and par[w[j]]:
                sign = -sign
            w[j - 1], w[j] = w[j], w[j - 1]
            j -= 1
    for a, b in zip(w, w[1:]):
        if a == b and par[a]:
            return 0, None
    return sign, tuple(w)


def words(par: Sequence[int], i: int) -> List[Word]:
    """Canonical basis words of length ``i``, lexicographic."""
    n = len(par)
    return [w for w in combinations_with_replacement(range(n), i)
            if all(not (a == b and par[a]) for a, b in zip(w, w[1:]))]


def graded_power_dim(n_even: int, n_odd: int, i: int) -> int:
    """Closed form: sum over k of multichoose(n_even, k) * choose(n_odd, i - k)."""
    total = 0
    for k in range(i + 1):
        me = comb(n_even + k - 1, k) if n_even else (1 if k == 0 else 0)
        total += me * comb(n_odd, i - k)
    return total


@dataclass(frozen=True)
class PowerBasis:
    kind: str
    degrees: Tuple[int, ...]
    i: int
    words: Tuple[Word, ...] = field(init=False)
    par: Tuple[int, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(self.degrees))
        par = parities(self.kind, self.degrees)
        object.__setattr__(self, "par", par)
        object.__setattr__(self, "words", tuple(words(par, self.i)))

    @property
    def dim(self) -> int:
        return len(self.words)

    def index(self) -> Dict[Word, int]:
        return {w: k for k, w in enumerate(self.words)}

    def word_degree(self, w: Word) -> int:
        shift = 1 if self.kind == EXTERIOR else 0
        return sum(self.degrees[a] - shift for a in w)


def power_basis(kind: str, degrees: Sequence[int], i: int) -> PowerBasis:
    if i < 0:
        raise ValueError("power must be nonnegative")
    return PowerBasis(kind, tuple(degrees), i)


def element_from_word(word: Sequence[int], par: Sequence[int], coeff=1) -> Element:
    s, w = normalize(word, par)
    return {w: Fraction(s) * coeff} if s else {}


def multiply(x: Mapping[Word, Fraction], y: Mapping[Word, Fraction], par: Sequence[int]) -> Element:
    out: Element = {}
    for u, a in x.items():
        for v, b in y.items():
            s, w = normalize(u + v, par)
            if s:
                vaccumulate(out, w, s * a * b)
    return out


def unshuffles(word: Word, par: Sequence[int], a: int) -> Iterator[Tuple[int, Word, Word]]:
    """All ``(sign, left, right)`` with ``left`` a size-``a`` subset of positions."""
    n = len(word)
    for left in combinations(range(n), a):
        lset = set(left)
        sign = 1
        # each left letter jumps over the right letters standing before it
        odd_right_before = 0
        for p in range(n):
            if p in lset:
                if par[word[p]] and odd_right_before % 2:
                    sign = -sign
            elif par[word[p]]:
                odd_right_before += 1
        yield sign, tuple(word[p] for p in left), tuple(word[p] for p in range(n) if p not in lset)


def coproduct(x: Mapping[Word, Fraction], par: Sequence[int], reduced: bool = True) -> Dict[Tuple[Word, Word], Fraction]:
    """Unshuffle coproduct; ``reduced`` drops the ``1 (x) w`` and ``w (x) 1`` terms."""
    out: Dict[Tuple[Word, Word], Fraction] = {}
    for w, c in x.items():
        lo, hi = (1, len(w) - 1) if reduced else (0, len(w))
        for a in range(lo, hi + 1):
            for s, l, r in unshuffles(w, par, a):
                vaccumulate(out, (l, r), s * c)
    return out


# ---------------------------------------------------------------------------
# Chevalley-Eilenberg coderivation on the exterior coalgebra of a DGLA


def _as_model(g: Union[LieModel, GeometricModel], coeffs: Optional[Representation] = None) -> GeometricModel:
    if isinstance(g, GeometricModel):
        return g
    gm = g.as_geometric(coeffs)
    return gm


class CEEngine:
    """Applies the Chevalley-Eilenberg differential to words of a DGLA model.

    Letters are basis indices of ``L`` viewed in ``L[1]``.  The differential
    is the coderivation with linear part ``sx -> -s(dx)`` and quadratic part
    ``sx . sy -> (-1)^|x| s[x, y]``.  With a module, a letter ``sx`` is pulled
    to the front, then acts on ``m`` after hopping over the remaining word
    (sign ``(-1)^(|x| |rest|)``); ``d_M`` enters as ``(-1)^|w| w (x) dm``.
    """

    def __init__(self, gm: GeometricModel):
        self.gm = gm
        self.deg = gm.L.degrees
        self.par = parities(EXTERIOR, self.deg)
        self._dL = {i: gm.d_L({i: Fraction(1)}) for i in range(gm.L.dim)}
        self._cache: Dict[tuple, Element] = {}

    def word_degree(self, w: Word) -> int:
        return sum(self.deg[a] - 1 for a in w)

    def d_word(self, w: Word, linear: bool = True, quadratic: bool = True) -> Element:
        key = (w, linear, quadratic)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        par = self.par
        out: Element = {}
        if linear:
            before = 0
            for j, x in enumerate(w):
                sgn = -1 if before % 2 == 0 else 1
                for k, c in self._dL[x].items():
                    s, nw = normalize(w[:j] + (k,) + w[j + 1:], par)
                    if s:
                        vaccumulate(out, nw, sgn * s * c)
                before += par[x]
        if quadratic and len(w) >= 2:
            for s0, (x, y), rest in unshuffles(w, par, 2):
                sx = -1 if self.deg[x] % 2 else 1
                for k, c in self.gm.bracket.get((x, y), {}).items():
                    s, nw = normalize((k,) + rest, par)
                    if s:
                        vaccumulate(out, nw, s0 * s * sx * c)
        self._cache[key] = out
        return out

    def d_module_word(self, w: Word, m: int, linear: bool = True, quadratic: bool = True,
                      action: bool = True, internal: bool = True) -> Dict[Tuple[Word, int], Fraction]:
        M = self.gm.module
        out: Dict[Tuple[Word, int], Fraction] = {}
        for nw, c in self.d_word(w, linear, quadratic).items():
            vaccumulate(out, (nw, m), c)
        if internal and M is not None and M.d is not None:
            s = -1 if sum(self.par[a] for a in w) % 2 else 1
            for k, c in M.d.column(m).items():
                vaccumulate(out, (w, k), s * c)
        if action and M is not None and w:
            for s0, (x,), rest in unshuffles(w, self.par, 1):
                hop = -1 if (self.deg[x] * sum(self.par[a] for a in rest)) % 2 else 1
                for k, c in M.action.get((x, m), {}).items():
                    vaccumulate(out, (rest, k), s0 * hop * c)
        return out


def ce_differential(g: Union[LieModel, GeometricModel], coeffs: Optional[Representation], i: int) -> SparseMatrix:
    """Bracket (and action) part ``lambda^i (x) coeffs -> lambda^(i-1) (x) coeffs``.

    Columns/rows follow ``power_basis(EXTERIOR, degrees, i)`` words, times the
    coefficient basis (coefficient index fastest).  ``coeffs=None`` means the
    trivial one-dimensional module.
    """
    gm = _as_model(g, coeffs)
    eng = CEEngine(gm)
    src = power_basis(EXTERIOR, gm.L.degrees, i)
    tgt = power_basis(EXTERIOR, gm.L.degrees, i - 1) if i >= 1 else None
    if tgt is None:
        return SparseMatrix.zeros(0, src.dim)
    tidx = tgt.index()
    if coeffs is None:
        data: Dict[int, Dict[int, Fraction]] = {}
        for col, w in enumerate(src.words):
            for nw, c in eng.d_word(w, linear=False).items():
                data.setdefault(tidx[nw], {})[col] = c
        return SparseMatrix(tgt.dim, src.dim, data)
    nE = coeffs.target_dim
    data = {}
    for col_w, w in enumerate(src.words):
        for m in range(nE):
            col = col_w * nE + m
            for (nw, k), c in eng.d_module_word(w, m, linear=False, internal=False).items():
                if len(nw) == i - 1:
                    data.setdefault(tidx[nw] * nE + k, {})[col] = c
    return SparseMatrix(tgt.dim * nE, src.dim * nE, data)


def deconcat(i: int, degrees: Sequence[int]) -> Tuple[SparseMatrix, List[Tuple[int, int]]]:
    """Unshuffle coproduct ``lambda^i -> sum_{a+b=i} lambda^a (x) lambda^b`` (a, b >= 1).

    Returns the matrix and the ordered list of target summands ``(a, b)``;
    each summand is indexed by ``left * dim(lambda^b) + right``.
    """
    if i < 2:
        raise ValueError("deconcatenation needs i >= 2")
    src = power_basis(EXTERIOR, degrees, i)
    par = src.par
    summands = [(a, i - a) for a in range(1, i)]
    bases = {k: power_basis(EXTERIOR, degrees, k) for k in range(1, i)}
    idx = {k: b.index() for k, b in bases.items()}
    blocks = {}
    for s_idx, (a, b) in enumerate(summands):
        data: Dict[int, Dict[int, Fraction]] = {}
        for col, w in enumerate(src.words):
            for sgn, l, r in unshuffles(w, par, a):
                row = idx[a][l] * bases[b].dim + idx[b][r]
                d = data.setdefault(row, {})
                d[col] = d.get(col, 0) + sgn
        blocks[(s_idx, 0)] = SparseMatrix(bases[a].dim * bases[b].dim, src.dim, data)
    return block_matrix(blocks, [bases[a].dim * bases[b].dim for a, b in summands], [src.dim]), summands


def trace_on_sigma2(g: Union[Representation, GeometricModel]) -> Dict[Word, Vector]:
    """Trace pairing on the graded symmetric square: word ``(x, y) -> tr(x, y)``.

    For a representation, the values are scalars stored as ``{0: value}``.
    """
    if isinstance(g, Representation):
        tp = trace_pairing(g)
        ws = words((0,) * g.lie.dim, 2)
        return {w: ({0: tp[w]} if tp.get(w) else {}) for w in ws}
    par = parities(SYMMETRIC, g.L.degrees)
    return {w: g.tr({w[0]: Fraction(1)}, {w[1]: Fraction(1)}) for w in words(par, 2)}


def young_21_projector(n: int) -> SparseMatrix:
    """Projector of ``Sym^2 V (x) V`` onto the kernel of symmetrization (the ``sigma^{2,1}`` part).

    Coordinates: ``Sym^2`` words (lexicographic) times ``V``.
    """
    par = (0,) * n
    s2 = words(par, 2)
    s3 = words(par, 3)
    s2i = {w: k for k, w in enumerate(s2)}
    s3i = {w: k for k, w in enumerate(s3)}
    dim = len(s2) * n
    # symmetrize: (ab) (x) c -> abc ; polarize back: abc -> (1/3)[(ab)c + (ac)b + (bc)a]
    sym = {}
    for k, (a, b) in enumerate(s2):
        for c in range(n):
            sym[k * n + c] = s3i[tuple(sorted((a, b, c)))]
    pol: Dict[int, Dict[int, Fraction]] = {}
    for j, w in enumerate(s3):
        for p in range(3):
            rest = tuple(sorted(w[:p] + w[p + 1:]))
            row = s2i[rest] * n + w[p]
            pol.setdefault(row, {})
            pol[row][j] = pol[row].get(j, 0) + Fraction(1, 3)
    S = SparseMatrix(len(s3), dim, {r: {c: 1 for c, rr in sym.items() if rr == r} for r in range(len(s3))})
    P = SparseMatrix(dim, len(s3), pol)
    e = P @ S
    # e is the projection onto the sigma^3 summand; its complement is sigma^{2,1}
    return SparseMatrix.identity(dim) - e
