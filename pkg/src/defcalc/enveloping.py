"""Truncated enveloping algebras, the embedding into graded operators, graded traces.

Symmetric powers ``S^k(E)`` use sorted index tuples (monomials) as basis, in
lexicographic order.  A graded operator stores one matrix per degree
``0..N`` (the window).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import factorial
from random import Random
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .checks import Report
from .linalg import SparseMatrix, Vector, kernel_basis, span_rank, vaccumulate
from .lie import LieModel, Representation, sl_gl_of, validate_lie

Word = Tuple[int, ...]
Element = Dict[Word, Fraction]


class WindowError(ValueError):
    pass


# ---------------------------------------------------------------------------
# PBW


class TruncatedEnveloping:
    """``U^m(g)`` on PBW monomials (weakly increasing words) of length ``<= m``."""

    def __init__(self, g: LieModel, m: int):
        rep = validate_lie(g)
        if not rep.ok:
            raise ValueError(f"invalid Lie algebra: {[c.name for c in rep.failures]}")
        self.g, self.m = g, m
        self.basis: List[Word] = [w for k in range(m + 1) for w in combinations_with_replacement(range(g.dim), k)]
        self.index = {w: i for i, w in enumerate(self.basis)}
        self._memo: Dict[Word, Element] = {}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def straighten(self, word: Sequence[int]) -> Element:
        """Rewrite a word in the PBW basis using ``ab = ba + [a, b]`` (no truncation)."""
        word = tuple(word)
        hit = self._memo.get(word)
        if hit is not None:
            return hit
        out: Element = {}
        j = next((j for j in range(len(word) - 1) if word[j] > word[j + 1]), None)
        if j is None:
            out[word] = Fraction(1)
        else:
            a, b = word[j], word[j + 1]
            for w, c in self.straighten(word[:j] + (b, a) + word[j + 2:]).items():
                vaccumulate(out, w, c)
            for z, c in self.g.bracket_basis(a, b).items():
                for w, c2 in self.straighten(word[:j] + (z,) + word[j + 2:]).items():
                    vaccumulate(out, w, c * c2)
        self._memo[word] = out
        return out

    def mul(self, u: Mapping[Word, Fraction], v: Mapping[Word, Fraction], truncate: bool = True) -> Element:
        out: Element = {}
        for a, x in u.items():
            for b, y in v.items():
                for w, c in self.straighten(a + b).items():
                    if truncate and len(w) > self.m:
                        continue
                    vaccumulate(out, w, x * y * c)
        return out


def pbw(g: LieModel, m: int) -> TruncatedEnveloping:
    if m < 0:
        raise ValueError("m must be nonnegative")
    return TruncatedEnveloping(g, m)


def symmetric_power_dim(n: int, i: int) -> int:
    from math import comb
    return comb(n + i - 1, i) if n else (1 if i == 0 else 0)


# ---------------------------------------------------------------------------
# symmetric powers of E and graded operators


@lru_cache(maxsize=None)
def monomials(n: int, k: int) -> Tuple[Word, ...]:
    return tuple(combinations_with_replacement(range(n), k))


@lru_cache(maxsize=None)
def _mono_index(n: int, k: int) -> Dict[Word, int]:
    return {w: i for i, w in enumerate(monomials(n, k))}


def _insert(w: Word, a: int) -> Word:
    return tuple(sorted(w + (a,)))


def multiplication_map(n: int, k: int, a: int) -> SparseMatrix:
    """``S^k -> S^(k+1)``, ``s -> s e_a``."""
    src, tgt = monomials(n, k), _mono_index(n, k + 1)
    return SparseMatrix(len(tgt), len(src), {tgt[_insert(w, a)]: {j: 1} for j, w in enumerate(src)})


def derivative_map(n: int, k: int, a: int) -> SparseMatrix:
    """``S^k -> S^(k-1)``, ``d/de_a`` (interior multiplication by ``e_a^*``)."""
    src, tgt = monomials(n, k), _mono_index(n, k - 1)
    data: Dict[int, Dict[int, Fraction]] = {}
    for j, w in enumerate(src):
        c = w.count(a)
        if c:
            rest = list(w)
            rest.remove(a)
            data.setdefault(tgt[tuple(rest)], {})[j] = Fraction(c)
    return SparseMatrix(len(tgt), len(src), data)


@dataclass(frozen=True)
class GradedOperator:
    n: int                               # dim E
    comps: Tuple[SparseMatrix, ...]      # comps[k] acts on S^k(E), k = 0..N

    @property
    def N(self) -> int:
        return len(self.comps) - 1

    @staticmethod
    def identity(n: int, N: int) -> "GradedOperator":
        return GradedOperator(n, tuple(SparseMatrix.identity(len(monomials(n, k))) for k in range(N + 1)))

    @staticmethod
    def zero(n: int, N: int) -> "GradedOperator":
        return GradedOperator(n, tuple(SparseMatrix.zeros(len(monomials(n, k)), len(monomials(n, k))) for k in range(N + 1)))

    def __matmul__(self, other: "GradedOperator") -> "GradedOperator":
        N = min(self.N, other.N)
        return GradedOperator(self.n, tuple(self.comps[k] @ other.comps[k] for k in range(N + 1)))

    def __add__(self, other: "GradedOperator") -> "GradedOperator":
        N = min(self.N, other.N)
        return GradedOperator(self.n, tuple(self.comps[k] + other.comps[k] for k in range(N + 1)))

    def __sub__(self, other: "GradedOperator") -> "GradedOperator":
        return self + other.scale(-1)

    def scale(self, c) -> "GradedOperator":
        return GradedOperator(self.n, tuple(m.scale(c) for m in self.comps))

    def truncate(self, N: int) -> "GradedOperator":
        return GradedOperator(self.n, self.comps[:N + 1])

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.comps)

    def flatten(self) -> Vector:
        out: Vector = {}
        off = 0
        for m in self.comps:
            for r, c, v in m.triplets():
                out[off + r * m.cols + c] = v
            off += m.rows * m.cols
        return out

    @property
    def flat_dim(self) -> int:
        return sum(m.rows * m.cols for m in self.comps)


def derivation_extension(A: SparseMatrix, N: int) -> GradedOperator:
    """Extend ``A in End(E)`` to ``S^k(E)`` as a derivation."""
    n = A.rows
    comps = []
    for k in range(N + 1):
        src, tgt = monomials(n, k), _mono_index(n, k)
        data: Dict[int, Dict[int, Fraction]] = {}
        for j, w in enumerate(src):
            for p in range(k):
                rest = w[:p] + w[p + 1:]
                for b, c in A.column(w[p]).items():
                    row = tgt[_insert(rest, b)]
                    d = data.setdefault(row, {})
                    d[j] = d.get(j, 0) + c
        comps.append(SparseMatrix(len(src), len(src), {r: {c: v for c, v in d.items() if v} for r, d in data.items()}))
    return GradedOperator(n, tuple(comps))


class Rho:
    """``rho: U^m(g) -> graded operators on S^<=N(E)``."""

    def __init__(self, U: TruncatedEnveloping, rep: Representation, N: int):
        if N < U.m:
            raise WindowError("window must be at least the order bound")
        self.U, self.rep, self.N = U, rep, N
        self.gens = [derivation_extension(M, N) for M in rep.matrices]
        self._memo: Dict[Word, GradedOperator] = {(): GradedOperator.identity(rep.target_dim, N)}

    def of_word(self, w: Word) -> GradedOperator:
        hit = self._memo.get(w)
        if hit is None:
            hit = self.gens[w[0]] @ self.of_word(w[1:])
            self._memo[w] = hit
        return hit

    def __call__(self, u: Mapping[Word, Fraction]) -> GradedOperator:
        out = GradedOperator.zero(self.rep.target_dim, self.N)
        for w, c in u.items():
            out = out + self.of_word(tuple(w)).scale(c)
        return out

    def basis_images(self, words: Optional[Sequence[Word]] = None) -> List[GradedOperator]:
        return [self.of_word(w) for w in (self.U.basis if words is None else words)]

    def rank(self, words: Optional[Sequence[Word]] = None) -> int:
        imgs = self.basis_images(words)
        return span_rank([op.flatten() for op in imgs], imgs[0].flat_dim if imgs else 0)


def rho(U: TruncatedEnveloping, u: Mapping[Word, Fraction], rep: Representation, N: int) -> GradedOperator:
    return Rho(U, rep, N)(u)


def stable_window(U: TruncatedEnveloping, rep: Representation, words: Optional[Sequence[Word]] = None,
                  start: Optional[int] = None, limit: int = 12) -> Tuple[int, int, List[Tuple[int, int]]]:
    """Raise ``N`` from ``m + 2`` until the rank agrees at ``N`` and ``N + 1``.

    Returns ``(N, rank, history)``.
    """
    N = U.m + 2 if start is None else start
    history = []
    prev = Rho(U, rep, N).rank(words)
    history.append((N, prev))
    while N < limit:
        cur = Rho(U, rep, N + 1).rank(words)
        history.append((N + 1, cur))
        if cur == prev:
            return N, cur, history
        N, prev = N + 1, cur
    raise WindowError(f"rank did not stabilize up to N = {limit}: {history}")


# ---------------------------------------------------------------------------
# graded trace


def graded_trace(phi: GradedOperator) -> GradedOperator:
    """``tr^i(phi)(s) = sum_k d/de_k phi^(i+1)(s e_k)``: contraction of ``phi^(i+1)``
    along ``S^(i+1) -> S^i (x) E`` with the trace ``E (x) E* -> Q``."""
    n = phi.n
    comps = []
    for i in range(phi.N):
        dim = len(monomials(n, i))
        acc = SparseMatrix.zeros(dim, dim)
        for k in range(n):
            acc = acc + derivative_map(n, i + 1, k) @ phi.comps[i + 1] @ multiplication_map(n, i, k)
        comps.append(acc)
    return GradedOperator(n, tuple(comps))


def interior_criterion(phi: GradedOperator, i: int) -> Dict[Tuple[Word, Word], Fraction]:
    """``trace_E(e*_beta o phi^(i+1) o e_alpha)`` for monomials ``alpha, beta`` of degree ``i``.

    ``e_alpha`` multiplies ``E -> S^(i+1)``; ``e*_beta`` applies the
    derivatives ``S^(i+1) -> E``.
    """
    n = phi.n
    out = {}
    for alpha in monomials(n, i):
        up = SparseMatrix.identity(n)
        deg = 1
        for a in alpha:
            up = multiplication_map(n, deg, a) @ up
            deg += 1
        for beta in monomials(n, i):
            down = SparseMatrix.identity(len(monomials(n, i + 1)))
            deg = i + 1
            for b in beta:
                down = derivative_map(n, deg, b) @ down
                deg -= 1
            M = down @ phi.comps[i + 1] @ up
            t = sum((M[k, k] for k in range(n)), Fraction(0))
            if t:
                out[(alpha, beta)] = t
    return out


def criterion_from_contraction(tr: GradedOperator, i: int) -> Dict[Tuple[Word, Word], Fraction]:
    """The same quantities read off ``tr^i``: ``d^beta (tr^i(e_alpha))``."""
    n = tr.n
    mons = monomials(n, i)
    out = {}
    for a_idx, alpha in enumerate(mons):
        col = tr.comps[i].column(a_idx)
        for b_idx, beta in enumerate(mons):
            c = col.get(b_idx)
            if c:
                f = 1
                for k in set(beta):
                    f *= factorial(beta.count(k))
                out[(alpha, beta)] = c * f
    return out


def derivation_defect(phi: GradedOperator, psi: GradedOperator) -> GradedOperator:
    """``tr(phi psi) - tr(phi) psi - phi tr(psi)`` on the common window."""
    N = min(phi.N, psi.N)
    lhs = graded_trace(phi @ psi)
    t1 = graded_trace(phi) @ psi.truncate(N - 1)
    t2 = phi.truncate(N - 1) @ graded_trace(psi)
    return lhs - t1 - t2


def random_operator(n: int, N: int, rng: Random, lo: int = -3, hi: int = 3, density: float = 0.5) -> GradedOperator:
    comps = []
    for k in range(N + 1):
        d = len(monomials(n, k))
        data = {}
        for r in range(d):
            for c in range(d):
                if rng.random() < density:
                    v = rng.randint(lo, hi)
                    if v:
                        data.setdefault(r, {})[c] = v
        comps.append(SparseMatrix(d, d, data))
    return GradedOperator(n, tuple(comps))


# ---------------------------------------------------------------------------
# suites


def rho_report(g: LieModel, rep: Representation, m: int) -> Report:
    """PBW dimension, injectivity with window certificate, bracket compatibility."""
    r = Report(f"rho on U^{m}, dim E = {rep.target_dim}")
    U = pbw(g, m)
    expected = sum(symmetric_power_dim(g.dim, i) for i in range(m + 1))
    r.add("PBW dimension", U.dim == expected, {"dim": U.dim, "expected": expected})
    try:
        N, rank, hist = stable_window(U, rep)
    except WindowError as exc:
        r.add("window stabilized", False, str(exc))
        return r
    r.add("window stabilized", True, {"N": N, "history": hist})
    r.add("rho injective", rank == U.dim, {"rank": rank, "pbw_dim": U.dim})
    R = Rho(U, rep, N)
    bad = []
    for x in range(g.dim):
        for y in range(x + 1, g.dim):
            lhs = R(_lin(g.bracket_basis(x, y)))
            rhs = R.of_word((x,)) @ R.of_word((y,)) - R.of_word((y,)) @ R.of_word((x,))
            if lhs != rhs:
                bad.append((g.labels[x], g.labels[y]))
    r.add("rho bracket", not bad, bad or None)
    bad = []
    for a in U.basis:
        for b in U.basis:
            if len(a) + len(b) > m:
                continue
            if R(U.mul({a: Fraction(1)}, {b: Fraction(1)})) != R.of_word(a) @ R.of_word(b):
                bad.append((a, b))
    r.add("rho multiplicative", not bad, bad[:5] or None)
    r.info.update({"pbw_dim": U.dim, "rank": rank, "window": N})
    return r


def _lin(v: Mapping[int, Fraction]) -> Element:
    return {(k,): c for k, c in v.items()}


def augmentation_words(U: TruncatedEnveloping) -> List[Word]:
    return [w for w in U.basis if w]


def traceless_image_check(rep_dim: int, m: int, N: Optional[int] = None) -> Dict[str, object]:
    """Compare ``rho(U^m(sl(E)))`` with the traceless part of ``rho(U^m(gl(E)))``.

    Both readings are reported: on augmentation ideals, and with the unit
    included.
    """
    sl, sl_rep = sl_gl_of(rep_dim, "sl")
    gl, gl_rep = sl_gl_of(rep_dim, "gl")
    Us, Ug = pbw(sl, m), pbw(gl, m)
    if N is None:
        N, _, _ = stable_window(Ug, gl_rep)
    Rs, Rg = Rho(Us, sl_rep, N), Rho(Ug, gl_rep, N)
    flat_dim = GradedOperator.identity(rep_dim, N).flat_dim
    sl_aug = [op.flatten() for op in Rs.basis_images(augmentation_words(Us))]
    sl_all = [op.flatten() for op in Rs.basis_images()]
    gl_aug_ops = Rg.basis_images(augmentation_words(Ug))
    gl_aug = [op.flatten() for op in gl_aug_ops]
    gl_all = [op.flatten() for op in Rg.basis_images()]

    def traceless_dim(ops: List[GradedOperator]) -> int:
        if not ops:
            return 0
        # kernel of the linear map (coefficients) -> tr(sum c_j op_j), inside the span
        tr_cols = [graded_trace(op).flatten() for op in ops]
        tr_dim = graded_trace(ops[0]).flat_dim
        coeff_kernel = kernel_basis(SparseMatrix.from_columns(tr_dim, tr_cols))
        vecs = []
        for kv in coeff_kernel:
            acc: Vector = {}
            for j, c in kv.items():
                for k, v in ops[j].flatten().items():
                    vaccumulate(acc, k, c * v)
            vecs.append(acc)
        return span_rank(vecs, flat_dim)

    gl_all_ops = Rg.basis_images()
    out = {
        "window": N,
        "sl_image_dim": span_rank(sl_all, flat_dim),
        "sl_aug_image_dim": span_rank(sl_aug, flat_dim),
        "gl_image_dim": span_rank(gl_all, flat_dim),
        "gl_aug_image_dim": span_rank(gl_aug, flat_dim),
        "traceless_in_gl_aug_dim": traceless_dim(gl_aug_ops),
        "traceless_in_gl_dim": traceless_dim(gl_all_ops),
    }
    out["augmentation_reading_equal"] = out["sl_aug_image_dim"] == out["traceless_in_gl_aug_dim"]
    out["unital_reading_equal"] = out["sl_image_dim"] == out["traceless_in_gl_dim"]
    # containment: is rho(sl aug) inside the traceless operators at all?
    out["sl_aug_traceless"] = all(graded_trace(op).is_zero() for op in Rs.basis_images(augmentation_words(Us)))
    return out


def trace_report(g: LieModel, rep: Representation, m: int = 3, fuzz: int = 100, seed: int = 0, N: int = 3) -> Report:
    """Derivation property of ``tr``, vanishing on ``rho`` of the augmentation ideal,
    and agreement of the contraction with the interior-multiplication criterion."""
    r = Report(f"graded trace, dim E = {rep.target_dim}")
    rng = Random(seed)
    n = rep.target_dim
    bad = []
    for t in range(fuzz):
        phi, psi = random_operator(n, N, rng), random_operator(n, N, rng)
        if not derivation_defect(phi, psi).is_zero():
            bad.append(t)
    r.add("tr is a derivation", not bad, {"failed_pairs": len(bad), "of": fuzz} if bad else None)
    U = pbw(g, m)
    R = Rho(U, rep, max(N, m + 1))
    bad = []
    for w in augmentation_words(U):
        t = graded_trace(R.of_word(w))
        if not t.is_zero():
            bad.append({"word": [g.labels[a] for a in w],
                        "trace": [[[str(x) for x in row] for row in c.to_dense()] for c in t.comps]})
    r.add("tr(rho(u)) = 0 on the augmentation ideal", not bad,
          {"failed_words": len(bad), "of": len(augmentation_words(U)), "first": bad[0]} if bad else None)
    bad = []
    for t in range(fuzz):
        phi = random_operator(n, N, rng)
        tr = graded_trace(phi)
        for i in range(N):
            if interior_criterion(phi, i) != criterion_from_contraction(tr, i):
                bad.append((t, i))
    r.add("contraction matches interior criterion", not bad, bad[:5] or None)
    return r
