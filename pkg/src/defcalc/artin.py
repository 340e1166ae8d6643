"""Local Artin algebras, dual towers, MOS structures and quasi-scalar modules.

Everything past :func:`artin_validate` works in an *adapted* basis
``b_0 = 1, b_1, ...`` sorted by order, where ``ord(b) = k`` means
``b`` lies in ``m^k`` but not ``m^(k+1)``, and ``m^k`` is spanned by the
basis vectors of order ``>= k``.  Then ``S_i = S / m^(i+1)`` has the first
``n_i`` basis vectors as a basis, ``B_0^i = (S_i)*`` is spanned by the
first ``n_i`` dual vectors and ``B^i`` by those of order ``1..i``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .checks import Report
from .linalg import (SparseMatrix, Vector, as_fraction, echelon, inverse, kernel_basis, kron,
                     quotient_map, reduce_vector, solve, span_rank, vaccumulate)

Table = Dict[Tuple[int, int], Vector]


class NotLocalError(ValueError):
    pass


class TowerError(ValueError):
    pass


@dataclass(frozen=True)
class ArtinAlgebra:
    labels: Tuple[str, ...]
    table: Table
    unit: int = 0

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        clean = {}
        for key, vec in self.table.items():
            v = {k: as_fraction(c) for k, c in vec.items() if c}
            if v:
                clean[tuple(key)] = v
        object.__setattr__(self, "table", clean)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def mul(self, u: Mapping[int, Fraction], v: Mapping[int, Fraction]) -> Vector:
        out: Vector = {}
        for i, a in u.items():
            for j, b in v.items():
                for k, c in self.table.get((i, j), {}).items():
                    vaccumulate(out, k, a * b * c)
        return out

    def left_mult(self, u: Mapping[int, Fraction]) -> SparseMatrix:
        return SparseMatrix.from_columns(self.dim, [self.mul(u, {j: Fraction(1)}) for j in range(self.dim)])

    def _cached(self, key, fn):
        cache = self.__dict__.setdefault("_cache", {})
        if key not in cache:
            cache[key] = fn()
        return cache[key]

    def radical(self) -> List[Vector]:
        """Nilradical as the kernel of the trace form ``(a, b) -> tr(L_ab)`` (characteristic 0)."""
        def compute():
            mats = [self.left_mult({j: Fraction(1)}) for j in range(self.dim)]
            traces = [sum((m[i, i] for i in range(self.dim)), Fraction(0)) for m in mats]
            data: Dict[int, Dict[int, Fraction]] = {}
            for a in range(self.dim):
                for b in range(self.dim):
                    t = sum((c * traces[k] for k, c in self.table.get((a, b), {}).items()), Fraction(0))
                    if t:
                        data.setdefault(a, {})[b] = t
            form = SparseMatrix(self.dim, self.dim, data)
            return kernel_basis(form)
        return self._cached("radical", compute)

    def adapted(self) -> "Adapted":
        return self._cached("adapted", lambda: _adapt(self))


def truncated_polynomial(nvars: int, top: int, names: Sequence[str] = ("x", "y", "z", "w")) -> ArtinAlgebra:
    """``Q[x_1..x_n] / (x_1..x_n)^top`` on the monomial basis (graded lex, ascending degree)."""
    monos: List[Tuple[int, ...]] = []
    for deg in range(top):
        level = [e for e in product(range(deg + 1), repeat=nvars) if sum(e) == deg]
        monos.extend(sorted(level, reverse=True))
    idx = {e: k for k, e in enumerate(monos)}

    def label(e):
        parts = []
        for v, p in zip(names, e):
            if p == 1:
                parts.append(v)
            elif p > 1:
                parts.append(f"{v}^{p}")
        return "".join(parts) or "1"

    table: Table = {}
    for a, b in product(monos, repeat=2):
        c = tuple(x + y for x, y in zip(a, b))
        if c in idx:
            table[(idx[a], idx[b])] = {idx[c]: Fraction(1)}
    return ArtinAlgebra(tuple(label(e) for e in monos), table, 0)


def artin_validate(S: ArtinAlgebra) -> Report:
    rep = Report(f"artin algebra of dim {S.dim}")
    n = S.dim
    shapes = 0 <= S.unit < n and all(0 <= i < n and 0 <= j < n and all(0 <= k < n for k in v)
                                     for (i, j), v in S.table.items())
    rep.add("shapes", shapes)
    if not shapes:
        return rep
    e = [{i: Fraction(1)} for i in range(n)]
    one = e[S.unit]
    rep.add("unit", all(S.mul(one, e[i]) == e[i] == S.mul(e[i], one) for i in range(n)))
    bad = [(S.labels[i], S.labels[j]) for i in range(n) for j in range(i + 1, n) if S.mul(e[i], e[j]) != S.mul(e[j], e[i])]
    rep.add("commutativity", not bad, bad[:5] or None)
    bad = [(S.labels[i], S.labels[j], S.labels[k]) for i, j, k in product(range(n), repeat=3)
           if S.mul(S.mul(e[i], e[j]), e[k]) != S.mul(e[i], S.mul(e[j], e[k]))]
    rep.add("associativity", not bad, bad[:5] or None)
    if not rep.ok:
        return rep
    rad = S.radical()
    residue = n - len(rad)
    rep.add("local", residue == 1, {"residue_dim": residue})
    if residue == 1:
        ad = S.adapted()
        rep.info["nilpotency_index"] = ad.nilpotency
        rep.info["filtration_dims"] = ad.filtration_dims
        # m^k = 0 with k <= dim
        rep.add("nilpotent maximal ideal", ad.nilpotency <= n, {"index": ad.nilpotency})
    return rep


# ---------------------------------------------------------------------------
# adapted basis


@dataclass(frozen=True)
class Adapted:
    """``alg`` is ``S`` rewritten in the adapted basis; ``T`` has the adapted basis as columns."""

    alg: ArtinAlgebra
    T: SparseMatrix
    Tinv: SparseMatrix
    ord: Tuple[int, ...]
    nilpotency: int          # least k with m^k = 0

    @property
    def filtration_dims(self) -> List[int]:
        return [sum(1 for o in self.ord if o >= k) for k in range(self.nilpotency + 1)]

    def n(self, i: int) -> int:
        """``dim S_i``."""
        return sum(1 for o in self.ord if o <= i)

    def to_adapted(self, v: Mapping[int, Fraction]) -> Vector:
        return self.Tinv.apply(v)

    def from_adapted(self, v: Mapping[int, Fraction]) -> Vector:
        return self.T.apply(v)

    def convert_action(self, mats: Sequence[SparseMatrix]) -> List[SparseMatrix]:
        """Action matrices for the original basis -> for the adapted basis."""
        rows = mats[0].rows if mats else 0
        out = []
        for k in range(self.alg.dim):
            acc = SparseMatrix.zeros(rows, rows)
            for j, c in self.T.column(k).items():
                acc = acc + mats[j].scale(c)
            out.append(acc)
        return out


def _adapt(S: ArtinAlgebra) -> Adapted:
    n = S.dim
    rad = S.radical()
    if n - len(rad) != 1:
        raise NotLocalError(f"residue algebra has dimension {n - len(rad)}, not 1")
    powers = [echelon(rad, n)]
    while powers[-1][0]:
        prods = [S.mul(a, b) for a in powers[-1][0] for b in powers[0][0]]
        powers.append(echelon(prods, n))
    nilpotency = len(powers)          # powers[k] is m^(k+1); the last one is zero
    cols: List[Vector] = [{S.unit: Fraction(1)}]
    ords = [0]
    for k in range(len(powers) - 1):
        basis, piv = powers[k]
        nb, npiv = powers[k + 1]
        reduced = [reduce_vector(v, nb, npiv) for v in basis]
        comp, _ = echelon(reduced, n)
        cols.extend(comp)
        ords.extend([k + 1] * len(comp))
    T = SparseMatrix.from_columns(n, cols)
    Tinv = inverse(T)
    table: Table = {}
    for i in range(n):
        for j in range(n):
            v = Tinv.apply(S.mul(cols[i], cols[j]))
            if v:
                table[(i, j)] = v
    labels = tuple(_describe(c, S.labels) for c in cols)
    return Adapted(ArtinAlgebra(labels, table, 0), T, Tinv, tuple(ords), nilpotency)


def _describe(v: Vector, labels: Sequence[str]) -> str:
    if len(v) == 1:
        (k, c), = v.items()
        if c == 1:
            return labels[k]
    return "+".join(f"{c}*{labels[k]}" for k, c in sorted(v.items()))


# ---------------------------------------------------------------------------
# dual tower and symbols


@dataclass(frozen=True)
class DualTower:
    adapted: Adapted
    m: int
    dims0: Tuple[int, ...]     # dim B_0^i
    dims: Tuple[int, ...]      # dim B^i
    inclusions: Tuple[SparseMatrix, ...]   # B_0^(i-1) -> B_0^i for i = 1..m

    def right_action(self, i: int, s: Mapping[int, Fraction]) -> SparseMatrix:
        """``D -> D.s`` on ``B_0^i``, with ``(D.s)(t) = D(s t)`` (adapted coordinates for ``s``)."""
        n = self.dims0[i]
        S = self.adapted.alg
        data: Dict[int, Dict[int, Fraction]] = {}
        for l in range(n):
            prod = S.mul(s, {l: Fraction(1)})
            for k, c in prod.items():
                if k < n:
                    data.setdefault(l, {})[k] = c
        return SparseMatrix(n, n, data)


def dual_tower(S: ArtinAlgebra, m: int) -> DualTower:
    ad = S.adapted()
    dims0 = tuple(ad.n(i) for i in range(m + 1))
    incl = tuple(SparseMatrix(dims0[i], dims0[i - 1], {k: {k: 1} for k in range(dims0[i - 1])}) for i in range(1, m + 1))
    return DualTower(ad, m, dims0, tuple(d - 1 for d in dims0), incl)


def symbol_map(S: ArtinAlgebra, i: int) -> SparseMatrix:
    """``sigma^i: B_0^i -> B^i (x) B_0^(i-1)``, ``sigma^i(D)(a (x) b) = D(ab)``.

    Rows are ``(k - 1) * dim B_0^(i-1) + l`` for ``b_k^* (x) b_l^*``.
    """
    if i < 1:
        raise ValueError("symbol maps start at i = 1")
    ad = S.adapted()
    A = ad.alg
    ni, nprev = ad.n(i), ad.n(i - 1)
    data: Dict[int, Dict[int, Fraction]] = {}
    for k in range(1, ni):
        for l in range(nprev):
            for j, c in A.table.get((k, l), {}).items():
                if j < ni:
                    data.setdefault((k - 1) * nprev + l, {})[j] = c
    return SparseMatrix((ni - 1) * nprev, ni, data)


def symbol_factoring_defect(S: ArtinAlgebra, i: int) -> List[Tuple[int, int]]:
    """Entries of ``sigma^i`` outside ``F_i`` (pairs with ``ord_k + ord_l > i``); empty when it factors."""
    ad = S.adapted()
    nprev = ad.n(i - 1)
    out = []
    for r, c, _ in symbol_map(S, i).triplets():
        k, l = r // nprev + 1, r % nprev
        if ad.ord[k] + ad.ord[l] > i:
            out.append((k, l))
    return out


# ---------------------------------------------------------------------------
# MOS towers


@dataclass
class MOSModule:
    """Tower ``G^0 -> ... -> G^m`` of right ``S_i``-modules with symbol maps.

    ``actions[i][k]`` is the action of adapted basis vector ``b_k`` on ``G^i``;
    ``transitions[i]`` maps ``G^(i-1) -> G^i``; ``symbols[i]`` maps
    ``G^i -> B^i (x) G^(i-1)``, rows ``(k - 1) * dim G^(i-1) + g``.
    Index 0 of ``transitions`` and ``symbols`` is unused (``None``).
    """

    S: ArtinAlgebra
    dims: List[int]
    actions: List[List[SparseMatrix]]
    transitions: List[Optional[SparseMatrix]]
    symbols: List[Optional[SparseMatrix]]
    labels: str = ""

    @property
    def m(self) -> int:
        return len(self.dims) - 1

    def act(self, i: int, s: Mapping[int, Fraction]) -> SparseMatrix:
        acc = SparseMatrix.zeros(self.dims[i], self.dims[i])
        for k, c in s.items():
            acc = acc + self.actions[i][k].scale(c)
        return acc


def _id_kron(n: int, m: SparseMatrix) -> SparseMatrix:
    return kron(SparseMatrix.identity(n), m)


def validate_mos(G: MOSModule) -> Report:
    rep = Report(f"MOS tower {G.labels}".strip())
    ad = G.S.adapted()
    A = ad.alg
    nS = A.dim
    bad_mod, bad_kill, bad_trans, bad_sym, bad_fil = [], [], [], [], []
    for i in range(G.m + 1):
        acts = G.actions[i]
        if acts[0] != SparseMatrix.identity(G.dims[i]):
            bad_mod.append((i, "unit"))
        for a in range(nS):
            if ad.ord[a] > i and not acts[a].is_zero():
                bad_kill.append((i, A.labels[a]))
            for b in range(a, nS):
                # right module: g.(ab) = (g.a).b
                if acts[b] @ acts[a] != G.act(i, A.table.get((a, b), {})):
                    bad_mod.append((i, A.labels[a], A.labels[b]))
        if i == 0:
            continue
        T = G.transitions[i]
        for a in range(nS):
            if T @ G.actions[i - 1][a] != acts[a] @ T:
                bad_trans.append((i, A.labels[a]))
        sig = G.symbols[i]
        nB = ad.n(i) - 1
        for a in range(nS):
            if sig @ acts[a] != _id_kron(nB, G.actions[i - 1][a]) @ sig:
                bad_sym.append((i, A.labels[a]))
        # filtration on G^(i-1) by images of G^j
        gprev = G.dims[i - 1]
        images = _tower_images(G, i - 1)
        span: List[Vector] = []
        for k in range(1, nB + 1):
            for j, img in enumerate(images):
                if ad.ord[k] + j <= i:
                    for v in img:
                        span.append({(k - 1) * gprev + r: c for r, c in v.items()})
        total = (nB) * gprev
        rk = span_rank(span, total)
        if span_rank(span + sig.columns(), total) != rk:
            bad_fil.append(i)
    rep.add("right module", not bad_mod, bad_mod[:5] or None)
    rep.add("m^(i+1) acts as zero", not bad_kill, bad_kill[:5] or None)
    rep.add("transitions S-linear", not bad_trans, bad_trans[:5] or None)
    rep.add("symbols S-linear", not bad_sym, bad_sym[:5] or None)
    rep.add("symbols factor through F_i", not bad_fil, bad_fil or None)
    return rep


def _tower_images(G: MOSModule, top: int) -> List[List[Vector]]:
    """Images of ``G^j`` in ``G^top`` for ``j = 0..top``."""
    out = []
    for j in range(top + 1):
        M = SparseMatrix.identity(G.dims[j])
        for t in range(j + 1, top + 1):
            M = G.transitions[t] @ M
        out.append(M.columns())
    return out


def tensor_over_S(tower: DualTower, i: int, E_actions: Sequence[SparseMatrix]) -> Tuple[SparseMatrix, List[int]]:
    """``B_0^i (x)_S E`` as a quotient of ``B_0^i (x) E`` (index ``D * r + e``)."""
    n = tower.dims0[i]
    r = E_actions[0].rows if E_actions else 0
    rels: List[Vector] = []
    for t in range(tower.adapted.alg.dim):
        Rs = tower.right_action(i, {t: Fraction(1)})
        Es = E_actions[t]
        for D in range(n):
            for e in range(r):
                v: Vector = {}
                for k, c in Rs.column(D).items():
                    vaccumulate(v, k * r + e, c)
                for f, c in Es.column(e).items():
                    vaccumulate(v, D * r + f, -c)
                if v:
                    rels.append(v)
    return quotient_map(rels, n * r)


def _lift(free: Sequence[int], n: int) -> SparseMatrix:
    return SparseMatrix(n, len(free), {j: {k: 1} for k, j in enumerate(free)})


def transpose_module(S: ArtinAlgebra, E_actions: Sequence[SparseMatrix], m: int, adapted_actions: bool = False) -> MOSModule:
    """The tower ``B^i(E) = B_0^i (x)_S E``, ``i = 0..m``.

    ``E_actions[k]`` is the action of the ``k``-th basis vector of ``S``
    (original basis unless ``adapted_actions``).
    """
    tower = dual_tower(S, m)
    ad = tower.adapted
    acts_E = list(E_actions) if adapted_actions else ad.convert_action(E_actions)
    r = acts_E[0].rows
    Q, lifts = [], []
    for i in range(m + 1):
        q, free = tensor_over_S(tower, i, acts_E)
        Q.append(q)
        lifts.append(_lift(free, tower.dims0[i] * r))
    dims = [q.rows for q in Q]
    actions = []
    for i in range(m + 1):
        actions.append([Q[i] @ kron(tower.right_action(i, {t: Fraction(1)}), SparseMatrix.identity(r)) @ lifts[i]
                        for t in range(ad.alg.dim)])
    transitions: List[Optional[SparseMatrix]] = [None]
    symbols: List[Optional[SparseMatrix]] = [None]
    for i in range(1, m + 1):
        inc = kron(tower.inclusions[i - 1], SparseMatrix.identity(r))
        transitions.append(Q[i] @ inc @ lifts[i - 1])
        sig = kron(symbol_map(S, i), SparseMatrix.identity(r))
        symbols.append(_id_kron(tower.dims[i], Q[i - 1]) @ sig @ lifts[i])
    return MOSModule(S, dims, actions, transitions, symbols, "transpose")


def regular_actions(S: ArtinAlgebra) -> List[SparseMatrix]:
    """``S`` acting on itself (original basis)."""
    return [S.left_mult({k: Fraction(1)}) for k in range(S.dim)]


def free_actions(S: ArtinAlgebra, rank: int) -> List[SparseMatrix]:
    """``S^rank`` with basis ``(copy, basis vector)`` in row-major order."""
    regular = regular_actions(S)
    return [SparseMatrix(rank * S.dim, rank * S.dim,
                         {c * S.dim + i: {c * S.dim + j: v for j, v in L.row(i).items()}
                          for c in range(rank) for i in range(S.dim) if L.row(i)})
            for L in regular]


def standard_tower(S: ArtinAlgebra, m: int, copies: int = 1) -> MOSModule:
    """Co-free tower: ``copies`` of ``B_0^i`` with the standard structure."""
    tower = dual_tower(S, m)
    nS = tower.adapted.alg.dim
    I = SparseMatrix.identity(copies)
    actions = [[kron(I, tower.right_action(i, {t: Fraction(1)})) for t in range(nS)] for i in range(m + 1)]
    transitions: List[Optional[SparseMatrix]] = [None]
    symbols: List[Optional[SparseMatrix]] = [None]
    for i in range(1, m + 1):
        transitions.append(kron(I, tower.inclusions[i - 1]))
        # reorder copy-major (c, k, l) -> symbol-major (k, c, l)
        sig = symbol_map(S, i)
        nB, nprev, ni = tower.dims[i], tower.dims0[i - 1], tower.dims0[i]
        data: Dict[int, Dict[int, Fraction]] = {}
        for c in range(copies):
            for row, col, v in sig.triplets():
                k, l = divmod(row, nprev)
                data.setdefault(k * copies * nprev + c * nprev + l, {})[c * ni + col] = v
        symbols.append(SparseMatrix(nB * copies * nprev, copies * ni, data))
    return MOSModule(S, [copies * d for d in tower.dims0], actions, transitions, symbols, "standard")


# ---------------------------------------------------------------------------
# quasi-scalar modules


@dataclass
class QuasiScalar:
    """``C^m(G)``: a basis of maps ``phi^m: B_0^m -> G^m`` with the ``S_m``-action.

    ``basis[c]`` is a ``dim G^m x dim B_0^m`` matrix; ``witnesses[c]`` holds the
    full chain ``(phi^0, ..., phi^m)``; ``actions[k]`` is the action of the
    adapted basis vector ``b_k`` in ``basis`` coordinates.
    """

    S: ArtinAlgebra
    m: int
    basis: List[SparseMatrix]
    witnesses: List[List[SparseMatrix]]
    actions: List[SparseMatrix]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coords(self, phi: SparseMatrix) -> Optional[Vector]:
        flat = SparseMatrix.from_columns(phi.rows * phi.cols, [_flatten(b) for b in self.basis])
        return solve(flat, _flatten(phi))


def _flatten(M: SparseMatrix) -> Vector:
    return {r * M.cols + c: v for r, c, v in M.triplets()}


def quasi_scalar(S: ArtinAlgebra, G: MOSModule, m: Optional[int] = None) -> QuasiScalar:
    m = G.m if m is None else m
    if m > G.m:
        raise TowerError("tower shorter than requested order")
    rep = validate_mos(G)
    if not rep.ok:
        raise TowerError(f"inconsistent tower: {[c.name for c in rep.failures]}")
    tower = dual_tower(S, m)
    ad = tower.adapted
    nS = ad.alg.dim
    g, n = G.dims, tower.dims0
    offsets, off = [], 0
    for j in range(m + 1):
        offsets.append(off)
        off += g[j] * n[j]
    N = off

    def var(j, r, c):
        return offsets[j] + r * n[j] + c

    rows: List[Vector] = []

    for j in range(m + 1):
        # phi^j R_s = M_s phi^j
        for t in range(nS):
            R = tower.right_action(j, {t: Fraction(1)})
            M = G.actions[j][t]
            for r in range(g[j]):
                for c in range(n[j]):
                    v: Vector = {}
                    for k, val in R.column(c).items():
                        vaccumulate(v, var(j, r, k), val)
                    for k, val in M.row(r).items():
                        vaccumulate(v, var(j, k, c), -val)
                    if v:
                        rows.append(v)
        if j == 0:
            continue
        # phi^j incl = T phi^(j-1)
        inc = tower.inclusions[j - 1]
        T = G.transitions[j]
        for r in range(g[j]):
            for c in range(n[j - 1]):
                v = {}
                for k, val in inc.column(c).items():
                    vaccumulate(v, var(j, r, k), val)
                for k, val in T.row(r).items():
                    vaccumulate(v, var(j - 1, k, c), -val)
                if v:
                    rows.append(v)
        # sigma_G phi^j = (id (x) phi^(j-1)) sigma
        sigG = G.symbols[j]
        sig = symbol_map(S, j)
        nB = tower.dims[j]
        for k in range(nB):
            for r in range(g[j - 1]):
                row_out = k * g[j - 1] + r
                for c in range(n[j]):
                    v = {}
                    for q, val in sigG.row(row_out).items():
                        vaccumulate(v, var(j, q, c), val)
                    for l in range(n[j - 1]):
                        s_val = sig[k * n[j - 1] + l, c]
                        if s_val:
                            vaccumulate(v, var(j - 1, r, l), -s_val)
                    if v:
                        rows.append(v)
    sols = kernel_basis(SparseMatrix.from_rows(N, rows)) if N else []
    top = offsets[m]
    chosen_full = []
    basis_rows: List[Vector] = []
    for sol in sols:
        proj = {k - top: v for k, v in sol.items() if k >= top}
        if span_rank(basis_rows + [proj], g[m] * n[m]) > len(basis_rows):
            basis_rows.append(proj)
            chosen_full.append(sol)
    basis = [SparseMatrix(g[m], n[m], _unflatten(p, n[m])) for p in basis_rows]
    witnesses = []
    for sol in chosen_full:
        witnesses.append([SparseMatrix(g[j], n[j], _unflatten({k - offsets[j]: v for k, v in sol.items()
                                                                 if offsets[j] <= k < offsets[j] + g[j] * n[j]}, n[j]))
                          for j in range(m + 1)])
    C = QuasiScalar(S, m, basis, witnesses, [])
    flat = SparseMatrix.from_columns(g[m] * n[m], basis_rows)
    for t in range(nS):
        R = tower.right_action(m, {t: Fraction(1)})
        cols = []
        for b in basis:
            x = solve(flat, _flatten(b @ R))
            if x is None:
                raise TowerError("quasi-scalar space not closed under the S-action")
            cols.append(x)
        C.actions.append(SparseMatrix.from_columns(len(basis), cols))
    return C


def _unflatten(v: Mapping[int, Fraction], ncols: int) -> Dict[int, Dict[int, Fraction]]:
    out: Dict[int, Dict[int, Fraction]] = {}
    for k, c in v.items():
        out.setdefault(k // ncols, {})[k % ncols] = c
    return out


# ---------------------------------------------------------------------------
# freeness and the natural maps


def reduce_mod_power(S: ArtinAlgebra, actions: Sequence[SparseMatrix], m: int, adapted_actions: bool = True):
    """``E / m^(m+1) E``: returns (quotient matrix, induced adapted actions)."""
    ad = S.adapted()
    acts = list(actions) if adapted_actions else ad.convert_action(actions)
    r = acts[0].rows
    sub = [v for k in range(ad.alg.dim) if ad.ord[k] > m for v in acts[k].columns()]
    Q, free = quotient_map(sub, r)
    L = _lift(free, r)
    return Q, [Q @ a @ L for a in acts]


def freeness(S: ArtinAlgebra, actions: Sequence[SparseMatrix], adapted_actions: bool = True) -> Dict[str, object]:
    """Nakayama test: ``N`` is free iff ``dim N = dim S * dim(N / m N)``."""
    ad = S.adapted()
    acts = list(actions) if adapted_actions else ad.convert_action(actions)
    r = acts[0].rows if acts else 0
    mN = [v for k in range(1, ad.alg.dim) for v in acts[k].columns()]
    gens = r - span_rank(mN, r)
    return {"dim": r, "rank": gens, "free": r == gens * ad.alg.dim}


@dataclass
class NaturalMap:
    matrix: SparseMatrix
    injective: bool
    surjective: bool
    inverse: Optional[SparseMatrix]

    @property
    def iso(self) -> bool:
        return self.injective and self.surjective

    def to_json(self) -> dict:
        return {"rows": self.matrix.rows, "cols": self.matrix.cols, "rank": self.matrix.rank(),
                "injective": self.injective, "surjective": self.surjective,
                "inverse_verified": self.inverse is not None}


def _natural(M: SparseMatrix) -> NaturalMap:
    rk = M.rank()
    inj, surj = rk == M.cols, rk == M.rows
    inv = None
    if inj and surj:
        inv = inverse(M)
        if not (inv @ M == SparseMatrix.identity(M.cols) and M @ inv == SparseMatrix.identity(M.rows)):
            inv = None
    return NaturalMap(M, inj, surj, inv)


def double_dual_map(S: ArtinAlgebra, E_actions: Sequence[SparseMatrix], m: int,
                    adapted_actions: bool = False) -> Tuple[NaturalMap, QuasiScalar, MOSModule]:
    """``E (x) S_m -> C^m(B^m(E))``, ``e -> (D -> [D (x) e])``."""
    ad = S.adapted()
    acts = list(E_actions) if adapted_actions else ad.convert_action(E_actions)
    Qm, acts_m = reduce_mod_power(S, acts, m)
    G = transpose_module(S, acts_m, m, adapted_actions=True)
    C = quasi_scalar(S, G, m)
    tower = dual_tower(S, m)
    r = acts_m[0].rows
    q, free = tensor_over_S(tower, m, acts_m)
    cols = []
    for e in range(r):
        phi_cols = [q.apply({D * r + e: Fraction(1)}) for D in range(tower.dims0[m])]
        phi = SparseMatrix.from_columns(G.dims[m], phi_cols)
        x = C.coords(phi)
        if x is None:
            raise TowerError("image of the natural map is not quasi-scalar")
        cols.append(x)
    return _natural(SparseMatrix.from_columns(C.dim, cols)), C, G


def evaluation_map(S: ArtinAlgebra, G: MOSModule, m: Optional[int] = None) -> Tuple[NaturalMap, QuasiScalar]:
    """``B^m(C^m(G)) -> G^m``, ``D (x) phi -> phi(D)``."""
    C = quasi_scalar(S, G, m)
    m = C.m
    tower = dual_tower(S, m)
    q, free = tensor_over_S(tower, m, C.actions)
    c = C.dim
    cols = []
    for j in free:
        D, k = divmod(j, c)
        cols.append(C.basis[k].column(D))
    return _natural(SparseMatrix.from_columns(G.dims[m], cols)), C


def validate_module(S: ArtinAlgebra, actions: Sequence[SparseMatrix]) -> Report:
    """``actions[k]`` is the action of the ``k``-th basis vector of ``S`` (original basis)."""
    rep = Report("module over artin algebra")
    ok_shape = len(actions) == S.dim and len({(a.rows, a.cols) for a in actions}) == 1 and actions[0].rows == actions[0].cols
    rep.add("shapes", ok_shape)
    if not ok_shape:
        return rep
    n = actions[0].rows
    rep.add("unit acts as identity", actions[S.unit] == SparseMatrix.identity(n))
    bad = []
    for i in range(S.dim):
        for j in range(S.dim):
            prod = SparseMatrix.zeros(n, n)
            for k, c in S.table.get((i, j), {}).items():
                prod = prod + actions[k].scale(c)
            if actions[i] @ actions[j] != prod:
                bad.append((S.labels[i], S.labels[j]))
    rep.add("associative action", not bad, bad[:5] or None)
    return rep
