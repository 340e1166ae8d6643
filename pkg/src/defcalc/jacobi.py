"""Jacobi complexes, truncated deformation rings, obstructions and Poincare modules.

The Jacobi complex ``J_m`` of a DGLA model is ``Sym^1..Sym^m`` of ``L[1]``;
the layer ``Sym^i`` sits in bidegree ``(-i, internal degree)``.  With a
dg-module ``M`` the layers are ``Sym^i(L[1]) (x) M`` for ``i = 0..m``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, Hashable, List, Optional, Tuple, Union

from .artin import (ArtinAlgebra, MOSModule, QuasiScalar, TowerError, artin_validate, freeness,
                    quasi_scalar, validate_mos)
from .checks import Report
from .linalg import (ChainComplex, CohomologyGroup, ComplexError, DoubleComplex, SparseMatrix,
                     Vector, cohomology, cohomology_at, kron, span_rank, totalize, vaccumulate)
from .lie import GeometricModel, LieModel, Representation, validate_geometric_model
from .multilinear import EXTERIOR, CEEngine, ce_differential, parities, unshuffles, words

Key = Hashable


class InvalidModelError(ValueError):
    pass


def _model(g: Union[LieModel, GeometricModel], rep: Optional[Representation] = None) -> GeometricModel:
    gm = g.as_geometric(rep) if isinstance(g, LieModel) else g
    rep_ = validate_geometric_model(gm)
    if not rep_.ok:
        raise InvalidModelError(f"invalid model: {[c.name for c in rep_.failures]}")
    return gm


@dataclass
class JacobiComplex:
    model: GeometricModel
    m: int
    with_module: bool
    double: DoubleComplex
    complex: ChainComplex
    keys: Dict[int, List[Key]]          # basis keys per total degree, in totalized order
    index: Dict[int, Dict[Key, int]]

    def degree_of(self, key: Key) -> int:
        for n, idx in self.index.items():
            if key in idx:
                return n
        raise KeyError(key)

    def cohomology(self, n: int) -> CohomologyGroup:
        return cohomology_at(self.complex, n)


def _build(gm: GeometricModel, m: int, with_module: bool) -> JacobiComplex:
    eng = CEEngine(gm)
    deg = gm.L.degrees
    par = eng.par
    lo = 0 if with_module else 1
    mdeg = gm.module.space.degrees if with_module else ()
    blocks: Dict[Tuple[int, int], List[Key]] = {}
    for i in range(lo, m + 1):
        for w in words(par, i):
            q = sum(deg[a] for a in w)
            if with_module:
                for k, dk in enumerate(mdeg):
                    blocks.setdefault((-i, q + dk), []).append((w, k))
            else:
                blocks.setdefault((-i, q), []).append(w)
    pos = {b: {k: j for j, k in enumerate(keys)} for b, keys in blocks.items()}

    def image(key: Key) -> Dict[Key, Fraction]:
        if with_module:
            w, k = key
            return eng.d_module_word(w, k)
        return eng.d_word(key)

    dh: Dict[Tuple[int, int], Dict[int, Dict[int, Fraction]]] = {}
    dv: Dict[Tuple[int, int], Dict[int, Dict[int, Fraction]]] = {}
    for (p, q), keys in blocks.items():
        for col, key in enumerate(keys):
            for tkey, c in image(key).items():
                tw = tkey[0] if with_module else tkey
                tp = -len(tw)
                if tp == p + 1:
                    dh.setdefault((p, q), {}).setdefault(pos[(tp, q)][tkey], {})[col] = c
                elif tp == p:
                    # raw vertical map carries (-1)^p so the totalized differential is D
                    s = -1 if p % 2 else 1
                    dv.setdefault((p, q), {}).setdefault(pos[(p, q + 1)][tkey], {})[col] = s * c
                else:
                    raise ComplexError("Jacobi differential left the bigrading")
    dims = {b: len(k) for b, k in blocks.items()}
    dh_m = {b: SparseMatrix(dims[(b[0] + 1, b[1])], dims[b], d) for b, d in dh.items()}
    dv_m = {b: SparseMatrix(dims[(b[0], b[1] + 1)], dims[b], d) for b, d in dv.items()}
    dc = DoubleComplex(dims, dh_m, dv_m)
    total, layout = totalize(dc)
    keys = {n: [k for b in layout[n] for k in blocks[b]] for n in layout}
    index = {n: {k: j for j, k in enumerate(ks)} for n, ks in keys.items()}
    return JacobiComplex(gm, m, with_module, dc, total, keys, index)


def jacobi(g: Union[LieModel, GeometricModel], m: int) -> JacobiComplex:
    if m < 1:
        raise ValueError("m must be at least 1")
    return _build(_model(g), m, False)


def jacobi_module(g: Union[LieModel, GeometricModel], m: int, rep: Optional[Representation] = None) -> JacobiComplex:
    gm = _model(g, rep)
    if gm.module is None:
        raise InvalidModelError("model has no module")
    if m < 0:
        raise ValueError("m must be nonnegative")
    return _build(gm, m, True)


def lie_cohomology(g: LieModel, rep: Representation) -> Dict[int, int]:
    """``H^k(g, E)`` from the cochain complex ``Hom(lambda^k g, E)``."""
    dual = Representation(g, tuple(-M.T for M in rep.matrices), tuple(f"{l}*" for l in rep.labels))
    n = g.dim
    dims = {k: len(words((1,) * n, k)) * rep.target_dim for k in range(n + 1)}
    d = {k: ce_differential(g, dual, k + 1).T for k in range(n)}
    return {k: grp.dim for k, grp in cohomology(ChainComplex(dims, d)).items()}


# ---------------------------------------------------------------------------
# deformation rings


def _coproduct_00(J: JacobiComplex, P: SparseMatrix, vec: Vector) -> Dict[Tuple[int, int], Fraction]:
    """``(P (x) P)`` of the ``(0, 0)`` Kunneth component of the reduced coproduct."""
    par = parities(EXTERIOR, J.model.L.degrees)
    keys, idx0 = J.keys[0], J.index[0]
    out: Dict[Tuple[int, int], Fraction] = {}
    for j, c in vec.items():
        w = keys[j]
        for a in range(1, len(w)):
            for s, l, r in unshuffles(w, par, a):
                if l in idx0 and r in idx0:
                    pl, pr = P.column(idx0[l]), P.column(idx0[r])
                    for x, u in pl.items():
                        for y, v in pr.items():
                            vaccumulate(out, (x, y), s * c * u * v)
    return out


@dataclass
class DeformationRing:
    J: JacobiComplex
    V: CohomologyGroup
    ring: ArtinAlgebra          # basis "1", f_0, f_1, ...; f_a dual to V-representative a
    report: Report

    @property
    def m(self) -> int:
        return self.J.m


def deformation_ring(g: Union[LieModel, GeometricModel], m: int) -> DeformationRing:
    J = jacobi(g, m)
    V = J.cohomology(0)
    k = V.dim
    table: Dict[Tuple[int, int], Vector] = {(0, 0): {0: Fraction(1)}}
    for a in range(k):
        table[(0, a + 1)] = {a + 1: Fraction(1)}
        table[(a + 1, 0)] = {a + 1: Fraction(1)}
    for c, z in enumerate(V.representatives):
        for (a, b), val in _coproduct_00(J, V.projection, z).items():
            table.setdefault((a + 1, b + 1), {})
            vaccumulate(table[(a + 1, b + 1)], c + 1, val)
    labels = ("1",) + tuple(f"f{a}" for a in range(k))
    R = ArtinAlgebra(labels, table, 0)
    rep = artin_validate(R)
    rep.subject = f"R_{m}"
    if rep.ok:
        ad = R.adapted()
        rep.add("m^(m+1) = 0", ad.nilpotency <= m + 1, {"nilpotency_index": ad.nilpotency})
    return DeformationRing(J, V, R, rep)


def inclusion_on_H0(small: JacobiComplex, big: JacobiComplex) -> SparseMatrix:
    """``H^0(J_small) -> H^0(J_big)`` induced by the inclusion of words."""
    Vs, Vb = small.cohomology(0), big.cohomology(0)
    cols = []
    for z in Vs.representatives:
        v = {big.index[0][small.keys[0][j]]: c for j, c in z.items()}
        cols.append(Vb.projection.apply(v))
    return SparseMatrix.from_columns(Vb.dim, cols)


def truncation_map(big: DeformationRing, small: DeformationRing) -> SparseMatrix:
    """Ring map ``R_big -> R_small``, dual to ``V_small -> V_big``."""
    iota = inclusion_on_H0(small.J, big.J)
    nb, ns = big.V.dim, small.V.dim
    data: Dict[int, Dict[int, Fraction]] = {0: {0: Fraction(1)}}
    for a in range(nb):
        for b, c in iota.row(a).items():
            data.setdefault(b + 1, {})[a + 1] = c
    return SparseMatrix(ns + 1, nb + 1, data)


def is_ring_hom(f: SparseMatrix, A: ArtinAlgebra, B: ArtinAlgebra) -> bool:
    e = [{i: Fraction(1)} for i in range(A.dim)]
    if f.apply(e[A.unit]) != {B.unit: Fraction(1)}:
        return False
    return all(f.apply(A.mul(e[i], e[j])) == B.mul(f.apply(e[i]), f.apply(e[j]))
               for i in range(A.dim) for j in range(A.dim))


def truncated_polynomial_match(R: ArtinAlgebra, nvars: int, top: int) -> Dict[str, object]:
    """Decide ``R ~= Q[t_1..t_n]/(t)^top`` by mapping monomials in generators of ``m/m^2``."""
    ad = R.adapted()
    A = ad.alg
    gens = [k for k, o in enumerate(ad.ord) if o == 1]
    out = {"generators": len(gens), "match": False}
    if len(gens) != nvars:
        return out
    images: List[Vector] = []
    vanish = True
    for deg in range(top + 1):
        for e in product(range(deg + 1), repeat=nvars):
            if sum(e) != deg:
                continue
            v: Vector = {0: Fraction(1)}
            for g, p in zip(gens, e):
                for _ in range(p):
                    v = A.mul(v, {g: Fraction(1)})
            if deg < top:
                images.append(v)
            elif v:
                vanish = False
    basis = len(images) == A.dim and span_rank(images, A.dim) == A.dim
    out.update({"monomials_form_basis": basis, "top_power_vanishes": vanish, "match": basis and vanish})
    return out


# ---------------------------------------------------------------------------
# obstruction


def obstruction(gm: GeometricModel) -> Dict[str, object]:
    """``S^2 H^1 -> H^2``, ``(a, b) -> class of [x_a, x_b]`` for ``a <= b``."""
    gm = _model(gm)
    C, idx = gm.L_complex()
    H = cohomology(C, [1, 2])
    H1, H2 = H[1], H[2]
    cols, pairs = [], []
    for a in range(H1.dim):
        for b in range(a, H1.dim):
            xa = {idx[1][j]: c for j, c in H1.representatives[a].items()}
            xb = {idx[1][j]: c for j, c in H1.representatives[b].items()}
            br = gm.br(xa, xb)
            local = {idx[2].index(j): c for j, c in br.items()} if br else {}
            cols.append(H2.projection.apply(local) if H2.dim else {})
            pairs.append((a, b))
    M = SparseMatrix.from_columns(H2.dim, cols)
    return {"h1": H1.dim, "h2": H2.dim, "pairs": pairs, "matrix": M, "zero": M.is_zero(),
            "h1_representatives": [_label_vec(gm.L.labels, idx[1], r) for r in H1.representatives],
            "h2_representatives": [_label_vec(gm.L.labels, idx[2], r) for r in H2.representatives]}


def _label_vec(labels, idx, v) -> Dict[str, Fraction]:
    return {labels[idx[j]]: c for j, c in sorted(v.items())}


# ---------------------------------------------------------------------------
# Poincare module


@dataclass
class PoincareModule:
    R: DeformationRing
    G: MOSModule
    P: QuasiScalar
    report: Report
    info: dict = field(default_factory=dict)


def _coaction(Jm: JacobiComplex, Pm: SparseMatrix, Ji: JacobiComplex, Jprev: JacobiComplex,
              Pprev: SparseMatrix, z: Vector) -> Dict[Tuple[int, int], Fraction]:
    """``(P_m (x) P_prev)`` of the ``(0,0)`` part of ``w (x) e -> sum l (x) (r (x) e)``, ``l`` nonempty."""
    par = parities(EXTERIOR, Ji.model.L.degrees)
    idxL, idxM = Jm.index.get(0, {}), Jprev.index.get(0, {})
    out: Dict[Tuple[int, int], Fraction] = {}
    for j, c in z.items():
        w, e = Ji.keys[0][j]
        for a in range(1, len(w) + 1):
            for s, l, r in unshuffles(w, par, a):
                if l in idxL and (r, e) in idxM:
                    pl, pr = Pm.column(idxL[l]), Pprev.column(idxM[(r, e)])
                    for x, u in pl.items():
                        for y, v in pr.items():
                            vaccumulate(out, (x, y), s * c * u * v)
    return out


def poincare_module(gm: GeometricModel, m: int) -> PoincareModule:
    gm = _model(gm)
    if gm.module is None:
        raise InvalidModelError("model has no module")
    rep = Report(f"Poincare module P_{m}")
    Jmods = [jacobi_module(gm, i) for i in range(m + 1)]
    Gs = [J.cohomology(0) for J in Jmods]
    dims = [G.dim for G in Gs]
    if m == 0:
        R = ArtinAlgebra(("1",), {(0, 0): {0: 1}}, 0)
        DR = None
        nV = 0
    else:
        DR = deformation_ring(gm, m)
        if not DR.report.ok:
            raise TowerError(f"deformation ring invalid: {[c.name for c in DR.report.failures]}")
        R = DR.ring
        nV = DR.V.dim
    ad = R.adapted()
    transitions: List[Optional[SparseMatrix]] = [None]
    symbols: List[Optional[SparseMatrix]] = [None]
    orig_actions: List[List[SparseMatrix]] = [[SparseMatrix.identity(dims[0])] + [SparseMatrix.zeros(dims[0], dims[0])] * nV]
    for i in range(1, m + 1):
        Ji, Jp = Jmods[i], Jmods[i - 1]
        # transition: inclusion of keys, then projection
        cols = []
        for z in Gs[i - 1].representatives:
            cols.append(Gs[i].projection.apply({Ji.index[0][Jp.keys[0][j]]: c for j, c in z.items()}))
        Tr = SparseMatrix.from_columns(dims[i], cols)
        transitions.append(Tr)
        # coaction in V_m coordinates
        sigV: Dict[int, Dict[int, Fraction]] = {}
        for col, z in enumerate(Gs[i].representatives):
            for (x, y), c in _coaction(DR.J, DR.V.projection, Ji, Jp, Gs[i - 1].projection, z).items():
                sigV.setdefault(x * dims[i - 1] + y, {})[col] = c
        sigV_m = SparseMatrix(nV * dims[i - 1], dims[i], sigV)
        acts = [SparseMatrix.identity(dims[i])]
        for a in range(nV):
            pick = SparseMatrix(dims[i - 1], nV * dims[i - 1], {y: {a * dims[i - 1] + y: 1} for y in range(dims[i - 1])})
            acts.append(Tr @ pick @ sigV_m)
        orig_actions.append(acts)
        # V_m coordinates -> B^i coordinates through the adapted basis
        nB = ad.n(i) - 1
        data: Dict[int, Dict[int, Fraction]] = {}
        for k in range(1, ad.alg.dim):
            for a in range(nV):
                t = ad.T[a + 1, k]
                if not t:
                    continue
                if ad.ord[k] <= i:
                    data.setdefault(k - 1, {})[a] = t
        conv = SparseMatrix(nB, nV, data)
        full = SparseMatrix(ad.alg.dim - 1, nV, {k - 1: {a: ad.T[a + 1, k] for a in range(nV) if ad.T[a + 1, k]}
                                                  for k in range(1, ad.alg.dim)})
        high = [k - 1 for k in range(1, ad.alg.dim) if ad.ord[k] > i]
        lifted = kron(full, SparseMatrix.identity(dims[i - 1])) @ sigV_m
        stray = any(r // dims[i - 1] in high for r, _, _ in lifted.triplets()) if dims[i - 1] else False
        rep.add(f"symbol {i} lands in B^{i}", not stray)
        symbols.append(kron(conv, SparseMatrix.identity(dims[i - 1])) @ sigV_m)
    actions = [ad.convert_action(a) for a in orig_actions]
    G = MOSModule(R, dims, actions, transitions, symbols, "G")
    mos = validate_mos(G)
    rep.extend(mos, "G: ")
    if not rep.ok:
        return PoincareModule(DR, G, None, rep, {"G_dims": dims})
    P = quasi_scalar(R, G, m)
    fr = freeness(R, P.actions)
    fiber = Gs[0].dim
    rep.add("P free over R", fr["free"], fr)
    # the fiber statement is about L acting trivially on M; otherwise record it only
    trivial = all(not v for v in gm.module.action.values())
    rep.add("P (x) residue = degree-0 fiber", (fr["rank"] == fiber) if trivial else None,
            {"rank": fr["rank"], "fiber": fiber, "trivial_action": trivial})
    info = {"trivial_action": trivial, "G_dims": dims, "R_dim": R.dim, "P_dim": P.dim, "rank": fr["rank"], "free": fr["free"], "fiber_dim": fiber}
    return PoincareModule(DR, G, P, rep, info)
