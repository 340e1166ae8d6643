"""The trace 2-form on H^1 of a geometric model and its closedness.

``tau(x, y)`` is the H^2(A)-class of ``tr(x, y)`` for degree-1 cocycles.
Closedness is computed twice:

* through the chain composite ``sigma^3 L -> J_1(L, sigma^2 L) -> J_1(L, A) -> A``;
* by differentiating ``tau`` along a second-order Kuranishi family
  ``xi(t) = sum t_i x_i + 1/2 sum t_i t_j Q_ij`` with ``dQ_ij = -[x_i, x_j]``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Dict, List, Optional, Sequence, Tuple

from .checks import Report
from .jacobi import JacobiComplex, _build, _model
from .lie import DGModule, GeometricModel, GradedSpace, exterior_dga, sl_gl_of, tensor_model
from .linalg import (ChainComplex, SparseMatrix, Vector, cohomology, cohomology_at, determinant, solve, vaccumulate, vadd,
                     vscale)
from .multilinear import SYMMETRIC, normalize, parities, unshuffles, words

Word = Tuple[int, ...]


# ---------------------------------------------------------------------------
# symmetric powers of L as complexes and modules


class SymPower:
    """``sigma^k L``: graded symmetric words of length ``k`` with the Leibniz differential."""

    def __init__(self, gm: GeometricModel, k: int):
        self.gm, self.k = gm, k
        self.deg = gm.L.degrees
        self.par = parities(SYMMETRIC, self.deg)
        self.words = words(self.par, k)
        self.index = {w: j for j, w in enumerate(self.words)}
        self._dL = [gm.d_L({i: Fraction(1)}) for i in range(gm.L.dim)]

    def degree(self, w: Word) -> int:
        return sum(self.deg[a] for a in w)

    def d(self, w: Word) -> Dict[Word, Fraction]:
        out: Dict[Word, Fraction] = {}
        before = 0
        for j, x in enumerate(w):
            sg = -1 if before % 2 else 1
            for y, c in self._dL[x].items():
                s, nw = normalize(w[:j] + (y,) + w[j + 1:], self.par)
                if s:
                    vaccumulate(out, nw, sg * s * c)
            before += self.par[x]
        return out

    def complex(self) -> Tuple[ChainComplex, Dict[int, List[Word]]]:
        keys: Dict[int, List[Word]] = {}
        for w in self.words:
            keys.setdefault(self.degree(w), []).append(w)
        pos = {n: {w: j for j, w in enumerate(ws)} for n, ws in keys.items()}
        diffs = {}
        for n, ws in keys.items():
            if n + 1 in keys:
                cols = [{pos[n + 1][v]: c for v, c in self.d(w).items()} for w in ws]
                diffs[n] = SparseMatrix.from_columns(len(keys[n + 1]), cols)
        return ChainComplex({n: len(ws) for n, ws in keys.items()}, diffs), keys

    def product_of(self, vecs: Sequence[Vector]) -> Dict[Word, Fraction]:
        out: Dict[Word, Fraction] = {(): Fraction(1)}
        for v in vecs:
            nxt: Dict[Word, Fraction] = {}
            for w, a in out.items():
                for x, b in v.items():
                    s, nw = normalize(w + (x,), self.par)
                    if s:
                        vaccumulate(nxt, nw, s * a * b)
            out = nxt
        return out


def sigma2_module(gm: GeometricModel) -> DGModule:
    """``sigma^2 L`` with ``z.(xy) = [z,x]y + (-1)^(|z||x|) x[z,y]``."""
    S = SymPower(gm, 2)
    deg, par = S.deg, S.par
    act: Dict[Tuple[int, int], Vector] = {}
    for z in range(gm.L.dim):
        for (x, y) in S.words:
            out: Vector = {}
            for k, c in gm.br({z: Fraction(1)}, {x: Fraction(1)}).items():
                s, nw = normalize((k, y), par)
                if s:
                    vaccumulate(out, S.index[nw], s * c)
            sg = -1 if (deg[z] * deg[x]) % 2 else 1
            for k, c in gm.br({z: Fraction(1)}, {y: Fraction(1)}).items():
                s, nw = normalize((x, k), par)
                if s:
                    vaccumulate(out, S.index[nw], sg * s * c)
            if out:
                act[(z, S.index[(x, y)])] = out
    d = SparseMatrix.from_columns(len(S.words), [{S.index[v]: c for v, c in S.d(w).items()} for w in S.words])
    labels = tuple(f"{gm.L.labels[a]}.{gm.L.labels[b]}" for a, b in S.words)
    return DGModule(GradedSpace(labels, tuple(S.degree(w) for w in S.words)), d, act)


def trivial_A_module(gm: GeometricModel) -> DGModule:
    return DGModule(gm.A, gm.dA, {})


# ---------------------------------------------------------------------------
# tau


@dataclass
class TraceForm:
    h1: int
    h2A: int
    matrix: List[List[Vector]]          # [a][b] -> H^2(A) coordinates
    h1_reps: List[Vector]               # L-coordinates
    h2A_reps: List[Vector]              # A-coordinates
    report: Report

    def to_json(self, gm: GeometricModel) -> dict:
        return {"h1": self.h1, "h2A": self.h2A,
                "h1_representatives": [_labelled(gm.L.labels, r) for r in self.h1_reps],
                "h2A_representatives": [_labelled(gm.A.labels, r) for r in self.h2A_reps],
                "tau": [[_coords(self.matrix[a][b], self.h2A) for b in range(self.h1)] for a in range(self.h1)],
                "checks": self.report.to_json()["checks"]}


def _labelled(labels, v: Vector) -> Dict[str, str]:
    return {labels[k]: str(c) for k, c in sorted(v.items())}


def _coords(v: Vector, n: int) -> List[str]:
    return [str(v.get(k, Fraction(0))) for k in range(n)]


class _Cohomology:
    """Cohomology of ``L`` and ``A`` in the degrees the trace form needs, in global coordinates."""

    def __init__(self, gm: GeometricModel):
        CL, iL = gm.L_complex()
        CA, iA = gm.A_complex()
        self.iL, self.iA = iL, iA
        self.HL = cohomology(CL, [1, 2]) if 1 in iL else {}
        self.HA = cohomology(CA, [2, 3]) if 2 in iA else {}
        self.CL = CL

    def h1_reps(self) -> List[Vector]:
        if 1 not in self.HL:
            return []
        return [{self.iL[1][j]: c for j, c in r.items()} for r in self.HL[1].representatives]

    @property
    def h2A(self) -> int:
        return self.HA[2].dim if 2 in self.HA else 0

    def h2A_reps(self) -> List[Vector]:
        if 2 not in self.HA:
            return []
        return [{self.iA[2][j]: c for j, c in r.items()} for r in self.HA[2].representatives]

    def project_A2(self, v: Vector) -> Vector:
        if not self.h2A:
            return {}
        pos = {g: j for j, g in enumerate(self.iA[2])}
        bad = [k for k in v if k not in pos]
        if bad:
            raise ValueError("vector is not concentrated in A^2")
        return self.HA[2].projection.apply({pos[k]: c for k, c in v.items()})

    def project_A3(self, v: Vector) -> Optional[Vector]:
        if 3 not in self.iA:
            return None
        pos = {g: j for j, g in enumerate(self.iA[3])}
        return self.HA[3].projection.apply({pos[k]: c for k, c in v.items()})


def _tau_matrix(gm: GeometricModel, H: _Cohomology, reps: Sequence[Vector]) -> List[List[Vector]]:
    return [[H.project_A2(gm.tr(x, y)) for y in reps] for x in reps]


def tau(gm: GeometricModel, rng: Optional[random.Random] = None, validated: bool = False) -> TraceForm:
    gm = gm if validated else _model(gm)
    rep = Report("trace form")
    H = _Cohomology(gm)
    reps = H.h1_reps()
    M = _tau_matrix(gm, H, reps)
    n = len(reps)
    alt = all(not M[a][a] for a in range(n)) and all(vadd(M[a][b], M[b][a]) == {} for a in range(n) for b in range(n))
    rep.add("alternating", alt)
    # perturb representatives by coboundaries of degree-0 elements
    rng = rng or random.Random(0)
    L0 = gm.L.in_degree(0)
    same = True
    if L0 and gm.dL is not None and n:
        for _ in range(3):
            pert = []
            for x in reps:
                y = {k: Fraction(rng.randint(-3, 3)) for k in L0}
                pert.append(vadd(x, gm.d_L({k: c for k, c in y.items() if c})))
            if _tau_matrix(gm, H, pert) != M:
                same = False
        rep.add("independent of representatives", same)
    else:
        rep.add("independent of representatives", None, "no degree-0 coboundaries")
    return TraceForm(n, H.h2A, M, reps, H.h2A_reps(), rep)


# ---------------------------------------------------------------------------
# module-map check


def module_map_check(gm: GeometricModel, matrices: Optional[Sequence[SparseMatrix]] = None,
                     rng: Optional[random.Random] = None, fuzz: int = 20) -> Report:
    """``tr`` kills the L-action on ``sigma^2 L``; with matrices, also ``2 tr(A(BC) - (BC)A) = 0``."""
    rep = Report("trace is a module map")
    S = SymPower(gm, 2)
    deg = S.deg
    bad = []
    for z in range(gm.L.dim):
        for (x, y) in S.words:
            ez, ex, ey = {z: Fraction(1)}, {x: Fraction(1)}, {y: Fraction(1)}
            sg = -1 if (deg[z] * deg[x]) % 2 else 1
            val = vadd(gm.tr(gm.br(ez, ex), ey), gm.tr(ex, gm.br(ez, ey)), sg)
            if val:
                bad.append((gm.L.labels[z], gm.L.labels[x], gm.L.labels[y]))
    rep.add("tr o action = 0 on sigma^2 L", not bad, bad[:5] or None)
    if matrices:
        def tr2(P, Q, R):
            BC = Q @ R
            X = P @ BC - BC @ P
            return 2 * sum((X[i, i] for i in range(X.shape[0])), Fraction(0))
        bad = [t for t in product(range(len(matrices)), repeat=3) if tr2(*(matrices[i] for i in t))]
        rep.add("2 tr(A(BC) - (BC)A) = 0 on basis triples", not bad, bad[:5] or None)
        rng = rng or random.Random(0)
        n = matrices[0].shape[0]
        bad = []
        for _ in range(fuzz):
            mats = []
            for _ in range(3):
                dense = [[Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(n)] for _ in range(n)]
                t = sum((dense[i][i] for i in range(n)), Fraction(0))
                dense[n - 1][n - 1] -= t
                mats.append(SparseMatrix.from_dense(dense))
            if tr2(*mats):
                bad.append([m.to_dense() for m in mats])
        rep.add("2 tr(A(BC) - (BC)A) = 0 on random traceless triples", not bad, bad[:1] or None)
    return rep


# ---------------------------------------------------------------------------
# d tau through the chain composite


@dataclass
class DTau:
    triples: List[Tuple[int, int, int]]
    composite: List[Vector]            # H^2(A) coordinates per triple
    oracle: List[Vector]
    report: Report
    info: dict

    @property
    def zero(self) -> bool:
        return not any(self.composite) and not any(self.oracle)


class Composite:
    """The three chain maps ``iota``, ``Tr`` and ``pi`` on explicit bases."""

    def __init__(self, gm: GeometricModel):
        self.gm = gm
        self.S2 = SymPower(gm, 2)
        self.S3 = SymPower(gm, 3)
        self.J2 = _build(gm.with_module(sigma2_module(gm)), 1, True)
        self.JA = _build(gm.with_module(trivial_A_module(gm)), 1, True)
        self._H: Dict[int, object] = {}

    def iota(self, w: Word) -> Dict[Tuple[Word, int], Fraction]:
        """``xyz -> (-1)^|w| sum +- x (x) yz`` into the length-one layer."""
        sg = -1 if self.S3.degree(w) % 2 else 1
        out: Dict[Tuple[Word, int], Fraction] = {}
        for s0, (x,), rest in unshuffles(w, self.S3.par, 1):
            vaccumulate(out, ((x,), self.S2.index[rest]), Fraction(sg * s0))
        return out

    def trace(self, v: Dict[Tuple[Word, int], Fraction]) -> Dict[Tuple[Word, int], Fraction]:
        out: Dict[Tuple[Word, int], Fraction] = {}
        for (w, k), c in v.items():
            x, y = self.S2.words[k]
            for a, t in self.gm.tr({x: Fraction(1)}, {y: Fraction(1)}).items():
                vaccumulate(out, (w, a), c * t)
        return out

    @staticmethod
    def pi(v: Dict[Tuple[Word, int], Fraction]) -> Vector:
        out: Vector = {}
        for (w, a), c in v.items():
            if not w:
                vaccumulate(out, a, c)
        return out

    @staticmethod
    def _D(J: JacobiComplex, v: Dict[Tuple[Word, int], Fraction]) -> Dict[Tuple[Word, int], Fraction]:
        out: Dict = {}
        if "_where" not in J.__dict__:
            J.__dict__["_where"] = {k: n for n, idx in J.index.items() for k in idx}
            J.__dict__["_cols"] = {}
        where, cols = J.__dict__["_where"], J.__dict__["_cols"]
        for key, c in v.items():
            n = where[key]
            if n not in cols:
                cols[n] = J.complex.diff(n).columns()
            col = cols[n][J.index[n][key]]
            for r, c2 in col.items():
                vaccumulate(out, J.keys[n + 1][r], c * c2)
        return out

    def checks(self) -> Report:
        rep = Report("d tau composite")
        gm = self.gm
        bad_iota, bad_h = [], []
        for w in self.S3.words:
            img = self.iota(w)
            lhs = self._D(self.J2, img)
            rhs: Dict = {}
            for v, c in self.S3.d(w).items():
                for key, c2 in self.iota(v).items():
                    vaccumulate(rhs, key, c * c2)
            if lhs != rhs:
                bad_iota.append(w)
            if any(not key[0] for key in lhs):
                bad_h.append(w)
        lab = gm.L.labels
        rep.add("iota is a chain map", not bad_iota, [[lab[a] for a in w] for w in bad_iota[:3]] or None)
        rep.add("horizontal differential vanishes on sigma^3", not bad_h, [[lab[a] for a in w] for w in bad_h[:3]] or None)
        bad_tr = []
        for n, ks in sorted(self.J2.keys.items()):
            for key in ks:
                lhs = self.trace(self._D(self.J2, {key: Fraction(1)}))
                rhs = self._D(self.JA, self.trace({key: Fraction(1)}))
                if lhs != rhs:
                    bad_tr.append(key)
        rep.add("Tr is a chain map", not bad_tr, [str(k) for k in bad_tr[:3]] or None)
        # pi is a chain map because the action on A is trivial
        bad_pi = []
        for n, ks in sorted(self.JA.keys.items()):
            for key in ks:
                lhs = self.pi(self._D(self.JA, {key: Fraction(1)}))
                rhs = gm.d_A(self.pi({key: Fraction(1)}))
                if lhs != rhs:
                    bad_pi.append(key)
        rep.add("pi is a chain map", not bad_pi, [str(k) for k in bad_pi[:3]] or None)
        # bottom row: L (x) A -> J_1(L, A) -> A composes to zero
        bottom = [self.pi({((x,), a): Fraction(1)}) for x in range(gm.L.dim) for a in range(gm.A.dim)]
        rep.add("bottom arrows compose to zero", not any(bottom))
        full = [self.pi(self.trace(self.iota(w))) for w in self.S3.words]
        rep.add("pi o Tr o iota = 0 at chain level", not any(full))
        return rep

    def apply(self, w_vec: Dict[Word, Fraction]) -> Vector:
        chain: Dict = {}
        for w, c in w_vec.items():
            for key, c2 in self.iota(w).items():
                vaccumulate(chain, key, c * c2)
        return self.pi(self.trace(chain))

    def intermediate_class(self, w_vec: Dict[Word, Fraction]) -> Vector:
        """Class of ``Tr o iota`` in ``H^2`` of ``J_1(L, A)``."""
        chain: Dict = {}
        for w, c in w_vec.items():
            for key, c2 in self.iota(w).items():
                vaccumulate(chain, key, c * c2)
        chain = self.trace(chain)
        if not chain:
            return {}
        n = self.JA.degree_of(next(iter(chain)))
        H = self._H.get(n)
        if H is None:
            H = self._H[n] = cohomology_at(self.JA.complex, n)
        return H.projection.apply({self.JA.index[n][k]: c for k, c in chain.items()}) if H.dim else {}


def _kuranishi(gm: GeometricModel, reps: Sequence[Vector]) -> Tuple[Dict[Tuple[int, int], Vector], List[Tuple[int, int]]]:
    """Second-order corrections ``Q_ij`` with ``d Q_ij = -[x_i, x_j]``; unsolvable pairs are listed."""
    L1, L2 = gm.L.in_degree(1), gm.L.in_degree(2)
    pos2 = {g: j for j, g in enumerate(L2)}
    dmat = SparseMatrix.from_columns(len(L2), [{pos2[k]: c for k, c in gm.d_L({g: Fraction(1)}).items()} for g in L1])
    Q, unsolved = {}, []
    for i, j in product(range(len(reps)), repeat=2):
        if j < i:
            Q[(i, j)] = Q[(j, i)]
            continue
        rhs = {pos2[k]: -c for k, c in gm.br(reps[i], reps[j]).items()}
        sol = solve(dmat, rhs) if rhs else {}
        if sol is None:
            unsolved.append((i, j))
            sol = {}
        Q[(i, j)] = {L1[k]: c for k, c in sol.items()}
    return Q, unsolved


def dtau(gm: GeometricModel, validated: bool = False) -> DTau:
    gm = gm if validated else _model(gm)
    H = _Cohomology(gm)
    reps = H.h1_reps()
    comp = Composite(gm)
    rep = comp.checks()
    triples = list(combinations(range(len(reps)), 3))
    composite, inter = [], []
    for (i, j, k) in triples:
        w = comp.S3.product_of([reps[i], reps[j], reps[k]])
        composite.append(H.project_A2(comp.apply(w)))
        inter.append(comp.intermediate_class(w))
    Q, unsolved = _kuranishi(gm, reps)

    def dt(i, j, k):  # d_i tau_jk at t = 0
        return H.project_A2(vadd(gm.tr(Q[(i, j)], reps[k]), gm.tr(reps[j], Q[(i, k)])))

    oracle = []
    for (i, j, k) in triples:
        v = vadd(vadd(dt(i, j, k), dt(j, i, k), -1), dt(k, i, j))
        oracle.append(v)
    rep.add("d tau = 0 via composite", not any(composite))
    rep.add("d tau = 0 via Kuranishi expansion", not any(oracle))
    rep.add("composite agrees with oracle", composite == oracle)
    # the bracket expansion of the trace pairing lands in degree 3 of A
    expansion = []
    for (i, j, k) in triples:
        x, y, z = reps[i], reps[j], reps[k]
        v = vadd(vadd(vscale(gm.tr(gm.br(x, y), z), -1), gm.tr(gm.br(x, z), y)), gm.tr(gm.br(y, z), x), -1)
        expansion.append(v)
    A3 = [H.project_A3(v) for v in expansion] if 3 in H.iA else None
    info = {"h1": len(reps), "unsolved_second_order": [list(p) for p in unsolved],
            "obstructed": bool(unsolved),
            "intermediate_class_dims": [len(v) for v in inter],
            "bracket_expansion_degree3": [_labelled(gm.A.labels, v) for v in expansion],
            "bracket_expansion_H3": None if A3 is None else [[str(c) for _, c in sorted(v.items())] for v in A3]}
    return DTau(triples, composite, oracle, rep, info)


# ---------------------------------------------------------------------------
# scalar forms


def eta_scalar_form(tf: TraceForm, eta: Sequence) -> List[List[Fraction]]:
    if len(eta) != tf.h2A:
        raise ValueError(f"eta has {len(eta)} coordinates, H^2(A) has dimension {tf.h2A}")
    eta = [Fraction(e) for e in eta]
    return [[sum((eta[k] * c for k, c in tf.matrix[a][b].items()), Fraction(0)) for b in range(tf.h1)] for a in range(tf.h1)]


def pfaffian(M: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(M)
    if n % 2:
        return Fraction(0)

    @lru_cache(maxsize=None)
    def pf(idx: Tuple[int, ...]) -> Fraction:
        if not idx:
            return Fraction(1)
        i0, rest = idx[0], idx[1:]
        total = Fraction(0)
        for pos, j in enumerate(rest):
            a = M[i0][j]
            if a:
                sub = rest[:pos] + rest[pos + 1:]
                total += (-1) ** pos * a * pf(sub)
        return total

    return pf(tuple(range(n)))


def nondegeneracy(S: Sequence[Sequence[Fraction]]) -> Dict[str, object]:
    n = len(S)
    det = determinant(SparseMatrix.from_dense(S)) if n else Fraction(1)
    alt = all(S[a][b] == -S[b][a] for a in range(n) for b in range(n))
    out = {"dim": n, "alternating": alt, "determinant": str(det), "nondegenerate": det != 0}
    if n % 2 == 0:
        pf = pfaffian(S)
        out["pfaffian"] = str(pf)
        out["pfaffian_squared_is_det"] = pf * pf == det
    return out


def trace_form_report(gm: GeometricModel, eta: Optional[Sequence] = None,
                      matrices: Optional[Sequence[SparseMatrix]] = None) -> Tuple[Report, dict]:
    gm = _model(gm)
    rep = Report(gm.name or "trace form")
    rep.extend(module_map_check(gm, matrices))
    tf = tau(gm, validated=True)
    rep.extend(tf.report, "tau ")
    dt = dtau(gm, validated=True)
    rep.extend(dt.report)
    data = {"tau": tf.to_json(gm), "dtau": {"triples": [list(t) for t in dt.triples],
                                            "composite": [_coords(v, tf.h2A) for v in dt.composite],
                                            "oracle": [_coords(v, tf.h2A) for v in dt.oracle], **dt.info}}
    if eta is None:
        eta = [1] * tf.h2A
    S = eta_scalar_form(tf, eta)
    nd = nondegeneracy(S)
    rep.add("scalar form alternating", nd["alternating"])
    if "pfaffian_squared_is_det" in nd:
        rep.add("pfaffian squared equals determinant", nd["pfaffian_squared_is_det"])
    data["eta"] = [str(Fraction(e)) for e in eta]
    data["scalar_form"] = [[str(c) for c in row] for row in S]
    data["nondegeneracy"] = nd
    return rep, data


# ---------------------------------------------------------------------------
# fuzzed invariant-pairing models


def random_model(rng: random.Random, name: str = "") -> Tuple[GeometricModel, List[SparseMatrix]]:
    """``g (x) A`` with ``A = Q + A^1 + A^2`` random; ``d: A^1 -> A^2`` random (possibly zero)."""
    g, r = sl_gl_of(2, rng.choice(["sl", "gl"]))
    n_odd, n_top = rng.randint(2, 3), rng.randint(1, 2)
    odd = [f"a{i}" for i in range(n_odd)]
    top = [f"w{i}" for i in range(n_top)]
    prods = {}
    for i, j in combinations(range(n_odd), 2):
        v = {top[k]: Fraction(rng.randint(-3, 3)) for k in range(n_top)}
        prods[(odd[i], odd[j])] = {k: c for k, c in v.items() if c}
    d = None
    if n_top == 2 and rng.random() < 0.5:
        # rank-one differential into w0 keeps H^2(A) nonzero
        d = {odd[i]: {top[0]: rng.randint(-2, 2)} for i in range(n_odd)}
        d = {a: {k: c for k, c in v.items() if c} for a, v in d.items()}
        d = {a: v for a, v in d.items() if v} or None
    A, table, dA = exterior_dga(odd, prods, top, d)
    scale = Fraction(rng.choice([1, -1, 2, 3]), rng.choice([1, 2, 5]))
    gm = tensor_model(g, r, A, table, 0, dA=dA, with_module=False, pairing_scale=scale,
                      name=name or "random invariant-pairing model")
    return gm, list(r.matrices)
