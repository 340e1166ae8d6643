"""Lie algebras by structure constants, representations, and DGLA models.

A :class:`GeometricModel` is a finite differential graded Lie algebra ``L``
with a graded-commutative dg algebra ``A``, an invariant pairing
``L x L -> A`` and optionally a dg-module ``M``.  All sign rules are Koszul:
an element of ``L^p`` has degree ``p``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .checks import Report
from .linalg import SparseMatrix, Vector, as_fraction, echelon, inverse, solve, vaccumulate, vadd, vscale

Table = Dict[Tuple[int, int], Vector]


def _clean_table(table: Mapping[Tuple[int, int], Mapping[int, object]]) -> Table:
    out: Table = {}
    for key, vec in table.items():
        v = {k: as_fraction(c) for k, c in vec.items() if c}
        if v:
            out[tuple(key)] = v
    return out


def bilinear(table: Table, u: Mapping[int, Fraction], v: Mapping[int, Fraction]) -> Vector:
    acc: Vector = {}
    for i, a in u.items():
        for j, b in v.items():
            t = table.get((i, j))
            if t:
                ab = a * b
                for k, c in t.items():
                    vaccumulate(acc, k, ab * c)
    return acc


def _unit(i: int) -> Vector:
    return {i: Fraction(1)}


# ---------------------------------------------------------------------------
# ungraded Lie algebras


@dataclass(frozen=True)
class LieModel:
    labels: Tuple[str, ...]
    brackets: Table = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "brackets", _clean_table(self.brackets))

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def bracket(self, u: Mapping[int, Fraction], v: Mapping[int, Fraction]) -> Vector:
        return bilinear(self.brackets, u, v)

    def bracket_basis(self, i: int, j: int) -> Vector:
        return dict(self.brackets.get((i, j), {}))

    def is_abelian(self) -> bool:
        return not self.brackets

    def as_geometric(self, rep: Optional["Representation"] = None, pairing: Optional[Table] = None) -> "GeometricModel":
        """Point model: ``L = g`` in degree 0, ``A`` the ground field."""
        L = GradedSpace(self.labels, (0,) * self.dim)
        A = GradedSpace(("1",), (0,))
        if pairing is None and rep is not None:
            pairing = {key: {0: val} for key, val in trace_pairing(rep).items()}
        M = None
        if rep is not None:
            M = DGModule(GradedSpace(rep.labels, (0,) * rep.target_dim), None,
                         {(x, j): rep.matrices[x].column(j) for x in range(self.dim) for j in range(rep.target_dim)})
        return GeometricModel(L=L, bracket=self.brackets, A=A, product={(0, 0): {0: Fraction(1)}},
                              unit=0, pairing=pairing or {}, module=M)


def validate_lie(g: LieModel) -> Report:
    rep = Report(f"lie algebra of dim {g.dim}")
    n = g.dim
    bad_anti = []
    for i in range(n):
        for j in range(i, n):
            if vadd(g.bracket_basis(i, j), g.bracket_basis(j, i)):
                bad_anti.append((g.labels[i], g.labels[j]))
    rep.add("antisymmetry", not bad_anti, bad_anti[:5] or None)
    bad_jac = []
    for i, j, k in product(range(n), repeat=3):
        if not (i < j < k):
            continue
        x, y, z = _unit(i), _unit(j), _unit(k)
        s = vadd(vadd(g.bracket(g.bracket(x, y), z), g.bracket(g.bracket(y, z), x)), g.bracket(g.bracket(z, x), y))
        if s:
            bad_jac.append((g.labels[i], g.labels[j], g.labels[k]))
    rep.add("jacobi", not bad_jac, bad_jac[:5] or None)
    return rep


@dataclass(frozen=True)
class Representation:
    lie: LieModel
    matrices: Tuple[SparseMatrix, ...]
    labels: Tuple[str, ...] = ()
    faithful: Optional[bool] = None

    def __post_init__(self):
        object.__setattr__(self, "matrices", tuple(self.matrices))
        n = self.matrices[0].rows if self.matrices else len(self.labels)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"v{i}" for i in range(n)))
        else:
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def target_dim(self) -> int:
        return len(self.labels)

    def action(self, u: Mapping[int, Fraction]) -> SparseMatrix:
        out = SparseMatrix.zeros(self.target_dim, self.target_dim)
        for i, c in u.items():
            out = out + self.matrices[i].scale(c)
        return out


def validate_rep(g: LieModel, r: Representation) -> Report:
    rep = Report(f"representation of dim {r.target_dim}")
    n = g.dim
    shapes_ok = len(r.matrices) == n and all(m.shape == (r.target_dim, r.target_dim) for m in r.matrices)
    rep.add("shapes", shapes_ok)
    if not shapes_ok:
        return rep
    bad = []
    for i in range(n):
        for j in range(i + 1, n):
            lhs = r.action(g.bracket_basis(i, j))
            rhs = r.matrices[i] @ r.matrices[j] - r.matrices[j] @ r.matrices[i]
            if lhs != rhs:
                bad.append((g.labels[i], g.labels[j]))
    rep.add("homomorphism", not bad, bad[:5] or None)
    flat = [{a * r.target_dim + b: v for a, b, v in m.triplets()} for m in r.matrices]
    kernel_dim = n - len(echelon(flat, r.target_dim ** 2)[1])
    is_faithful = kernel_dim == 0
    rep.info["faithful"] = is_faithful
    if r.faithful is None:
        rep.add("faithful", None, {"computed": is_faithful})
    else:
        rep.add("faithful", is_faithful == r.faithful, {"claimed": r.faithful, "computed": is_faithful})
    return rep


def lie_from_matrices(mats: Sequence[SparseMatrix], labels: Sequence[str]) -> Tuple[LieModel, Representation]:
    """Lie algebra spanned by ``mats`` under the commutator, with its defining representation."""
    n = mats[0].rows
    flat = SparseMatrix.from_columns(n * n, [{a * n + b: v for a, b, v in m.triplets()} for m in mats])
    brackets: Table = {}
    for i, j in product(range(len(mats)), repeat=2):
        if i == j:
            continue
        c = mats[i] @ mats[j] - mats[j] @ mats[i]
        coords = solve(flat, {a * n + b: v for a, b, v in c.triplets()})
        if coords is None:
            raise ValueError(f"span not closed under bracket at ({labels[i]}, {labels[j]})")
        if coords:
            brackets[(i, j)] = coords
    g = LieModel(tuple(labels), brackets)
    return g, Representation(g, tuple(mats), tuple(f"e{k}" for k in range(n)), True)


def _elementary(n: int, i: int, j: int) -> SparseMatrix:
    return SparseMatrix(n, n, {i: {j: 1}})


def sl_gl_of(target_dim: int, kind: str = "sl") -> Tuple[LieModel, Representation]:
    """``gl(E)`` or ``sl(E)`` for ``E`` of the given dimension, with ``E`` as representation."""
    n = target_dim
    if n < 1:
        raise ValueError("target dimension must be positive")
    mats, labels = [], []
    for i in range(n):
        for j in range(n):
            if i != j:
                mats.append(_elementary(n, i, j))
                labels.append(f"E{i}{j}")
    if kind == "gl":
        for i in range(n):
            mats.append(_elementary(n, i, i))
            labels.append(f"E{i}{i}")
    elif kind == "sl":
        for i in range(n - 1):
            mats.append(_elementary(n, i, i) - _elementary(n, i + 1, i + 1))
            labels.append(f"H{i}")
    else:
        raise ValueError(f"unknown kind {kind!r}")
    if not mats:
        return LieModel(()), Representation(LieModel(()), (), tuple(f"e{k}" for k in range(n)), None)
    return lie_from_matrices(mats, labels)


def trace_pairing(r: Representation) -> Dict[Tuple[int, int], Fraction]:
    """``(x, y) -> trace(rho(x) rho(y))`` on basis pairs."""
    out = {}
    for i, j in product(range(len(r.matrices)), repeat=2):
        t = sum((v for a, b, v in (r.matrices[i] @ r.matrices[j]).triplets() if a == b), Fraction(0))
        if t:
            out[(i, j)] = t
    return out


def sl2() -> Tuple[LieModel, Representation]:
    """sl2 in the basis (e, h, f) with its standard representation on (u, v)."""
    e = SparseMatrix(2, 2, {0: {1: 1}})
    h = SparseMatrix(2, 2, {0: {0: 1}, 1: {1: -1}})
    f = SparseMatrix(2, 2, {1: {0: 1}})
    g, r = lie_from_matrices([e, h, f], ["e", "h", "f"])
    return g, Representation(g, r.matrices, ("u", "v"), True)


def adjoint(g: LieModel) -> Representation:
    mats = []
    for x in range(g.dim):
        cols = {}
        for y in range(g.dim):
            for z, c in g.bracket_basis(x, y).items():
                cols.setdefault(z, {})[y] = c
        mats.append(SparseMatrix(g.dim, g.dim, cols))
    return Representation(g, tuple(mats), g.labels)


def trivial_rep(g: LieModel, dim: int = 1) -> Representation:
    return Representation(g, tuple(SparseMatrix.zeros(dim, dim) for _ in range(g.dim)), tuple(f"t{k}" for k in range(dim)))


# ---------------------------------------------------------------------------
# graded models


@dataclass(frozen=True)
class GradedSpace:
    labels: Tuple[str, ...]
    degrees: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "degrees", tuple(self.degrees))
        if len(self.labels) != len(self.degrees):
            raise ValueError("labels and degrees differ in length")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def in_degree(self, p: int) -> List[int]:
        return [i for i, d in enumerate(self.degrees) if d == p]

    @property
    def degree_range(self) -> List[int]:
        return sorted(set(self.degrees))

    def homogeneous_degree(self, v: Mapping[int, Fraction]) -> Optional[int]:
        ds = {self.degrees[i] for i in v}
        return ds.pop() if len(ds) == 1 else None

    def complex(self, d: Optional[SparseMatrix]):
        """The cochain complex ``(self, d)`` with blocks per degree."""
        from .linalg import ChainComplex

        degs = self.degree_range
        idx = {p: self.in_degree(p) for p in degs}
        dims = {p: len(idx[p]) for p in degs}
        diffs = {}
        if d is not None:
            for p in degs:
                if p + 1 in idx:
                    diffs[p] = d.submatrix(idx[p + 1], idx[p])
        return ChainComplex(dims, diffs), idx


@dataclass(frozen=True)
class DGModule:
    space: GradedSpace
    d: Optional[SparseMatrix]
    action: Table  # (x in L, m in M) -> M-vector

    def __post_init__(self):
        object.__setattr__(self, "action", _clean_table(self.action))

    def act(self, x: Mapping[int, Fraction], m: Mapping[int, Fraction]) -> Vector:
        return bilinear(self.action, x, m)

    def diff(self, v: Mapping[int, Fraction]) -> Vector:
        return self.d.apply(v) if self.d is not None else {}


@dataclass(frozen=True)
class GeometricModel:
    L: GradedSpace
    bracket: Table
    A: GradedSpace
    product: Table
    unit: int
    pairing: Table
    dL: Optional[SparseMatrix] = None
    dA: Optional[SparseMatrix] = None
    module: Optional[DGModule] = None
    name: str = ""

    def __post_init__(self):
        for key in ("bracket", "product", "pairing"):
            object.__setattr__(self, key, _clean_table(getattr(self, key)))

    # operations on dict vectors
    def br(self, u, v) -> Vector:
        return bilinear(self.bracket, u, v)

    def mul(self, a, b) -> Vector:
        return bilinear(self.product, a, b)

    def tr(self, u, v) -> Vector:
        return bilinear(self.pairing, u, v)

    def d_L(self, v) -> Vector:
        return self.dL.apply(v) if self.dL is not None else {}

    def d_A(self, v) -> Vector:
        return self.dA.apply(v) if self.dA is not None else {}

    def L_complex(self):
        return self.L.complex(self.dL)

    def A_complex(self):
        return self.A.complex(self.dA)

    def with_module(self, module: Optional[DGModule]) -> "GeometricModel":
        return GeometricModel(self.L, self.bracket, self.A, self.product, self.unit, self.pairing,
                              self.dL, self.dA, module, self.name)


def _sgn(k: int) -> int:
    return -1 if k % 2 else 1


def _wrong_degree(space: GradedSpace, v: Vector, want: int) -> bool:
    return any(space.degrees[k] != want for k in v)


def validate_geometric_model(gm: GeometricModel) -> Report:
    """Exhaustive basis-level check of every DGLA / dga / module / pairing axiom."""
    rep = Report(gm.name or "geometric model")
    L, A = gm.L, gm.A
    nL, nA = L.dim, A.dim
    dl, da = L.degrees, A.degrees
    eL = [_unit(i) for i in range(nL)]
    eA = [_unit(i) for i in range(nA)]

    def record(name, bad):
        rep.add(name, not bad, bad[:5] or None)

    # degrees of structure maps
    bad = [(L.labels[i], L.labels[j]) for (i, j), v in gm.bracket.items() if _wrong_degree(L, v, dl[i] + dl[j])]
    bad += [(L.labels[i],) for i in range(nL) if _wrong_degree(L, gm.d_L(eL[i]), dl[i] + 1)]
    record("L degrees", bad)
    bad = [(A.labels[i], A.labels[j]) for (i, j), v in gm.product.items() if _wrong_degree(A, v, da[i] + da[j])]
    bad += [(A.labels[i],) for i in range(nA) if _wrong_degree(A, gm.d_A(eA[i]), da[i] + 1)]
    record("A degrees", bad)
    bad = [(L.labels[i], L.labels[j]) for (i, j), v in gm.pairing.items() if _wrong_degree(A, v, dl[i] + dl[j])]
    record("pairing degrees", bad)

    # L
    record("d_L^2", [L.labels[i] for i in range(nL) if gm.d_L(gm.d_L(eL[i]))])
    bad_anti, bad_leib = [], []
    for i in range(nL):
        for j in range(nL):
            s = _sgn(dl[i] * dl[j])
            if j >= i and vadd(gm.br(eL[i], eL[j]), gm.br(eL[j], eL[i]), s):
                bad_anti.append((L.labels[i], L.labels[j]))
            lhs = gm.d_L(gm.br(eL[i], eL[j]))
            rhs = vadd(gm.br(gm.d_L(eL[i]), eL[j]), gm.br(eL[i], gm.d_L(eL[j])), _sgn(dl[i]))
            if vadd(lhs, rhs, -1):
                bad_leib.append((L.labels[i], L.labels[j]))
    record("graded antisymmetry", bad_anti)
    record("Leibniz d_L", bad_leib)
    bad = []
    for i, j, k in product(range(nL), repeat=3):
        x, y, z = eL[i], eL[j], eL[k]
        lhs = gm.br(x, gm.br(y, z))
        rhs = vadd(gm.br(gm.br(x, y), z), gm.br(y, gm.br(x, z)), _sgn(dl[i] * dl[j]))
        if vadd(lhs, rhs, -1):
            bad.append((L.labels[i], L.labels[j], L.labels[k]))
    record("graded Jacobi", bad)

    # A
    one = eA[gm.unit] if 0 <= gm.unit < nA else {}
    record("unit", [A.labels[i] for i in range(nA) if gm.mul(one, eA[i]) != eA[i] or gm.mul(eA[i], one) != eA[i]])
    record("d_A^2", [A.labels[i] for i in range(nA) if gm.d_A(gm.d_A(eA[i]))])
    bad_comm, bad_leib = [], []
    for i in range(nA):
        for j in range(nA):
            if j >= i and vadd(gm.mul(eA[i], eA[j]), gm.mul(eA[j], eA[i]), -_sgn(da[i] * da[j])):
                bad_comm.append((A.labels[i], A.labels[j]))
            lhs = gm.d_A(gm.mul(eA[i], eA[j]))
            rhs = vadd(gm.mul(gm.d_A(eA[i]), eA[j]), gm.mul(eA[i], gm.d_A(eA[j])), _sgn(da[i]))
            if vadd(lhs, rhs, -1):
                bad_leib.append((A.labels[i], A.labels[j]))
    record("graded commutativity", bad_comm)
    record("Leibniz d_A", bad_leib)
    bad = []
    for i, j, k in product(range(nA), repeat=3):
        if vadd(gm.mul(gm.mul(eA[i], eA[j]), eA[k]), gm.mul(eA[i], gm.mul(eA[j], eA[k])), -1):
            bad.append((A.labels[i], A.labels[j], A.labels[k]))
    record("associativity", bad)

    # pairing
    bad_sym, bad_inv, bad_dif = [], [], []
    for i in range(nL):
        for j in range(nL):
            if j >= i and vadd(gm.tr(eL[i], eL[j]), gm.tr(eL[j], eL[i]), -_sgn(dl[i] * dl[j])):
                bad_sym.append((L.labels[i], L.labels[j]))
            lhs = gm.d_A(gm.tr(eL[i], eL[j]))
            rhs = vadd(gm.tr(gm.d_L(eL[i]), eL[j]), gm.tr(eL[i], gm.d_L(eL[j])), _sgn(dl[i]))
            if vadd(lhs, rhs, -1):
                bad_dif.append((L.labels[i], L.labels[j]))
    for i, j, k in product(range(nL), repeat=3):
        x, y, z = eL[i], eL[j], eL[k]
        if vadd(gm.tr(gm.br(x, y), z), gm.tr(y, gm.br(x, z)), _sgn(dl[i] * dl[j])):
            bad_inv.append((L.labels[i], L.labels[j], L.labels[k]))
    record("pairing symmetry", bad_sym)
    record("pairing invariance", bad_inv)
    record("pairing/differential", bad_dif)

    M = gm.module
    if M is not None:
        nM, dm = M.space.dim, M.space.degrees
        eM = [_unit(i) for i in range(nM)]
        bad = [(L.labels[x], M.space.labels[m]) for (x, m), v in M.action.items()
               if _wrong_degree(M.space, v, dl[x] + dm[m])]
        bad += [(M.space.labels[m],) for m in range(nM) if _wrong_degree(M.space, M.diff(eM[m]), dm[m] + 1)]
        record("M degrees", bad)
        record("d_M^2", [M.space.labels[m] for m in range(nM) if M.diff(M.diff(eM[m]))])
        bad_act, bad_leib = [], []
        for i, j, m in product(range(nL), range(nL), range(nM)):
            x, y, v = eL[i], eL[j], eM[m]
            lhs = M.act(gm.br(x, y), v)
            rhs = vadd(M.act(x, M.act(y, v)), M.act(y, M.act(x, v)), -_sgn(dl[i] * dl[j]))
            if vadd(lhs, rhs, -1):
                bad_act.append((L.labels[i], L.labels[j], M.space.labels[m]))
        for i, m in product(range(nL), range(nM)):
            lhs = M.diff(M.act(eL[i], eM[m]))
            rhs = vadd(M.act(gm.d_L(eL[i]), eM[m]), M.act(eL[i], M.diff(eM[m])), _sgn(dl[i]))
            if vadd(lhs, rhs, -1):
                bad_leib.append((L.labels[i], M.space.labels[m]))
        record("module action", bad_act)
        record("Leibniz d_M", bad_leib)
    return rep


# ---------------------------------------------------------------------------
# builders


def exterior_dga(odd: Sequence[str], products: Mapping[Tuple[str, str], Mapping[str, object]],
                 top: Sequence[str], d: Optional[Mapping[str, Mapping[str, object]]] = None,
                 unit: str = "1") -> Tuple[GradedSpace, Table, Optional[SparseMatrix]]:
    """``A = Q.1 + A^1 + A^2`` with an antisymmetric product ``A^1 x A^1 -> A^2``.

    Associativity and the Leibniz rule hold automatically because ``A^3 = 0``.
    ``products`` lists ``(a, b) -> c`` for one ordering; the other is filled in.
    """
    labels = (unit,) + tuple(odd) + tuple(top)
    degrees = (0,) + (1,) * len(odd) + (2,) * len(top)
    idx = {l: k for k, l in enumerate(labels)}
    table: Table = {}
    for k in range(len(labels)):
        table[(0, k)] = {k: Fraction(1)}
        table[(k, 0)] = {k: Fraction(1)}
    for (a, b), vec in products.items():
        v = {idx[c]: as_fraction(x) for c, x in vec.items()}
        table[(idx[a], idx[b])] = v
        table[(idx[b], idx[a])] = vscale(v, -1)
    dm = None
    if d:
        dm = SparseMatrix.from_triplets(len(labels), len(labels),
                                        [(idx[t], idx[s], as_fraction(c)) for s, vec in d.items() for t, c in vec.items()])
    return GradedSpace(labels, degrees), table, dm


def tensor_model(g: LieModel, rep: Representation, A: GradedSpace, product_table: Table, unit: int,
                 dA: Optional[SparseMatrix] = None, with_module: bool = True, pairing_scale=1,
                 name: str = "") -> GeometricModel:
    """``L = g (x) A`` with bracket ``[x a, y b] = [x,y] ab`` and pairing ``trace(xy) ab``.

    With ``with_module`` the dg-module ``E (x) A`` is attached.
    """
    ng, nA = g.dim, A.dim
    L = GradedSpace(tuple(f"{g.labels[x]}*{A.labels[a]}" for x in range(ng) for a in range(nA)),
                    tuple(A.degrees[a] for x in range(ng) for a in range(nA)))
    def li(x, a):
        return x * nA + a
    br: Table = {}
    pair: Table = {}
    tp = trace_pairing(rep)
    for (x, y), xy in g.brackets.items():
        for (a, b), ab in product_table.items():
            acc: Vector = {}
            for z, c in xy.items():
                for e, c2 in ab.items():
                    vaccumulate(acc, li(z, e), c * c2)
            if acc:
                br[(li(x, a), li(y, b))] = acc
    scale = as_fraction(pairing_scale)
    for (x, y), t in tp.items():
        for (a, b), ab in product_table.items():
            pair[(li(x, a), li(y, b))] = vscale(ab, t * scale)
    dL = None
    if dA is not None:
        dL = SparseMatrix.from_triplets(L.dim, L.dim, [(li(x, i), li(x, j), v) for x in range(ng) for i, j, v in dA.triplets()])
    M = None
    if with_module:
        nE = rep.target_dim
        Ms = GradedSpace(tuple(f"{rep.labels[e]}*{A.labels[a]}" for e in range(nE) for a in range(nA)),
                         tuple(A.degrees[a] for e in range(nE) for a in range(nA)))
        act: Table = {}
        for x in range(ng):
            mat = rep.matrices[x]
            for f, e, c in mat.triplets():
                for (a, b), ab in product_table.items():
                    key = (li(x, a), e * nA + b)
                    acc = act.setdefault(key, {})
                    for k, c2 in ab.items():
                        vaccumulate(acc, f * nA + k, c * c2)
        act = {k: v for k, v in act.items() if v}
        dM = None
        if dA is not None:
            dM = SparseMatrix.from_triplets(Ms.dim, Ms.dim, [(e * nA + i, e * nA + j, v) for e in range(nE) for i, j, v in dA.triplets()])
        M = DGModule(Ms, dM, act)
    return GeometricModel(L, br, A, product_table, unit, pair, dL, dA, M, name)


def symplectic_fixture() -> GeometricModel:
    """sl2 (x) <1; a, b; w> with ab = -ba = w and zero differentials."""
    g, r = sl2()
    A, table, _ = exterior_dga(["a", "b"], {("a", "b"): {"w": 1}}, ["w"])
    return tensor_model(g, r, A, table, 0, name="sl2 (x) <1;a,b;w>")


def abelian_fixture(h1: int = 2, with_module: bool = True) -> GeometricModel:
    """Abelian L concentrated in degree 1 (dim ``h1``), zero differential, A = Q."""
    L = GradedSpace(tuple(f"t{k}" for k in range(h1)), (1,) * h1)
    A = GradedSpace(("1",), (0,))
    M = None
    if with_module:
        M = DGModule(GradedSpace(("m0", "m1"), (0, 0)), None, {})
    return GeometricModel(L, {}, A, {(0, 0): {0: 1}}, 0, {}, module=M, name=f"abelian degree-1 dim {h1}")


# ---------------------------------------------------------------------------
# change of basis


def _transport(table: Table, P1: SparseMatrix, P2: SparseMatrix, Qinv: SparseMatrix) -> Table:
    """Structure constants of ``table`` in the bases given by the columns of ``P1``, ``P2``."""
    cols1, cols2 = P1.columns(), P2.columns()
    out: Table = {}
    for i, u in enumerate(cols1):
        for j, v in enumerate(cols2):
            w = Qinv.apply(bilinear(table, u, v))
            if w:
                out[(i, j)] = w
    return out


def _conjugate(d: Optional[SparseMatrix], P: SparseMatrix, Pinv: SparseMatrix) -> Optional[SparseMatrix]:
    return None if d is None else Pinv @ d @ P


def change_basis(gm: GeometricModel, PL: SparseMatrix, PA: SparseMatrix, PM: Optional[SparseMatrix] = None) -> GeometricModel:
    """Rewrite ``gm`` in new bases whose vectors are the columns of ``PL``, ``PA``, ``PM``.

    Each matrix must be invertible and must not mix degrees; ``PA`` must fix the unit.
    """
    for P, space in ((PL, gm.L), (PA, gm.A)) + (((PM, gm.module.space),) if gm.module is not None else ()):
        if any(space.degrees[r] != space.degrees[c] for r, c, _ in P.triplets()):
            raise ValueError("basis change mixes degrees")
    if PA.column(gm.unit) != {gm.unit: Fraction(1)}:
        raise ValueError("basis change moves the unit")
    Li, Ai = inverse(PL), inverse(PA)
    module = None
    if gm.module is not None:
        M = gm.module
        PM = PM if PM is not None else SparseMatrix.identity(M.space.dim)
        Mi = inverse(PM)
        module = DGModule(M.space, _conjugate(M.d, PM, Mi), _transport(M.action, PL, PM, Mi))
    return GeometricModel(gm.L, _transport(gm.bracket, PL, PL, Li), gm.A, _transport(gm.product, PA, PA, Ai), gm.unit,
                          _transport(gm.pairing, PL, PL, Ai), _conjugate(gm.dL, PL, Li), _conjugate(gm.dA, PA, Ai),
                          module, gm.name)


def random_graded_basis(space: GradedSpace, rng, fixed: Sequence[int] = (), lo: int = -2, hi: int = 2) -> SparseMatrix:
    """A random invertible integer matrix preserving degrees; columns in ``fixed`` stay standard."""
    n = space.dim
    while True:
        data: Dict[int, Dict[int, Fraction]] = {}
        for c in range(n):
            if c in fixed:
                data.setdefault(c, {})[c] = Fraction(1)
                continue
            for r in space.in_degree(space.degrees[c]):
                v = rng.randint(lo, hi)
                if v:
                    data.setdefault(r, {})[c] = Fraction(v)
        P = SparseMatrix(n, n, data)
        if P.rank() == n:
            return P


def random_basis_change(gm: GeometricModel, rng) -> GeometricModel:
    PL = random_graded_basis(gm.L, rng)
    PA = random_graded_basis(gm.A, rng, fixed=(gm.unit,))
    PM = random_graded_basis(gm.module.space, rng) if gm.module is not None else None
    return change_basis(gm, PL, PA, PM)
