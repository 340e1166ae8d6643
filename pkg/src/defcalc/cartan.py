"""Cartan-formula calculus: first-order operators on forms and the splitting phi_i.

Two layers live here.

* :class:`LieRinehartModel` is a finite algebra ``A`` (basis + product table)
  with operators given by matrices; :func:`validate_lr` checks that they are
  derivations and that their span is closed under the commutator.
* The calculus itself runs on the polynomial ring ``Q[x_1..x_k]`` with
  ``T`` free on the coordinate fields ``d_1..d_k``.  Forms use the
  determinant convention ``dx_J(d_J) = 1``; identities are verified on
  spanning sets of bounded degree.

A first-order operator ``P: Omega^i -> A`` is stored as ``(sigma, p)`` with
``P(f dx_J) = sum_k sigma[k, J] d_k f + p[J] f``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .checks import Report
from .linalg import SparseMatrix, Vector, as_fraction, kernel_basis, same_span, solve, span_rank, vaccumulate

Mono = Tuple[int, ...]
Poly = Dict[Mono, Fraction]
Field = Tuple[Poly, ...]
Subset = Tuple[int, ...]


# ---------------------------------------------------------------------------
# finite Lie-Rinehart models


@dataclass(frozen=True)
class LieRinehartModel:
    a_labels: Tuple[str, ...]
    a_table: Dict[Tuple[int, int], Vector]
    unit: int
    t_labels: Tuple[str, ...]
    operators: Tuple[SparseMatrix, ...]     # each acts on A (columns = images of basis vectors)

    @property
    def dim_a(self) -> int:
        return len(self.a_labels)

    def mul(self, u: Mapping[int, Fraction], v: Mapping[int, Fraction]) -> Vector:
        out: Vector = {}
        for i, a in u.items():
            for j, b in v.items():
                for k, c in self.a_table.get((i, j), {}).items():
                    vaccumulate(out, k, a * b * c)
        return out


def validate_lr(m: LieRinehartModel) -> Report:
    rep = Report("Lie-Rinehart model")
    n = m.dim_a
    shapes = all(D.shape == (n, n) for D in m.operators)
    rep.add("shapes", shapes)
    if not shapes:
        return rep
    e = [{i: Fraction(1)} for i in range(n)]
    bad = []
    for t, D in enumerate(m.operators):
        for i in range(n):
            for j in range(i, n):
                lhs = D.apply(m.mul(e[i], e[j]))
                rhs = m.mul(D.apply(e[i]), e[j])
                for k, c in m.mul(e[i], D.apply(e[j])).items():
                    vaccumulate(rhs, k, c)
                if lhs != rhs:
                    bad.append((m.t_labels[t], m.a_labels[i], m.a_labels[j]))
    rep.add("Leibniz", not bad, bad[:5] or None)
    flat = [{r * n + c: v for r, c, v in D.triplets()} for D in m.operators]
    F = SparseMatrix.from_columns(n * n, flat)
    bad, table = [], {}
    for s in range(len(m.operators)):
        for t in range(s + 1, len(m.operators)):
            C = m.operators[s] @ m.operators[t] - m.operators[t] @ m.operators[s]
            x = solve(F, {r * n + c: v for r, c, v in C.triplets()})
            if x is None:
                bad.append((m.t_labels[s], m.t_labels[t]))
            elif x:
                table[(m.t_labels[s], m.t_labels[t])] = {m.t_labels[k]: v for k, v in sorted(x.items())}
    rep.add("bracket closure", not bad, bad[:5] or None)
    rep.info["brackets"] = table
    # A-module structure: a.D = L_a D, expressed in T when possible
    amod = {}
    for a in range(n):
        La = SparseMatrix.from_columns(n, [m.mul(e[a], e[j]) for j in range(n)])
        for t, D in enumerate(m.operators):
            P = La @ D
            x = solve(F, {r * n + c: v for r, c, v in P.triplets()})
            amod[(m.a_labels[a], m.t_labels[t])] = None if x is None else {m.t_labels[k]: v for k, v in sorted(x.items())}
    rep.info["a_module"] = amod
    return rep


def truncated_lr(nvars: int, top: int, names: Sequence[str] = ("x", "y", "z"), min_degree: int = 0) -> LieRinehartModel:
    """``Q[x..]/(x..)^top`` with operators ``x^a d_j`` for monomials with ``min_degree <= |a| < top``.

    With ``min_degree = 0`` the coordinate fields are included; they are not
    derivations of the truncated ring.  ``min_degree = 1`` gives derivations.
    """
    from .artin import truncated_polynomial

    S = truncated_polynomial(nvars, top, names)
    monos: List[Mono] = []
    for deg in range(top):
        monos.extend(sorted((e for e in product(range(deg + 1), repeat=nvars) if sum(e) == deg), reverse=True))
    idx = {e: k for k, e in enumerate(monos)}
    ops, labels = [], []
    for a in monos:
        if sum(a) < min_degree:
            continue
        for j in range(nvars):
            data: Dict[int, Dict[int, Fraction]] = {}
            for col, e in enumerate(monos):
                if e[j] == 0:
                    continue
                img = tuple(ei + ai - (1 if k == j else 0) for k, (ei, ai) in enumerate(zip(e, a)))
                if img in idx:
                    data.setdefault(idx[img], {})[col] = Fraction(e[j])
            ops.append(SparseMatrix(len(monos), len(monos), data))
            coeff = S.labels[idx[a]]
            labels.append(("" if coeff == "1" else coeff) + f"d{names[j]}")
    return LieRinehartModel(S.labels, S.table, 0, tuple(labels), tuple(ops))


# ---------------------------------------------------------------------------
# polynomials and vector fields


def padd(a: Poly, b: Poly, c=1) -> Poly:
    out = dict(a)
    for k, v in b.items():
        vaccumulate(out, k, c * v)
    return out


def pmul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for e, x in a.items():
        for f, y in b.items():
            vaccumulate(out, tuple(i + j for i, j in zip(e, f)), x * y)
    return out


def pderiv(a: Poly, k: int) -> Poly:
    out: Poly = {}
    for e, x in a.items():
        if e[k]:
            vaccumulate(out, e[:k] + (e[k] - 1,) + e[k + 1:], x * e[k])
    return out


def monomial(e: Sequence[int], c=1) -> Poly:
    return {tuple(e): as_fraction(c)}


def const(nvars: int, c=1) -> Poly:
    return {(0,) * nvars: as_fraction(c)} if c else {}


def apply_field(v: Field, f: Poly) -> Poly:
    out: Poly = {}
    for k, vk in enumerate(v):
        out = padd(out, pmul(vk, pderiv(f, k)))
    return out


def field_bracket(u: Field, v: Field) -> Field:
    return tuple(padd(apply_field(u, v[j]), apply_field(v, u[j]), -1) for j in range(len(u)))


def coordinate_field(nvars: int, j: int, coeff: Optional[Poly] = None) -> Field:
    c = const(nvars) if coeff is None else coeff
    return tuple(c if k == j else {} for k in range(nvars))


def scale_field(a: Poly, v: Field) -> Field:
    return tuple(pmul(a, vk) for vk in v)


def monomials_upto(nvars: int, deg: int) -> List[Mono]:
    out = []
    for d in range(deg + 1):
        out.extend(sorted((e for e in product(range(d + 1), repeat=nvars) if sum(e) == d), reverse=True))
    return out


# ---------------------------------------------------------------------------
# forms


Form = Dict[Subset, Poly]


def _perm_sign(p: Sequence[int]) -> int:
    s = 1
    p = list(p)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


def sort_wedge(idx: Sequence[int]) -> Tuple[int, Optional[Subset]]:
    if len(set(idx)) < len(idx):
        return 0, None
    return _perm_sign(idx), tuple(sorted(idx))


def evaluate_form(omega: Form, fields: Sequence[Field]) -> Poly:
    """``omega(v_1..v_i) = sum_J omega_J det[v_a^(J_b)]``."""
    i = len(fields)
    out: Poly = {}
    for J, coeff in omega.items():
        if len(J) != i:
            raise ValueError("form degree does not match the number of fields")
        det: Poly = {}
        for perm in permutations(range(i)):
            term = const(len(fields[0]) if fields else 0, _perm_sign(perm)) if i else {}
            for a in range(i):
                term = pmul(term, fields[a][J[perm[a]]])
                if not term:
                    break
            det = padd(det, term)
        if i == 0:
            out = padd(out, coeff)
        else:
            out = padd(out, pmul(coeff, det))
    return out


def exterior_derivative(omega: Form, nvars: int) -> Form:
    """``d(f dx_J) = sum_k d_k f dx_k ^ dx_J``."""
    out: Form = {}
    for J, f in omega.items():
        for k in range(nvars):
            df = pderiv(f, k)
            if not df:
                continue
            s, K = sort_wedge((k,) + J)
            if s:
                out[K] = padd(out.get(K, {}), df, s)
                if not out[K]:
                    del out[K]
    return out


def forms_basis(nvars: int, i: int) -> List[Subset]:
    return list(combinations(range(nvars), i))


def form_spanning_set(nvars: int, i: int, deg: int) -> List[Form]:
    return [{J: monomial(e)} for J in forms_basis(nvars, i) for e in monomials_upto(nvars, deg)]


def field_spanning_set(nvars: int, deg: int) -> List[Field]:
    return [coordinate_field(nvars, j, monomial(e)) for e in monomials_upto(nvars, deg) for j in range(nvars)]


# ---------------------------------------------------------------------------
# the splitting phi_i


def cartan_value(fields: Sequence[Field], omega: Form) -> Poly:
    """Right-hand side of the Cartan formula for ``phi_i(v_0 ^ .. ^ v_i)(omega)``."""
    i = len(fields) - 1
    out: Poly = {}
    for j, vj in enumerate(fields):
        rest = list(fields[:j]) + list(fields[j + 1:])
        out = padd(out, apply_field(vj, evaluate_form(omega, rest)), (-1) ** j)
    for j in range(i + 1):
        for k in range(j + 1, i + 1):
            rest = [fields[a] for a in range(i + 1) if a not in (j, k)]
            br = field_bracket(fields[j], fields[k])
            out = padd(out, evaluate_form(omega, [br] + rest), (-1) ** (j + k))
    return out


@dataclass(frozen=True)
class FirstOrderOp:
    """``(sigma, p)`` with keys ``(k, J)`` and ``J``."""

    nvars: int
    i: int
    sigma: Dict[Tuple[int, Subset], Poly]
    p: Dict[Subset, Poly]

    def apply(self, omega: Form) -> Poly:
        out: Poly = {}
        for J, f in omega.items():
            for k in range(self.nvars):
                s = self.sigma.get((k, J))
                if s:
                    out = padd(out, pmul(s, pderiv(f, k)))
            pj = self.p.get(J)
            if pj:
                out = padd(out, pmul(pj, f))
        return out

    def scaled(self, a: Poly) -> "FirstOrderOp":
        return FirstOrderOp(self.nvars, self.i, {k: pmul(a, v) for k, v in self.sigma.items() if pmul(a, v)},
                            {k: pmul(a, v) for k, v in self.p.items() if pmul(a, v)})

    def __eq__(self, other) -> bool:
        return (self.nvars, self.i, _clean(self.sigma), _clean(self.p)) == (other.nvars, other.i, _clean(other.sigma), _clean(other.p))

    def __hash__(self):
        return hash((self.nvars, self.i))


def _clean(d: Mapping) -> dict:
    return {k: v for k, v in d.items() if v}


def extract_operator(op: Callable[[Form], Poly], nvars: int, i: int) -> FirstOrderOp:
    """Read ``(sigma, p)`` off a black-box operator using ``dx_J`` and ``x_k dx_J``."""
    p, sigma = {}, {}
    for J in forms_basis(nvars, i):
        pj = op({J: const(nvars)})
        if pj:
            p[J] = pj
        for k in range(nvars):
            xk = tuple(1 if a == k else 0 for a in range(nvars))
            s = padd(op({J: monomial(xk)}), pmul(monomial(xk), pj), -1)
            if s:
                sigma[(k, J)] = s
    return FirstOrderOp(nvars, i, sigma, p)


def phi(fields: Sequence[Field], nvars: int) -> FirstOrderOp:
    i = len(fields) - 1
    return extract_operator(lambda w: cartan_value(fields, w), nvars, i)


def wedge_components(fields: Sequence[Field]) -> Dict[Subset, Poly]:
    """Components of ``v_1 ^ .. ^ v_r`` on ``d_J`` (determinant minors)."""
    r = len(fields)
    nvars = len(fields[0]) if fields else 0
    out = {}
    for J in combinations(range(nvars), r):
        det: Poly = {}
        for perm in permutations(range(r)):
            term = const(nvars, _perm_sign(perm))
            for a in range(r):
                term = pmul(term, fields[a][J[perm[a]]])
            det = padd(det, term)
        if det:
            out[J] = det
    return out


def inclusion_symbol(fields: Sequence[Field]) -> Dict[Tuple[int, Subset], Poly]:
    """``v_0 ^ .. ^ v_i -> sum_j (-1)^j v_j (x) (v_0 ^ .. hat v_j .. ^ v_i)`` in ``T (x) wedge^i T``."""
    out: Dict[Tuple[int, Subset], Poly] = {}
    for j, v in enumerate(fields):
        rest = wedge_components(list(fields[:j]) + list(fields[j + 1:])) if len(fields) > 1 else {(): const(len(v))}
        for k, vk in enumerate(v):
            for J, c in rest.items():
                t = pmul(vk, c)
                if t:
                    out[(k, J)] = padd(out.get((k, J), {}), t, (-1) ** j)
                    if not out[(k, J)]:
                        del out[(k, J)]
    return out


def first_order_defect(op: FirstOrderOp, fn: Callable[[Form], Poly], deg: int) -> List[Form]:
    """Forms in the degree-bounded spanning set where ``op`` and ``fn`` disagree."""
    return [w for w in form_spanning_set(op.nvars, op.i, deg) if op.apply(w) != fn(w)]


# ---------------------------------------------------------------------------
# constant-frame linear algebra for the kernel characterization


def _sym_pairs(nvars: int) -> List[Tuple[int, int]]:
    return [(a, b) for a in range(nvars) for b in range(a, nvars)]


class FrameCoordinates:
    """Coordinates of ``B^1(wedge^i T)`` and ``B^2_+(wedge^(i-1) T)`` over the constant frame."""

    def __init__(self, nvars: int, i: int):
        self.nvars, self.i = nvars, i
        self.Ji = forms_basis(nvars, i)
        self.Jm = forms_basis(nvars, i - 1)
        self.b1 = [("s", k, J) for k in range(nvars) for J in self.Ji] + [("p", J) for J in self.Ji]
        self.b1i = {c: n for n, c in enumerate(self.b1)}
        self.b2 = [("s2", ab, K) for ab in _sym_pairs(nvars) for K in self.Jm] + [("q", k, K) for k in range(nvars) for K in self.Jm]
        self.b2i = {c: n for n, c in enumerate(self.b2)}

    def vector(self, op: FirstOrderOp) -> Vector:
        v: Vector = {}
        for (k, J), s in op.sigma.items():
            c = _constant(s, self.nvars)
            if c:
                v[self.b1i[("s", k, J)]] = c
        for J, pj in op.p.items():
            c = _constant(pj, self.nvars)
            if c:
                v[self.b1i[("p", J)]] = c
        return v

    def transpose_d(self) -> SparseMatrix:
        """``a -> a o d_(i-1)``, dropping the zeroth-order part."""
        data: Dict[int, Dict[int, Fraction]] = {}
        for K in self.Jm:
            for k in range(self.nvars):
                s, kK = sort_wedge((k,) + K)
                if not s:
                    continue
                for l in range(self.nvars):
                    ab = (min(k, l), max(k, l))
                    row = self.b2i[("s2", ab, K)]
                    col = self.b1i[("s", l, kK)]
                    data.setdefault(row, {})
                    vaccumulate(data[row], col, s)
                row = self.b2i[("q", k, K)]
                data.setdefault(row, {})
                vaccumulate(data[row], self.b1i[("p", kK)], s)
        return SparseMatrix(len(self.b2), len(self.b1), {r: d for r, d in data.items() if d})

    def transpose_d0_tensor_id(self) -> SparseMatrix:
        """``t d_0 (x) id`` after the first-factor embedding ``d_J -> sum_r (-1)^r d_(j_r) (x) d_(J - j_r)``."""
        data: Dict[int, Dict[int, Fraction]] = {}
        for J in self.Ji:
            for r, j in enumerate(J):
                K = J[:r] + J[r + 1:]
                s = (-1) ** r
                for l in range(self.nvars):
                    ab = (min(j, l), max(j, l))
                    row = self.b2i[("s2", ab, K)]
                    data.setdefault(row, {})
                    vaccumulate(data[row], self.b1i[("s", l, J)], s)
                row = self.b2i[("q", j, K)]
                data.setdefault(row, {})
                vaccumulate(data[row], self.b1i[("p", J)], s)
        return SparseMatrix(len(self.b2), len(self.b1), {r: d for r, d in data.items() if d})


def _constant(p: Poly, nvars: int) -> Fraction:
    if any(e != (0,) * nvars for e in p):
        raise ValueError("non-constant coefficient in a constant-frame computation")
    return p.get((0,) * nvars, Fraction(0))


def kernel_characterization(nvars: int, i: int) -> Dict[str, object]:
    """Compare ``im(phi_i)`` with ``ker(t d_(i-1))`` and ``ker(t d_0 (x) id)`` over the frame."""
    fc = FrameCoordinates(nvars, i)
    frame = [coordinate_field(nvars, j) for j in range(nvars)]
    image = [fc.vector(phi([frame[j] for j in J], nvars)) for J in combinations(range(nvars), i + 1)]
    n = len(fc.b1)
    ker = kernel_basis(fc.transpose_d())
    ker0 = kernel_basis(fc.transpose_d0_tensor_id())
    out = {"i": i, "image_dim": span_rank(image, n), "kernel_dim": len(ker), "kernel_first_factor_dim": len(ker0),
           "equal": same_span(image, ker, n) if image or ker else True,
           "equal_first_factor": same_span(image, ker0, n) if image or ker0 else True,
           "b1_rank": n, "exact_sequence": n == len(fc.Ji) * (nvars + 1)}
    return out


# ---------------------------------------------------------------------------
# reports


def cartan_report(nvars: int, deg: int = 2, max_i: int = 2) -> Report:
    """All Cartan identities on ``Q[x_1..x_nvars]`` with spanning sets of degree ``<= deg``."""
    rep = Report(f"Cartan calculus, {nvars} variable(s), degree <= {deg}")
    fields = field_spanning_set(nvars, 1)
    scalars = [monomial(e) for e in monomials_upto(nvars, 1)]
    for i in range(0, min(max_i, nvars) + 1):
        tuples = [t for t in combinations(range(len(fields)), i + 1)][:60]
        bad_first, bad_lin, bad_split, bad_alt = [], [], [], []
        for t in tuples:
            vs = [fields[a] for a in t]
            op = phi(vs, nvars)
            if first_order_defect(op, lambda w: cartan_value(vs, w), deg):
                bad_first.append(t)
            if _clean(op.sigma) != _clean(inclusion_symbol(vs)):
                bad_split.append(t)
            for a in scalars:
                lhs = phi([scale_field(a, vs[0])] + vs[1:], nvars)
                if lhs != op.scaled(a):
                    bad_lin.append((t, a))
            if len(vs) > 1:
                sw = phi([vs[1], vs[0]] + vs[2:], nvars)
                if sw != op.scaled(const(nvars, -1)):
                    bad_alt.append(t)
        rep.add(f"phi_{i} first-order", not bad_first, bad_first[:3] or None)
        rep.add(f"phi_{i} A-linear", not bad_lin, [str(x) for x in bad_lin[:3]] or None)
        rep.add(f"phi_{i} splitting", not bad_split, bad_split[:3] or None)
        rep.add(f"phi_{i} alternating", not bad_alt, bad_alt[:3] or None)
        # d via phi against the direct exterior derivative
        bad_d = []
        for w in form_spanning_set(nvars, i, deg):
            dw = exterior_derivative(w, nvars)
            for t in tuples:
                vs = [fields[a] for a in t]
                if cartan_value(vs, w) != evaluate_form(dw, vs):
                    bad_d.append((str(w), t))
        rep.add(f"d via phi, degree {i}", not bad_d, bad_d[:3] or None)
        bad_dd = [str(w) for w in form_spanning_set(nvars, i, deg + 1) if exterior_derivative(exterior_derivative(w, nvars), nvars)]
        rep.add(f"d^2 = 0 on Omega^{i}", not bad_dd, bad_dd[:3] or None)
        if i >= 1:
            kc = kernel_characterization(nvars, i)
            rep.add(f"im phi_{i} = ker", kc["equal"], kc)
            rep.add(f"im phi_{i} = ker (first-factor embedding)", kc["equal_first_factor"], None)
            rep.add(f"B^1 exact sequence, i = {i}", kc["exact_sequence"], None)
    # diagram squares for i = 1
    fc = FrameCoordinates(nvars, 1)
    td0 = fc.transpose_d()
    left_ok = all(td0.apply({fc.b1i[("p", (j,))]: Fraction(1)}) == {fc.b2i[("q", j, ())]: Fraction(1)} for j in range(nvars))
    right_ok = True
    for k in range(nvars):
        for j in range(nvars):
            img = td0.apply({fc.b1i[("s", k, (j,))]: Fraction(1)})
            ab = (min(j, k), max(j, k))
            if img != {fc.b2i[("s2", ab, ())]: Fraction(1)}:
                right_ok = False
    rep.add("diagram: T -> B^1(T) -> T^2 equals T -> T^2", left_ok)
    rep.add("diagram: symbol square to S^2 T", right_ok)
    return rep


def worked_value(nvars: int = 1) -> Poly:
    """``phi_1(d ^ x d)(x dx)`` in the first variable."""
    x = tuple(1 if k == 0 else 0 for k in range(nvars))
    d = coordinate_field(nvars, 0)
    xd = coordinate_field(nvars, 0, monomial(x))
    return cartan_value([d, xd], {(0,): monomial(x)})
