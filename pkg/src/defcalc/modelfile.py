"""Reader and writer for the ``.model`` text format (grammar in docs/model-format.md)."""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .artin import ArtinAlgebra, free_actions, truncated_polynomial
from .lie import DGModule, GeometricModel, GradedSpace, LieModel, Representation
from .linalg import SparseMatrix, format_scalar

SECTIONS = ("lie_algebra", "representation", "dgla", "dg_algebra", "pairing", "dg_module",
            "artin_algebra", "module_over_artin")

# directive -> (number of label arguments, whether "= combo" follows); None means variadic
DIRECTIVES: Dict[str, Dict[str, Tuple[Optional[int], bool]]] = {
    "lie_algebra": {"basis": (None, False), "bracket": (2, True)},
    "representation": {"basis": (None, False), "act": (2, True)},
    "dgla": {"element": (2, False), "bracket": (2, True), "d": (1, True)},
    "dg_algebra": {"element": (2, False), "unit": (1, False), "product": (2, True), "d": (1, True)},
    "pairing": {"pair": (2, True)},
    "dg_module": {"element": (2, False), "act": (2, True), "d": (1, True)},
    "artin_algebra": {"basis": (None, False), "unit": (1, False), "product": (2, True),
                      "truncated_polynomial": (None, False)},
    "module_over_artin": {"basis": (None, False), "act": (2, True), "free": (1, False)},
}

_LABEL = re.compile(r"[A-Za-z0-9_^*.']+\Z")
_SCALAR = re.compile(r"[+-]?[0-9]+(/[0-9]+)?\Z")
_INT = re.compile(r"[+-]?[0-9]+\Z")


class ModelSyntaxError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line, self.col = line, col


class ModelSemanticError(ValueError):
    def __init__(self, message: str, label: Optional[str] = None):
        super().__init__(message if label is None else f"{message}: {label!r}")
        self.label = label


Combo = Dict[str, Fraction]


@dataclass
class Section:
    name: str
    line: int
    labels: List[str] = field(default_factory=list)
    degrees: List[int] = field(default_factory=list)
    unit: Optional[str] = None
    tables: Dict[str, Dict[Tuple[str, ...], Combo]] = field(default_factory=dict)
    truncated: Optional[Tuple[Tuple[str, ...], int]] = None
    free: Optional[int] = None

    def index(self) -> Dict[str, int]:
        return {l: k for k, l in enumerate(self.labels)}


@dataclass
class ModelFile:
    sections: Dict[str, Section]
    digest: str

    def has(self, name: str) -> bool:
        return name in self.sections

    # builders -------------------------------------------------------------

    def lie_model(self) -> LieModel:
        s = self._need("lie_algebra")
        idx = s.index()
        table = {(idx[a], idx[b]): {idx[k]: c for k, c in v.items()} for (a, b), v in s.tables.get("bracket", {}).items()}
        return LieModel(tuple(s.labels), table)

    def representation(self) -> Representation:
        g = self.lie_model()
        s = self._need("representation")
        gi, vi = self._need("lie_algebra").index(), s.index()
        n = len(s.labels)
        data: List[Dict[int, Dict[int, Fraction]]] = [dict() for _ in range(g.dim)]
        for (x, v), combo in s.tables.get("act", {}).items():
            for w, c in combo.items():
                data[gi[x]].setdefault(vi[w], {})[vi[v]] = c
        mats = tuple(SparseMatrix(n, n, d) for d in data)
        return Representation(g, mats, tuple(s.labels))

    def geometric_model(self, name: str = "") -> GeometricModel:
        if not self.has("dgla"):
            g = self.lie_model()
            rep = self.representation() if self.has("representation") else None
            gm = g.as_geometric(rep)
            return GeometricModel(gm.L, gm.bracket, gm.A, gm.product, gm.unit, gm.pairing, gm.dL, gm.dA, gm.module, name)
        L = self._need("dgla")
        A = self._need("dg_algebra")
        Li, Ai = L.index(), A.index()
        bracket = _index_table(L.tables.get("bracket", {}), Li, Li)
        product_ = _index_table(A.tables.get("product", {}), Ai, Ai)
        dL = _index_map(L.tables.get("d", {}), Li, len(L.labels))
        dA = _index_map(A.tables.get("d", {}), Ai, len(A.labels))
        pairing = {}
        if self.has("pairing"):
            pairing = _index_table(self.sections["pairing"].tables.get("pair", {}), Li, Ai)
        module = None
        if self.has("dg_module"):
            M = self.sections["dg_module"]
            Mi = M.index()
            module = DGModule(GradedSpace(tuple(M.labels), tuple(M.degrees)),
                              _index_map(M.tables.get("d", {}), Mi, len(M.labels)),
                              _index_table(M.tables.get("act", {}), Mi, Mi, first=Li))
        return GeometricModel(GradedSpace(tuple(L.labels), tuple(L.degrees)), bracket,
                              GradedSpace(tuple(A.labels), tuple(A.degrees)), product_, Ai[A.unit], pairing,
                              dL, dA, module, name)

    def artin(self) -> ArtinAlgebra:
        s = self._need("artin_algebra")
        if s.truncated:
            gens, top = s.truncated
            return truncated_polynomial(len(gens), top, gens)
        idx = s.index()
        return ArtinAlgebra(tuple(s.labels), _index_table(s.tables.get("product", {}), idx, idx), idx[s.unit])

    def polynomial_presentation(self) -> Optional[Tuple[Tuple[str, ...], int]]:
        s = self._need("artin_algebra")
        return s.truncated

    def artin_module_actions(self) -> List[SparseMatrix]:
        S = self.artin()
        if not self.has("module_over_artin"):
            return free_actions(S, 1)
        s = self.sections["module_over_artin"]
        if s.free is not None:
            return free_actions(S, s.free)
        Si, Ei = {l: k for k, l in enumerate(S.labels)}, s.index()
        n = len(s.labels)
        data: List[Dict[int, Dict[int, Fraction]]] = [dict() for _ in range(S.dim)]
        for (a, e), combo in s.tables.get("act", {}).items():
            for f, c in combo.items():
                data[Si[a]].setdefault(Ei[f], {})[Ei[e]] = c
        # the unit acts as the identity unless stated
        if not any(a == S.labels[S.unit] for a, _ in s.tables.get("act", {})):
            data[S.unit] = {k: {k: Fraction(1)} for k in range(n)}
        return [SparseMatrix(n, n, d) for d in data]

    def _need(self, name: str) -> Section:
        if name not in self.sections:
            raise ModelSemanticError("model lacks a required section", name)
        return self.sections[name]


def _index_table(t: Dict[Tuple[str, ...], Combo], first_and_second: Dict[str, int], target: Dict[str, int],
                 first: Optional[Dict[str, int]] = None):
    fi = first if first is not None else first_and_second
    return {(fi[a], first_and_second[b]): {target[k]: c for k, c in v.items()} for (a, b), v in t.items()}


def _index_map(t: Dict[Tuple[str, ...], Combo], idx: Dict[str, int], n: int) -> Optional[SparseMatrix]:
    if not t:
        return None
    return SparseMatrix.from_triplets(n, n, [(idx[k], idx[a], c) for (a,), v in t.items() for k, c in v.items()])


# ---------------------------------------------------------------------------
# parsing


def _tokens(text: str) -> List[Tuple[str, int]]:
    """Whitespace-separated tokens with 1-based columns."""
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", text)]


def _scalar(tok: str, line: int, col: int) -> Fraction:
    if not _SCALAR.match(tok):
        raise ModelSyntaxError(f"malformed scalar {tok!r}", line, col)
    num, _, den = tok.partition("/")
    if den and int(den) == 0:
        raise ModelSyntaxError(f"zero denominator in {tok!r}", line, col)
    return Fraction(int(num), int(den) if den else 1)


def _label(tok: str, line: int, col: int) -> str:
    if not _LABEL.match(tok):
        raise ModelSyntaxError(f"malformed label {tok!r}", line, col)
    return tok


def _combo(toks: List[Tuple[str, int]], line: int) -> Tuple[Combo, List[Tuple[str, int]]]:
    out: Combo = {}
    where = []
    for tok, col in toks:
        coef, sep, lab = tok.rpartition(":")
        c = _scalar(coef, line, col) if sep else Fraction(1)
        lab = _label(lab, line, col + (len(coef) + 1 if sep else 0))
        if lab in out:
            raise ModelSyntaxError(f"label {lab!r} repeated in a linear combination", line, col)
        out[lab] = c
        where.append((lab, col))
    return {k: v for k, v in out.items() if v}, where


def parse(data, source: str = "<model>") -> ModelFile:
    if isinstance(data, str):
        raw = data.encode("utf-8")
    else:
        raw = bytes(data)
    digest = hashlib.sha256(raw).hexdigest()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ModelSyntaxError("input is not UTF-8", 1, exc.start + 1) from None
    sections: Dict[str, Section] = {}
    refs: List[Tuple[str, str, str, int, int]] = []      # (section, role, label, line, col)
    cur: Optional[Section] = None
    for ln, rawline in enumerate(text.split("\n"), start=1):
        body = rawline.split("#", 1)[0].rstrip("\r")
        toks = _tokens(body)
        if not toks:
            continue
        head, hcol = toks[0]
        if head.startswith("["):
            m = re.fullmatch(r"\[([a-z_]+)\]", head)
            if not m or len(toks) != 1:
                raise ModelSyntaxError("malformed section header", ln, hcol)
            name = m.group(1)
            if name not in SECTIONS:
                raise ModelSyntaxError(f"unknown section {name!r}", ln, hcol + 1)
            if name in sections:
                raise ModelSyntaxError(f"section {name!r} appears twice", ln, hcol + 1)
            cur = sections[name] = Section(name, ln)
            continue
        if cur is None:
            raise ModelSyntaxError("directive outside of any section", ln, hcol)
        rule = DIRECTIVES[cur.name].get(head)
        if rule is None:
            raise ModelSyntaxError(f"unknown key {head!r} in section {cur.name!r}", ln, hcol)
        nargs, has_rhs = rule
        rest = toks[1:]
        eq = [k for k, (t, _) in enumerate(rest) if t == "="]
        if has_rhs:
            if len(eq) != 1:
                raise ModelSyntaxError(f"{head!r} needs exactly one '='", ln, hcol)
            args, rhs = rest[:eq[0]], rest[eq[0] + 1:]
        else:
            if eq:
                raise ModelSyntaxError(f"{head!r} takes no '='", ln, rest[eq[0]][1])
            args, rhs = rest, []
        if nargs is not None and len(args) != nargs:
            col = args[nargs][1] if len(args) > nargs else (rest[eq[0]][1] if eq else len(body) + 1)
            raise ModelSyntaxError(f"{head!r} takes {nargs} argument(s), got {len(args)}", ln, col)
        _directive(cur, head, args, rhs, ln, hcol, refs)
    mf = ModelFile(sections, digest)
    _semantics(mf, refs)
    return mf


def _directive(cur: Section, head: str, args, rhs, ln: int, hcol: int, refs) -> None:
    sec = cur.name
    if head == "basis":
        if cur.labels or cur.truncated or cur.free is not None:
            raise ModelSyntaxError("basis declared twice", ln, hcol)
        if not args:
            raise ModelSyntaxError("empty basis", ln, hcol)
        for tok, col in args:
            lab = _label(tok, ln, col)
            if lab in cur.labels:
                raise ModelSyntaxError(f"label {lab!r} declared twice", ln, col)
            cur.labels.append(lab)
            cur.degrees.append(0)
        return
    if head == "element":
        (lt, lc), (dt, dc) = args
        lab = _label(lt, ln, lc)
        if lab in cur.labels:
            raise ModelSyntaxError(f"label {lab!r} declared twice", ln, lc)
        if not _INT.match(dt):
            raise ModelSyntaxError(f"malformed degree {dt!r}", ln, dc)
        cur.labels.append(lab)
        cur.degrees.append(int(dt))
        return
    if head == "unit":
        if cur.unit is not None:
            raise ModelSyntaxError("unit declared twice", ln, hcol)
        cur.unit = _label(args[0][0], ln, args[0][1])
        refs.append((sec, "self", cur.unit, ln, args[0][1]))
        return
    if head == "truncated_polynomial":
        if cur.labels or cur.truncated or cur.tables:
            raise ModelSyntaxError("truncated_polynomial excludes basis, unit and product", ln, hcol)
        if len(args) < 2:
            raise ModelSyntaxError("truncated_polynomial needs generators and a truncation order", ln, hcol)
        gens = tuple(_label(t, ln, c) for t, c in args[:-1])
        tt, tc = args[-1]
        if not _INT.match(tt) or int(tt) < 1:
            raise ModelSyntaxError(f"malformed truncation order {tt!r}", ln, tc)
        if len(set(gens)) != len(gens):
            raise ModelSyntaxError("repeated generator", ln, hcol)
        cur.truncated = (gens, int(tt))
        return
    if head == "free":
        tt, tc = args[0]
        if cur.labels or cur.tables or cur.free is not None:
            raise ModelSyntaxError("free excludes basis and act", ln, hcol)
        if not _INT.match(tt) or int(tt) < 1:
            raise ModelSyntaxError(f"malformed rank {tt!r}", ln, tc)
        cur.free = int(tt)
        return
    if sec == "artin_algebra" and cur.truncated:
        raise ModelSyntaxError("truncated_polynomial excludes basis, unit and product", ln, hcol)
    if sec == "module_over_artin" and cur.free is not None:
        raise ModelSyntaxError("free excludes basis and act", ln, hcol)
    key = tuple(_label(t, ln, c) for t, c in args)
    combo, where = _combo(rhs, ln)
    table = cur.tables.setdefault(head, {})
    if key in table:
        raise ModelSyntaxError(f"duplicate entry {head} {' '.join(key)}", ln, hcol)
    table[key] = combo
    roles = _ROLES[(sec, head)]
    for (lab, col), role in zip([(k, c) for k, (_, c) in zip(key, args)], roles[:-1]):
        refs.append((sec, role, lab, ln, col))
    for lab, col in where:
        refs.append((sec, roles[-1], lab, ln, col))


# label roles: "self" = this section's basis, otherwise another section
_ROLES = {
    ("lie_algebra", "bracket"): ("self", "self", "self"),
    ("representation", "act"): ("lie_algebra", "self", "self"),
    ("dgla", "bracket"): ("self", "self", "self"),
    ("dgla", "d"): ("self", "self"),
    ("dg_algebra", "product"): ("self", "self", "self"),
    ("dg_algebra", "d"): ("self", "self"),
    ("pairing", "pair"): ("dgla", "dgla", "dg_algebra"),
    ("dg_module", "act"): ("dgla", "self", "self"),
    ("dg_module", "d"): ("self", "self"),
    ("artin_algebra", "product"): ("self", "self", "self"),
    ("module_over_artin", "act"): ("artin_algebra", "self", "self"),
}


def _section_labels(mf: ModelFile, name: str) -> Optional[List[str]]:
    s = mf.sections.get(name)
    if s is None:
        return None
    if s.truncated:
        gens, top = s.truncated
        return list(truncated_polynomial(len(gens), top, gens).labels)
    return s.labels


def _semantics(mf: ModelFile, refs) -> None:
    S = mf.sections
    for sec, role, lab, ln, col in refs:
        target = sec if role == "self" else role
        labels = _section_labels(mf, target)
        if labels is None:
            raise ModelSemanticError(f"line {ln}: section {sec!r} refers to missing section {target!r} via label", lab)
        if lab not in labels:
            raise ModelSemanticError(f"line {ln}, col {col}: undeclared label in section {target!r}", lab)
    for name in ("lie_algebra", "representation", "artin_algebra"):
        s = S.get(name)
        if s is not None and not s.labels and not s.truncated:
            raise ModelSemanticError("section declares no basis", name)
    if "module_over_artin" in S:
        s = S["module_over_artin"]
        if s.free is None and not s.labels:
            raise ModelSemanticError("section declares no basis", "module_over_artin")
        if "artin_algebra" not in S:
            raise ModelSemanticError("module_over_artin needs section", "artin_algebra")
    if "representation" in S and "lie_algebra" not in S:
        raise ModelSemanticError("representation needs section", "lie_algebra")
    for name in ("dg_algebra", "pairing", "dg_module"):
        if name in S and "dgla" not in S:
            raise ModelSemanticError(f"{name} needs section", "dgla")
    if "dgla" in S:
        if "dg_algebra" not in S:
            raise ModelSemanticError("dgla needs section", "dg_algebra")
        if "lie_algebra" in S:
            raise ModelSemanticError("lie_algebra and dgla are exclusive; drop one", "lie_algebra")
        if S["dg_algebra"].unit is None:
            raise ModelSemanticError("dg_algebra declares no unit", "dg_algebra")
    if "artin_algebra" in S:
        a = S["artin_algebra"]
        if not a.truncated and a.unit is None:
            raise ModelSemanticError("artin_algebra declares no unit", "artin_algebra")
    _complete(mf)


def _degree_map(mf: ModelFile, name: str) -> Dict[str, int]:
    s = mf.sections[name]
    return dict(zip(s.labels, s.degrees))


def _complete(mf: ModelFile) -> None:
    """Fill in the reversed entries of (anti)symmetric tables and the unit rows."""
    S = mf.sections

    def mirror(table, sign):
        for (a, b), v in list(table.items()):
            if (b, a) not in table:
                s = sign(a, b)
                table[(b, a)] = {k: s * c for k, c in v.items()}

    if "lie_algebra" in S:
        mirror(S["lie_algebra"].tables.setdefault("bracket", {}), lambda a, b: -1)
    if "dgla" in S:
        deg = _degree_map(mf, "dgla")
        mirror(S["dgla"].tables.setdefault("bracket", {}), lambda a, b: -(-1) ** (deg[a] * deg[b]))
        if "pairing" in S:
            mirror(S["pairing"].tables.setdefault("pair", {}), lambda a, b: (-1) ** (deg[a] * deg[b]))
    for name in ("dg_algebra", "artin_algebra"):
        s = S.get(name)
        if s is None or s.truncated:
            continue
        deg = dict(zip(s.labels, s.degrees))
        t = s.tables.setdefault("product", {})
        mirror(t, lambda a, b: (-1) ** (deg[a] * deg[b]))
        for lab in s.labels:
            t.setdefault((s.unit, lab), {lab: Fraction(1)})
            t.setdefault((lab, s.unit), {lab: Fraction(1)})


# ---------------------------------------------------------------------------
# serialization


def _fmt_combo(combo: Combo, order: Sequence[str]) -> str:
    pos = {l: k for k, l in enumerate(order)}
    terms = []
    for lab in sorted(combo, key=lambda l: pos.get(l, len(pos))):
        c = combo[lab]
        terms.append(lab if c == 1 else f"{format_scalar(c)}:{lab}")
    return " ".join(terms)


def serialize(mf: ModelFile) -> str:
    """Canonical text: fixed section order, declaration order for bases, sorted table keys."""
    out: List[str] = []
    S = mf.sections
    for name in SECTIONS:
        s = S.get(name)
        if s is None:
            continue
        if out:
            out.append("")
        out.append(f"[{name}]")
        if s.truncated:
            gens, top = s.truncated
            out.append(f"truncated_polynomial {' '.join(gens)} {top}")
        if s.free is not None:
            out.append(f"free {s.free}")
        if name in ("dgla", "dg_algebra", "dg_module"):
            out.extend(f"element {l} {d}" for l, d in zip(s.labels, s.degrees))
        elif s.labels:
            out.append("basis " + " ".join(s.labels))
        if s.unit is not None:
            out.append(f"unit {s.unit}")
        for head in DIRECTIVES[name]:
            table = s.tables.get(head)
            if not table:
                continue
            roles = _ROLES[(name, head)]
            orders = [_section_labels(mf, name if r == "self" else r) or [] for r in roles]
            def keyfun(key):
                return tuple(orders[k].index(l) for k, l in enumerate(key))
            for key in sorted(table, key=keyfun):
                combo = table[key]
                out.append(f"{head} {' '.join(key)} = {_fmt_combo(combo, orders[-1])}".rstrip())
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# building model files from in-memory objects


def from_lie(g: LieModel, rep: Optional[Representation] = None) -> ModelFile:
    secs = {}
    s = Section("lie_algebra", 0, list(g.labels), [0] * g.dim)
    s.tables["bracket"] = {(g.labels[i], g.labels[j]): {g.labels[k]: c for k, c in v.items()}
                           for (i, j), v in g.brackets.items()}
    secs["lie_algebra"] = s
    if rep is not None:
        r = Section("representation", 0, list(rep.labels), [0] * rep.target_dim)
        act = {}
        for x, M in enumerate(rep.matrices):
            for j in range(rep.target_dim):
                col = M.column(j)
                if col:
                    act[(g.labels[x], rep.labels[j])] = {rep.labels[i]: c for i, c in sorted(col.items())}
        r.tables["act"] = act
        secs["representation"] = r
    return _reparse(ModelFile(secs, ""))


def from_geometric(gm: GeometricModel) -> ModelFile:
    L, A = gm.L, gm.A
    secs = {}
    s = Section("dgla", 0, list(L.labels), list(L.degrees))
    s.tables["bracket"] = _named(gm.bracket, L.labels, L.labels, L.labels)
    if gm.dL is not None:
        s.tables["d"] = _named_map(gm.dL, L.labels)
    secs["dgla"] = s
    a = Section("dg_algebra", 0, list(A.labels), list(A.degrees), unit=A.labels[gm.unit])
    a.tables["product"] = _named(gm.product, A.labels, A.labels, A.labels)
    if gm.dA is not None:
        a.tables["d"] = _named_map(gm.dA, A.labels)
    secs["dg_algebra"] = a
    if gm.pairing:
        p = Section("pairing", 0)
        p.tables["pair"] = _named(gm.pairing, L.labels, L.labels, A.labels)
        secs["pairing"] = p
    if gm.module is not None:
        M = gm.module
        m = Section("dg_module", 0, list(M.space.labels), list(M.space.degrees))
        m.tables["act"] = _named(M.action, L.labels, M.space.labels, M.space.labels)
        if M.d is not None:
            m.tables["d"] = _named_map(M.d, M.space.labels)
        secs["dg_module"] = m
    return _reparse(ModelFile(secs, ""))


def from_artin(S: ArtinAlgebra, gens: Optional[Sequence[str]] = None, top: Optional[int] = None,
               free: Optional[int] = None) -> ModelFile:
    secs = {}
    s = Section("artin_algebra", 0)
    if gens is not None:
        s.truncated = (tuple(gens), int(top))
    else:
        s.labels, s.degrees, s.unit = list(S.labels), [0] * S.dim, S.labels[S.unit]
        s.tables["product"] = _named(S.table, S.labels, S.labels, S.labels)
    secs["artin_algebra"] = s
    if free is not None:
        m = Section("module_over_artin", 0)
        m.free = free
        secs["module_over_artin"] = m
    return _reparse(ModelFile(secs, ""))


def _named(table, first, second, target) -> Dict[Tuple[str, str], Combo]:
    return {(first[i], second[j]): {target[k]: c for k, c in sorted(v.items())} for (i, j), v in table.items() if v}


def _named_map(M: SparseMatrix, labels) -> Dict[Tuple[str], Combo]:
    out = {}
    for j, col in enumerate(M.columns()):
        if col:
            out[(labels[j],)] = {labels[i]: c for i, c in sorted(col.items())}
    return out


def _reparse(mf: ModelFile) -> ModelFile:
    return parse(serialize(mf))


def digest_of(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
