"""Command-line entry point: ``defcalc <command> --model FILE [--m N] [--eta c1,c2,...] [--json PATH]``.

Exit status: 0 when every check passes, 1 when some check fails, 2 on input errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from . import artin as art
from . import cartan as car
from .checks import Report
from .enveloping import WindowError, rho_report, trace_report, traceless_image_check
from .jacobi import (InvalidModelError, deformation_ring, jacobi, jacobi_module, lie_cohomology, obstruction,
                     poincare_module)
from .lie import trivial_rep, validate_geometric_model, validate_lie, validate_rep
from .linalg import SparseMatrix, cohomology
from .modelfile import ModelFile, ModelSemanticError, ModelSyntaxError, parse
from .traceform import trace_form_report

COMMANDS = ("validate", "cohomology", "enveloping", "artin", "cartan", "deform", "trace-form")


class InputError(ValueError):
    pass


def jsonable(x):
    """Deterministic JSON view: scalars as strings, tuples as lists, dict keys as strings."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, SparseMatrix):
        return {"rows": x.rows, "cols": x.cols, "entries": [[r, c, str(v)] for r, c, v in x.triplets()]}
    if isinstance(x, dict):
        return {(k if isinstance(k, str) else json.dumps(jsonable(k))): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "to_json"):
        return jsonable(x.to_json())
    return str(x)


class Run:
    def __init__(self, command: str, model: ModelFile, path: str, m: Optional[int], eta: Optional[List[Fraction]]):
        self.command, self.model, self.path, self.m, self.eta = command, model, path, m, eta
        self.checks: List[dict] = []
        self.results: Dict[str, object] = {}

    def absorb(self, rep: Report, prefix: str) -> None:
        for c in rep.checks:
            self.checks.append({"name": f"{prefix}: {c.name}", "status": c.status, "witness": jsonable(c.witness)})

    @property
    def ok(self) -> bool:
        return all(c["status"] != "fail" for c in self.checks)

    def document(self) -> dict:
        return {"command": self.command,
                "model": os.path.basename(self.path),
                "input_digest": self.model.digest,
                "parameters": {"m": self.m, "eta": None if self.eta is None else [str(e) for e in self.eta]},
                "ok": self.ok,
                "results": jsonable(self.results),
                "checks": self.checks}


# ---------------------------------------------------------------------------
# commands


def _validate_geometric(run: Run) -> bool:
    gm = run.model.geometric_model(os.path.basename(run.path))
    rep = validate_geometric_model(gm)
    run.absorb(rep, "geometric model")
    return rep.ok


def cmd_validate(run: Run) -> None:
    mf = run.model
    if mf.has("lie_algebra"):
        g = mf.lie_model()
        run.absorb(validate_lie(g), "lie algebra")
        run.results["lie_dim"] = g.dim
        if mf.has("representation"):
            r = mf.representation()
            run.absorb(validate_rep(g, r), "representation")
            run.results["representation_dim"] = r.target_dim
    if mf.has("dgla"):
        _validate_geometric(run)
        gm = mf.geometric_model()
        run.results["L_dim"], run.results["A_dim"] = gm.L.dim, gm.A.dim
        run.results["module_dim"] = gm.module.space.dim if gm.module else None
    if mf.has("artin_algebra"):
        S = mf.artin()
        rep = art.artin_validate(S)
        run.absorb(rep, "artin algebra")
        run.results["artin_dim"] = S.dim
        run.results["artin_info"] = rep.info
        acts = mf.artin_module_actions()
        run.absorb(art.validate_module(S, acts), "module")
        run.results["module_dim"] = acts[0].rows if acts else 0


def cmd_cohomology(run: Run) -> None:
    mf = run.model
    m = 2 if run.m is None else run.m
    if mf.has("lie_algebra"):
        g = mf.lie_model()
        rep = mf.representation() if mf.has("representation") else trivial_rep(g)
        run.results["lie_cohomology"] = {str(k): v for k, v in sorted(lie_cohomology(g, rep).items())}
        run.results["lie_cohomology_trivial"] = {str(k): v for k, v in sorted(lie_cohomology(g, trivial_rep(g)).items())}
    if mf.has("dgla") or mf.has("lie_algebra"):
        if mf.has("dgla") and not _validate_geometric(run):
            return
        gm = mf.geometric_model()
        for name, (C, _) in (("L", gm.L_complex()), ("A", gm.A_complex())):
            H = cohomology(C)
            run.results[f"H({name})"] = {str(k): H[k].dim for k in sorted(H)}
        if m >= 1:
            J = jacobi(gm, m)
            viol = J.double.violations()
            run.absorb(_single("D^2 = 0", not viol, viol[:3] or None), f"J_{m}")
            H = cohomology(J.complex)
            run.results[f"H(J_{m})"] = {str(k): H[k].dim for k in sorted(H)}
        if gm.module is not None:
            JM = jacobi_module(gm, m)
            viol = JM.double.violations()
            run.absorb(_single("D^2 = 0", not viol, viol[:3] or None), f"J_{m}(L,M)")
            H = cohomology(JM.complex)
            run.results[f"H(J_{m}(L,M))"] = {str(k): H[k].dim for k in sorted(H)}
    if mf.has("artin_algebra"):
        S = mf.artin()
        rep = art.artin_validate(S)
        run.absorb(rep, "artin algebra")
        if rep.ok:
            top = rep.info["nilpotency_index"] if run.m is None else run.m
            T = art.dual_tower(S, top)
            run.results["dual_tower"] = {"m": top, "B0_dims": list(T.dims0), "B_dims": list(T.dims)}


def _single(name: str, passed: bool, witness=None) -> Report:
    r = Report()
    r.add(name, passed, witness)
    return r


def cmd_enveloping(run: Run) -> None:
    mf = run.model
    g = mf.lie_model()
    rep = mf.representation()
    m = 2 if run.m is None else run.m
    v = validate_rep(g, rep)
    run.absorb(v, "representation")
    if not v.ok:
        return
    r = rho_report(g, rep, m)
    run.absorb(r, f"rho U^{m}")
    run.results["rho"] = r.info
    run.absorb(trace_report(g, rep, m), "graded trace")
    if m <= 2:
        try:
            run.results["traceless_image"] = traceless_image_check(rep.target_dim, m)
        except WindowError as exc:
            run.results["traceless_image"] = {"error": str(exc)}


def cmd_artin(run: Run) -> None:
    mf = run.model
    S = mf.artin()
    rep = art.artin_validate(S)
    run.absorb(rep, "artin algebra")
    run.results["artin_info"] = rep.info
    if not rep.ok:
        return
    acts = mf.artin_module_actions()
    mod = art.validate_module(S, acts)
    run.absorb(mod, "module")
    if not mod.ok:
        return
    top = rep.info["nilpotency_index"] if run.m is None else run.m
    fr = art.freeness(S, acts, adapted_actions=False)
    run.results["module"] = fr
    towers = []
    for m in range(top + 1):
        T = art.dual_tower(S, m)
        G = art.transpose_module(S, acts, m)
        mos = art.validate_mos(G)
        run.absorb(mos, f"B^{m}(E)")
        dd, C, _ = art.double_dual_map(S, acts, m)
        run.absorb(_single("E -> C^m(B^m(E)) iso", dd.iso, dd.to_json()), f"m = {m}")
        run.absorb(_single("explicit inverse verified", dd.inverse is not None), f"m = {m}, E -> C(B(E))")
        ev, C2 = art.evaluation_map(S, G, m)
        run.absorb(_single("B^m(C^m(G)) -> G iso", ev.iso, ev.to_json()), f"m = {m}")
        run.absorb(_single("explicit inverse verified", ev.inverse is not None), f"m = {m}, B(C(G)) -> G")
        towers.append({"m": m, "B0_dims": list(T.dims0), "B_dims": list(T.dims), "transpose_dims": list(G.dims),
                       "quasi_scalar_dim": C.dim})
    run.results["towers"] = towers


def cmd_cartan(run: Run) -> None:
    mf = run.model
    pres = mf.polynomial_presentation()
    if pres is None:
        raise InputError("cartan needs an artin_algebra given by truncated_polynomial")
    gens, top = pres
    nvars = len(gens)
    deg = max(top - 1, 1) if run.m is None else run.m
    der = car.truncated_lr(nvars, top, gens, min_degree=1)
    run.absorb(car.validate_lr(der), "Lie-Rinehart (derivations)")
    coord = car.validate_lr(car.truncated_lr(nvars, top, gens))
    run.results["coordinate_fields"] = {"ok": coord.ok, "failures": [c.to_json() for c in coord.failures]}
    run.results["lie_rinehart_brackets"] = car.validate_lr(der).info["brackets"]
    rep = car.cartan_report(nvars, deg)
    run.absorb(rep, "Cartan calculus")
    wv = car.worked_value(nvars)
    run.absorb(_single("phi_1(d ^ x d)(x dx) = 0", not wv, {str(k): str(v) for k, v in wv.items()} or None), "worked value")
    run.results["polynomial_ring"] = {"generators": list(gens), "degree_bound": deg}
    run.results["kernel_characterization"] = [car.kernel_characterization(nvars, i) for i in range(1, min(nvars, 2) + 1)]


def cmd_deform(run: Run) -> None:
    mf = run.model
    m = 2 if run.m is None else run.m
    if not _validate_geometric(run):
        return
    gm = mf.geometric_model(os.path.basename(run.path))
    if m < 1:
        raise InputError("deform needs --m >= 1")
    for i in range(1, m + 1):
        viol = jacobi(gm, i).double.violations()
        run.absorb(_single("D^2 = 0", not viol, viol[:3] or None), f"J_{i}")
    DR = deformation_ring(gm, m)
    run.absorb(DR.report, f"R_{m}")
    layers = {}
    for (p, q), d in sorted(DR.J.double.dims.items()):
        layers.setdefault(str(-p), 0)
        layers[str(-p)] += d
    R = DR.ring
    run.results["lambda_layer_dims"] = layers
    run.results["V_dim"] = DR.V.dim
    run.results["R_dim"] = R.dim
    run.results["R_labels"] = list(R.labels)
    run.results["R_table"] = {f"{R.labels[i]}*{R.labels[j]}": {R.labels[k]: str(c) for k, c in sorted(v.items())}
                              for (i, j), v in sorted(R.table.items())}
    ob = obstruction(gm)
    run.results["obstruction"] = {"h1": ob["h1"], "h2": ob["h2"], "zero": ob["zero"], "matrix": ob["matrix"],
                                  "pairs": ob["pairs"]}
    if gm.module is not None:
        for i in range(0, m + 1):
            viol = jacobi_module(gm, i).double.violations()
            run.absorb(_single("D^2 = 0", not viol, viol[:3] or None), f"J_{i}(L,M)")
        P = poincare_module(gm, m)
        run.absorb(P.report, f"P_{m}")
        run.results["poincare"] = P.info


def cmd_trace_form(run: Run) -> None:
    mf = run.model
    if not _validate_geometric(run):
        return
    gm = mf.geometric_model(os.path.basename(run.path))
    mats = mf.representation().matrices if mf.has("representation") else None
    try:
        rep, data = trace_form_report(gm, run.eta, mats)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    run.absorb(rep, "trace form")
    data["obstruction_zero"] = obstruction(gm)["zero"]
    run.results.update(data)


HANDLERS: Dict[str, Callable[[Run], None]] = {
    "validate": cmd_validate, "cohomology": cmd_cohomology, "enveloping": cmd_enveloping, "artin": cmd_artin,
    "cartan": cmd_cartan, "deform": cmd_deform, "trace-form": cmd_trace_form,
}


# ---------------------------------------------------------------------------
# driver


def _parse_eta(text: Optional[str]) -> Optional[List[Fraction]]:
    if text is None:
        return None
    out = []
    for k, tok in enumerate(text.split(",")):
        tok = tok.strip()
        try:
            num, _, den = tok.partition("/")
            out.append(Fraction(int(num), int(den) if den else 1))
        except (ValueError, ZeroDivisionError):
            raise InputError(f"--eta entry {k + 1} is not a rational number: {tok!r}") from None
    return out


def execute(command: str, path: str, m: Optional[int] = None, eta: Optional[str] = None) -> Tuple[dict, int]:
    """Run one command; returns ``(report document, exit status)``. Input errors raise :class:`InputError`."""
    if command not in HANDLERS:
        raise InputError(f"unknown command {command!r}")
    if m is not None and m < 0:
        raise InputError("--m must be nonnegative")
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        model = parse(data)
    except (ModelSyntaxError, ModelSemanticError) as exc:
        raise InputError(f"{path}: {exc}") from None
    run = Run(command, model, path, m, _parse_eta(eta))
    try:
        HANDLERS[command](run)
    except ModelSemanticError as exc:
        raise InputError(f"{path}: {exc}") from None
    except InvalidModelError as exc:
        run.checks.append({"name": "model: valid", "status": "fail", "witness": str(exc)})
    doc = run.document()
    return doc, 0 if run.ok else 1


def render(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def summary(doc: dict) -> str:
    lines = [f"{doc['command']} {doc['model']}"]
    for c in doc["checks"]:
        lines.append(f"  {c['status'].upper():4} {c['name']}")
    n_fail = sum(c["status"] == "fail" for c in doc["checks"])
    lines.append("all checks passed" if not n_fail else f"{n_fail} check(s) failed")
    return "\n".join(lines) + "\n"


def main(argv: Optional[List[str]] = None) -> int:
    ap = argparse.ArgumentParser(prog="defcalc", description=__doc__.splitlines()[0])
    ap.add_argument("command", help="one of: " + ", ".join(COMMANDS))
    ap.add_argument("--model", required=True, metavar="FILE")
    ap.add_argument("--m", type=int, default=None, metavar="N")
    ap.add_argument("--eta", default=None, metavar="c1,c2,...")
    ap.add_argument("--json", default=None, metavar="PATH", help="write the JSON report here ('-' for stdout)")
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        doc, status = execute(args.command, args.model, args.m, args.eta)
    except InputError as exc:
        print(f"defcalc: error: {exc}", file=sys.stderr)
        return 2
    text = render(doc)
    if args.json == "-":
        sys.stdout.write(text)
    else:
        sys.stdout.write(summary(doc))
        if args.json:
            with open(args.json, "w", encoding="utf-8") as fh:
                fh.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
