"""Analysis reports as plain data (JSON-ready) and as text."""

from __future__ import annotations

from fractions import Fraction

from . import __version__
from .chain import ChainReport
from .expr import default_seed
from .legendre import HJSystem, equations_of_motion
from .model import ACTION, Model

SCHEMA = 1


def _number(v: Fraction):
    if v is None:
        return None
    return int(v) if v.denominator == 1 else float(v)


def model_dict(model: Model) -> dict:
    return {
        "name": model.name,
        "coordinates": list(model.coordinates),
        "time": model.time,
        "constants": {k: _number(v) for k, v in model.constants.items()},
        "assumptions": [str(a) for a in model.assumptions],
        "lagrangian": str(model.lagrangian),
    }


def system_dict(sys: HJSystem) -> dict:
    eom = equations_of_motion(sys)
    variables = [d.coordinate for d in sys.dynamical] + [d.momentum for d in sys.dynamical]
    variables += list(sys.parameter_momenta) + [ACTION]
    flow = []
    for v in variables:
        for alpha in sys.parameter_names:
            coef = eom[(v, alpha)]
            if not coef.is_zero_constant():
                flow.append({"variable": v, "parameter": alpha, "coefficient": str(coef)})
    return {
        "rank": sys.rank,
        "dynamical": [{"coordinate": d.coordinate, "momentum": d.momentum,
                       "velocity": str(d.velocity)} for d in sys.dynamical],
        "parameters": [{"name": p.name, "momentum": p.momentum} for p in sys.parameters],
        "momenta": {c: str(e) for c, e in sys.momenta.items()},
        "h0": str(sys.h0),
        "hamiltonians": {p: str(h) for p, h in zip(sys.parameter_names, sys.hamiltonians)},
        "extended": {p: str(h) for p, h in zip(sys.parameter_names, sys.extended)},
        "flow": flow,
    }


def chain_dict(report: ChainReport) -> dict:
    return {
        "status": report.status,
        "message": report.message,
        "offending": None if report.offending is None else str(report.offending),
        "constraints": [{"label": c.label, "expr": str(c.expr), "provenance": c.provenance,
                         "classification": c.classification} for c in report.constraints],
        "frozen": [{"parameter": f.parameter, "coefficient": str(f.coefficient),
                    "reason": f.reason} for f in report.frozen],
        "branches": [{"parameter": b.parameter, "sign": b.sign, "value": str(b.value),
                      "source": b.source, "admissible": b.admissible} for b in report.branches],
        "reduced_h0": [{"branch": b.sign, "expr": str(h)}
                       for b, h in zip(report.branches, report.reduced_h0)],
        "discrepancies": [{"branch": d.branch, "engine": str(d.engine),
                           "reference": str(d.reference), "verdict": d.verdict}
                          for d in report.discrepancies],
        "brackets": [{"first": b.first, "second": b.second, "bracket": str(b.bracket),
                      "verdict": b.verdict} for b in report.brackets],
    }


def analysis_dict(model: Model, sys: HJSystem, report: ChainReport) -> dict:
    return {
        "schema": SCHEMA,
        "tool": "hjred",
        "version": __version__,
        "seed": default_seed(),
        "model": model_dict(model),
        "system": system_dict(sys),
        "chain": chain_dict(report),
    }


def analysis_text(data: dict) -> str:
    m, s, c = data["model"], data["system"], data["chain"]
    lines = [f"model {m['name']}: coordinates {' '.join(m['coordinates'])}; time {m['time']}"]
    if m["assumptions"]:
        lines.append("assumptions: " + ", ".join(m["assumptions"]))
    lines.append(f"lagrangian: {m['lagrangian']}")
    lines.append("")
    lines.append(f"hessian rank {s['rank']}")
    lines.append("dynamical: " + (", ".join(d["coordinate"] for d in s["dynamical"]) or "none"))
    lines.append("parameters: " + ", ".join(p["name"] for p in s["parameters"]))
    lines.append("momenta:")
    names = {d["coordinate"]: d["momentum"] for d in s["dynamical"]}
    names.update({p["name"]: p["momentum"] for p in s["parameters"]})
    for coord, expr in s["momenta"].items():
        lines.append(f"  {names[coord]} = {expr}")
    lines.append("velocities:")
    for d in s["dynamical"]:
        lines.append(f"  {d['coordinate']}_d = {d['velocity']}")
    lines.append(f"H0 = {s['h0']}")
    for i, (p, h) in enumerate(s["extended"].items()):
        lines.append(f"H'_{i} = {h}")
    lines.append("flow coefficients:")
    for f in s["flow"]:
        lines.append(f"  d{f['variable']} / d{f['parameter']} = {f['coefficient']}")
    lines.append("")
    lines.append(f"status: {c['status']}")
    if c["message"]:
        lines.append(f"  {c['message']}")
    lines.append("constraints:")
    for con in c["constraints"]:
        cls = f" [{con['classification']}]" if con["classification"] else ""
        lines.append(f"  {con['label']} = {con['expr']}  ({con['provenance']}){cls}")
    for f in c["frozen"]:
        lines.append(f"frozen: d{f['parameter']} = 0 ({f['reason']})")
    for b in c["branches"]:
        tag = "admissible" if b["admissible"] else "excluded by assumptions"
        lines.append(f"branch {b['sign']}: {b['parameter']} = {b['value']} ({tag})")
    for r in c["reduced_h0"]:
        lines.append(f"reduced H0 [{r['branch']}] = {r['expr']}")
    for d in c["discrepancies"]:
        if d["verdict"] == "match":
            lines.append(f"reference [{d['branch']}]: matches {d['reference']}")
        else:
            lines.append(f"DISCREPANCY [{d['branch']}]: reference {d['reference']} vs engine "
                         f"{d['engine']} ({d['verdict']})")
    if c["brackets"]:
        lines.append("brackets:")
        for b in c["brackets"]:
            lines.append(f"  {{{b['first']}, {b['second']}}} = {b['bracket']}  [{b['verdict']}]")
    lines.append("")
    lines.append(f"hjred {data['version']} seed {data['seed']}")
    return "\n".join(lines) + "\n"
