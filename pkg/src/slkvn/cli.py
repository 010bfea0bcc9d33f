"""Command-line driver: JSON config in, deterministic JSON report out.

    slkvn <command> --config cfg.json [--out report.json] [--tol T] [--window lo,hi]

Exit codes: 0 success, 2 mathematical refusal (or an invalid config),
1 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from . import __version__
from .boundary import boundary_frame, boundary_values
from .classify import deficiency_index, classify_endpoint
from .coeffs import descriptor_from_mapping, make_problem
from .errors import MathematicalRefusal, NumericalFailure, ParameterError, SLError
from .extensions import (coupled, friedrichs, krein, no_conditions, rk_from_null_basis, rk_from_principal,
                         separated, strict_positivity_gate)
from .oracles import (bessel_rk_closed, blackhole_rk_closed, classification_closed, compare, jacobi_case,
                      jacobi_eigen_closed, jacobi_rk_closed)
from .spectra import eigenvalues

COMMANDS = ("classify", "frame", "bv", "friedrichs", "krein", "spectrum", "verify")
PROBLEM_KEYS = ("family", "alpha", "beta", "gamma", "b", "a", "p", "q", "r", "cutoff", "p0", "r0", "m", "M")

_scalar = {"type": ["number", "string"]}
SCHEMA = {
    "type": "object",
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "problem": {
            "type": "object",
            "properties": {"family": {"enum": ["bessel", "blackhole", "jacobi", "generic"]},
                           **{k: _scalar for k in PROBLEM_KEYS if k != "family"}},
        },
        "options": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "window": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "nodes": {"type": "integer", "minimum": 10},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "eps": {"type": "number", "exclusiveMinimum": 0},
                "g": {"type": "string"},
                "lam0": {"type": "number"},
                "method": {"enum": ["auto", "closed", "numeric"]},
                "verify": {"type": "boolean"},
                "out": {"type": "string"},
                "extension": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind"],
                    "properties": {
                        "kind": {"enum": ["friedrichs", "krein", "separated", "coupled", "none"]},
                        "gamma": {"type": ["number", "null"]},
                        "delta": {"type": ["number", "null"]},
                        "phi": {"type": "number"},
                        "R": {"type": "array", "minItems": 2, "maxItems": 2,
                              "items": {"type": "array", "minItems": 2, "maxItems": 2,
                                        "items": {"type": "number"}}},
                    },
                },
            },
        },
        **{k: _scalar for k in PROBLEM_KEYS if k != "family"},
        "family": {"enum": ["bessel", "blackhole", "jacobi", "generic"]},
    },
    "required": ["command"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class RunConfig:
    problem: dict
    command: str
    options: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"problem": dict(self.problem), "command": self.command, "options": dict(self.options)}


class ConfigError(ParameterError):
    pass


def _path_message(err: jsonschema.ValidationError) -> str:
    path = ".".join(str(p) for p in err.absolute_path)
    if err.validator == "required":
        missing = err.message.split("'")[1]
        return f"{path + '.' if path else ''}{missing}: required"
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        key = extra[0] if extra else "?"
        return f"{path + '.' if path else ''}{key}: unknown key"
    return f"{path or '<root>'}: {err.message}"


def parse_config(text) -> RunConfig:
    """Validate a JSON object (text or mapping) and normalize it to the nested form."""
    data = json.loads(text) if isinstance(text, (str, bytes)) else dict(text)
    if not isinstance(data, dict):
        raise ConfigError("<root>: config must be a JSON object")
    errors = sorted(jsonschema.Draft7Validator(SCHEMA).iter_errors(data),
                    key=lambda e: (len(list(e.absolute_path)), list(map(str, e.absolute_path))))
    if errors:
        raise ConfigError(_path_message(errors[0]))
    flat = {k: data[k] for k in PROBLEM_KEYS if k in data}
    if flat and "problem" in data:
        raise ConfigError(f"{sorted(flat)[0]}: problem keys go either inside 'problem' or at the top level")
    problem = dict(data.get("problem", flat))
    try:
        descriptor_from_mapping(problem)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(problem, data["command"], dict(data.get("options", {})))


# ---------------------------------------------------------------- serialization

def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return '"nan"'
        if math.isinf(v):
            return '"inf"' if v > 0 else '"-inf"'
        if v == 0:
            return "0.0"
        s = format(v, ".17g")
        return s if any(c in s for c in ".en") else s + ".0"
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, dict):
        items = sorted((str(k), val) for k, val in v.items())
        return "{" + ", ".join(f"{json.dumps(k)}: {_fmt(val)}" for k, val in items) + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(x) for x in (v.tolist() if isinstance(v, np.ndarray) else v)) + "]"
    if hasattr(v, "as_dict"):
        return _fmt(v.as_dict())
    return json.dumps(str(v))


def serialize(obj) -> str:
    """Sorted keys, floats with 17 significant digits, trailing newline."""
    if isinstance(obj, RunConfig):
        obj = obj.as_dict()
    return _fmt(obj) + "\n"


# ---------------------------------------------------------------- commands

def _class_dict(c):
    return {"kind": c.kind, "method": c.method, "evidence": c.evidence}


def _extension_from(problem, frame, spec: dict | None, eps):
    spec = spec or {"kind": "friedrichs"}
    kind = spec["kind"]
    if kind == "friedrichs":
        return friedrichs(problem, frame)
    if kind == "krein":
        return krein(problem, eps, frame=frame)
    if kind == "none":
        return no_conditions()
    if kind == "separated":
        return separated(spec.get("gamma"), spec.get("delta"))
    if "phi" not in spec or "R" not in spec:
        raise ConfigError("options.extension: coupled conditions need phi and R")
    return coupled(spec["phi"], spec["R"])


def _spectral_dict(res):
    return {"window": list(res.window),
            "eigenvalues": [{"eigenvalue": e.value, "multiplicity": e.multiplicity,
                             "residual": e.residual, "confidence": e.confidence} for e in res.eigenvalues]}


def _cmd_classify(problem, opts):
    d = deficiency_index(problem, opts.get("method", "auto"))
    return {"a": _class_dict(d.classes[0]), "b": _class_dict(d.classes[1]), "deficiency": d.value}


def _cmd_frame(problem, opts):
    return boundary_frame(problem, opts.get("lam0", 0.0), opts.get("method", "auto")).describe()


def _cmd_bv(problem, opts):
    if "g" not in opts:
        raise ConfigError("options.g: required for bv")
    frame = boundary_frame(problem, opts.get("lam0", 0.0))
    bv = boundary_values(problem, frame, opts["g"])
    return {"a": {"g": bv.ga, "gp": bv.gpa}, "b": {"g": bv.gb, "gp": bv.gpb}, "diagnostics": bv.diagnostics}


def _cmd_friedrichs(problem, opts):
    frame = boundary_frame(problem)
    ext = friedrichs(problem, frame)
    gate = strict_positivity_gate(problem, opts.get("eps", 1e-6), frame)
    return {"extension": ext.as_dict(), "positivity": gate.as_dict()}


def _cmd_krein(problem, opts):
    frame = boundary_frame(problem)
    ext = krein(problem, opts.get("eps", 1e-6), verify=opts.get("verify", False), frame=frame)
    out = {"extension": ext.as_dict(), "diagnostics": ext.diagnostics}
    if ext.kind == "coupled":
        out["det"] = float(np.linalg.det(np.array(ext.R)))
    return out


def _cmd_spectrum(problem, opts):
    frame = boundary_frame(problem)
    ext = _extension_from(problem, frame, opts.get("extension"), opts.get("eps", 1e-6))
    res = eigenvalues(problem, frame, ext, opts.get("window", [0.0, 100.0]), nodes=opts.get("nodes", 400))
    return {"extension": ext.as_dict(), "spectrum": _spectral_dict(res)}


def closed_krein(problem):
    """Closed-form Krein matrix for a built-in family, or None when none applies."""
    P = problem.params
    if problem.family == "bessel" and P["gamma"] < 1:
        return bessel_rk_closed(P["alpha"], P["beta"], P["gamma"], P["b"])
    if problem.family == "blackhole" and P["alpha"] >= 1 and P["beta"] > 2 * P["alpha"] - 3:
        return blackhole_rk_closed()
    if problem.family == "jacobi" and jacobi_case(P["alpha"], P["beta"]):
        return jacobi_rk_closed(P["alpha"], P["beta"])
    return None


def verify_reports(problem, tol=1e-6, eps=1e-6):
    """Pipeline vs closed forms for the given built-in problem."""
    reports, notes = [], []
    if problem.family == "generic":
        raise ConfigError("verify needs a built-in family with closed forms")
    closed = classification_closed(problem.family, problem.params)
    for end in "ab":
        c = classify_endpoint(problem, end, method="numeric")
        same = c.kind == closed[end]
        reports.append({"quantity": f"class({end})", "closed": closed[end], "numeric": c.kind, "passed": same})
    frame = boundary_frame(problem)
    R = closed_krein(problem)
    if R is not None:
        ext = krein(problem, eps, frame=frame)
        reports.append(compare("R_K (principal solutions)", R, np.array(ext.R), tol).as_dict())
        reports.append(compare("R_K (null basis)", R, rk_from_null_basis(problem, frame), tol).as_dict())
        reports.append(compare("det R_K", [1.0], [np.linalg.det(np.array(ext.R))], tol).as_dict())
    else:
        notes.append("no closed-form Krein matrix for these parameters")
    if problem.family == "jacobi":
        P = problem.params
        if max(P["alpha"], P["beta"]) < 1:
            # Jacobi polynomials: g^[1] = 0 at regular ends, g~ = 0 at limit-circle ends
            ang = lambda e: math.pi / 2 if e < 0 else 0.0
            ext = separated(ang(P["beta"]), ang(P["alpha"]))
            top = jacobi_eigen_closed(P["alpha"], P["beta"], 3)
            res = eigenvalues(problem, frame, ext, (-0.5, top + 0.5), nodes=200)
            want = [jacobi_eigen_closed(P["alpha"], P["beta"], n) for n in range(4)]
            got = res.values[:4]
            if len(got) == 4:
                rep = compare("Jacobi eigenvalues n=0..3", want, got, tol).as_dict()
            else:
                rep = {"quantity": "Jacobi eigenvalues n=0..3", "closed": want, "numeric": got, "passed": False}
            reports.append(rep)
    return reports, notes


def _cmd_verify(problem, opts):
    reports, notes = verify_reports(problem, opts.get("tol", 1e-6), opts.get("eps", 1e-6))
    return {"reports": reports, "notes": notes, "all_passed": all(r["passed"] for r in reports)}


_DISPATCH = {"classify": _cmd_classify, "frame": _cmd_frame, "bv": _cmd_bv, "friedrichs": _cmd_friedrichs,
             "krein": _cmd_krein, "spectrum": _cmd_spectrum, "verify": _cmd_verify}


def run(config: RunConfig) -> tuple[dict, int]:
    """Execute a validated config; returns (report, exit code)."""
    report = {"version": __version__, "config": config.as_dict(), "command": config.command,
              "result": None, "error": None}
    try:
        problem = make_problem(config.problem)
        report["result"] = _DISPATCH[config.command](problem, config.options)
        code = 0
        if config.command == "verify" and not report["result"]["all_passed"]:
            code = 1
    except MathematicalRefusal as exc:
        report["error"] = {"category": "refusal", "type": type(exc).__name__, "message": str(exc)}
        code = 2
    except NumericalFailure as exc:
        report["error"] = {"category": "numerical", "type": type(exc).__name__, "message": str(exc)}
        code = 1
    except (ParameterError, ValueError) as exc:
        report["error"] = {"category": "config", "type": type(exc).__name__, "message": str(exc)}
        code = 2
    except (SLError, ArithmeticError) as exc:
        report["error"] = {"category": "numerical", "type": type(exc).__name__, "message": str(exc)}
        code = 1
    return report, code


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="slkvn", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True)
    ap.add_argument("--out")
    ap.add_argument("--tol", type=float)
    ap.add_argument("--window", help="lo,hi")
    args = ap.parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("<root>: config must be a JSON object")
        data["command"] = args.command
        opts = dict(data.get("options", {}))
        if args.tol is not None:
            opts["tol"] = args.tol
        if args.window:
            try:
                lo, hi = (float(v) for v in args.window.split(","))
            except ValueError:
                raise ConfigError("--window: expected lo,hi") from None
            opts["window"] = [lo, hi]
        if opts:
            data["options"] = opts
        config = parse_config(data)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        sys.stderr.write(f"slkvn: {exc}\n")
        return 2
    report, code = run(config)
    text = serialize(report)
    out = args.out or config.options.get("out")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
