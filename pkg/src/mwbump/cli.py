"""Command-line front end.

Subcommands: gen | constant | apply | norm | verify | report.  A JSON config
file (--config) provides the base options; command-line flags win on
conflict.  Unknown config keys are rejected so experiment manifests stay
reproducible.  Outputs are pure functions of (config, input files).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config as runtime
from .constants import (
    ConstantReport,
    bump_constant,
    bump_constant_reducing,
    fujii_wilson_ainfty,
    matrix_ap,
    rh_exponents,
    scalar_ainfty_sup,
    two_weight_apq,
)
from .dyadic import Cube, sparse_sets
from .errors import DomainError
from .operators import OperatorSpec
from .suites import SUITES, run_suite
from .svg import svg_curve, svg_scatter
from .verify import estimate_norm, weak_norm_estimate
from .weights import (
    WeightField,
    gen_power_weight,
    gen_random_field,
    save_scalar_field,
)
from .young import YoungFn

_SCHEMAS = {
    "gen": {"generator", "d", "L", "n", "gamma", "center", "rotation",
            "kappa", "lam", "seed", "out"},
    "constant": {"name", "U", "V", "p", "q", "alpha", "phi", "psi",
                 "variant", "census", "literal_inner", "enforce_b",
                 "n_dirs", "out"},
    "apply": {"kind", "U", "V", "p", "q", "alpha", "phi", "psi", "t",
              "mode", "f", "cubes", "family", "seed", "out"},
    "norm": {"kind", "U", "V", "p", "q", "alpha", "phi", "psi", "t",
             "mode", "cubes", "family", "budget", "sweeps", "weak",
             "seed", "out"},
    "verify": {"suite", "suite_config", "seed", "out", "plot"},
    "report": {"inputs", "out", "plot"},
}


def _validate_config(cmd, cfg):
    unknown = set(cfg) - _SCHEMAS[cmd]
    if unknown:
        raise DomainError(f"unknown config keys for {cmd}: {sorted(unknown)}")
    return cfg


def _merged_config(args, keys):
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg.update(json.load(fh))
    for key in keys:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            cfg[key] = val
    return _validate_config(args.command, cfg)


def _young_from(cfg, key):
    block = cfg.get(key)
    if block is None:
        return None
    if isinstance(block, str):
        block = json.loads(block)
    return YoungFn.from_json_dict(block)


def _cubes_from(block, d):
    cubes = []
    for item in block:
        k, m = item
        cubes.append(Cube((0,) * d, int(k),
                          tuple(int(x) for x in np.atleast_1d(m))))
    return cubes


def _load_field(path):
    return WeightField.load(path)


def _function_from(cfg, W: WeightField, seed):
    block = cfg.get("f", {"kind": "ones"})
    if isinstance(block, str):
        block = json.loads(block)
    kind = block.get("kind", "ones")
    N, n = W.ncells, W.n
    if kind == "ones":
        f = np.zeros((N, n))
        f[:, 0] = 1.0
        return f
    if kind == "random":
        rng = np.random.default_rng(block.get("seed", seed))
        return rng.normal(size=(N, n))
    if kind == "mws1":
        from .weights import load_scalar_field
        v, d, L, _ = load_scalar_field(block["path"])
        if (d, L) != (W.d, W.L) or n != 1:
            raise DomainError("scalar input mismatches field geometry")
        return v[:, None]
    raise DomainError(f"unknown function kind {kind!r}")


def _out_dir(args):
    out = Path(getattr(args, "out", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen(args):
    cfg = _merged_config(args, ("generator", "d", "L", "n", "gamma",
                                "kappa", "lam", "seed", "out"))
    gen = cfg.get("generator", "random")
    d, L, n = int(cfg.get("d", 1)), int(cfg.get("L", 6)), int(cfg.get("n", 2))
    seed = int(cfg.get("seed", 0))
    if gen == "power":
        W = gen_power_weight(d, L, n, cfg.get("gamma", 0.0),
                             center=cfg.get("center"),
                             rotation=cfg.get("rotation"))
    elif gen == "random":
        W = gen_random_field(d, L, n, seed, kappa=cfg.get("kappa", 4.0),
                             lam=cfg.get("lam", 0.5))
    else:
        raise DomainError(f"unknown generator {gen!r}")
    out = Path(cfg.get("out", f"weight_{gen}.mwf1"))
    if out.suffix != ".mwf1":  # a directory: use the default filename inside
        out.mkdir(parents=True, exist_ok=True)
        out = out / f"weight_{gen}.mwf1"
    W.save(out)
    provenance = {"generator": gen, "seed": seed, "d": d, "L": L, "n": n,
                  "meta": W.meta, "out": str(out)}
    Path(str(out) + ".json").write_text(
        json.dumps(provenance, sort_keys=True, separators=(",", ":")))
    print(json.dumps(provenance, sort_keys=True))
    return 0


def _compute_constant(cfg):
    name = cfg.get("name", "matrix_ap")
    U = _load_field(cfg["U"])
    V = _load_field(cfg["V"]) if "V" in cfg else U
    p = float(cfg.get("p", 2.0))
    q = float(cfg.get("q", p))
    alpha = float(cfg.get("alpha", 0.0))
    census = cfg.get("census", "dyadic")
    phi = _young_from(cfg, "phi")
    psi = _young_from(cfg, "psi")
    if name == "matrix_ap":
        return matrix_ap(U, p, census=census)
    if name == "two_weight_apq":
        return two_weight_apq(U, V, p, q, alpha, census=census)
    if name == "bump":
        return bump_constant(U, V, p, q, alpha, phi, psi,
                             variant=cfg.get("variant", "double"),
                             census=census,
                             enforce_b=cfg.get("enforce_b", True),
                             literal_inner=cfg.get("literal_inner", False))
    if name == "bump_reducing":
        return bump_constant_reducing(U, V, p, q, alpha, phi, psi,
                                      variant=cfg.get("variant", "double"),
                                      enforce_b=cfg.get("enforce_b", True))
    if name == "fujii_wilson":
        return fujii_wilson_ainfty(U.scalar(), U.d, U.L, census=census)
    if name == "scalar_ainfty":
        return scalar_ainfty_sup(U, p, n_dirs=int(cfg.get("n_dirs", 64)),
                                 census=census)
    if name == "rh_exponents":
        s, r = rh_exponents(U, p, n_dirs=int(cfg.get("n_dirs", 16)),
                            census=census)
        return ConstantReport(name="rh_exponents", value=s, cube="",
                              method="definitional",
                              params={"p": p}, extras={"s": s, "r": r})
    raise DomainError(f"unknown constant {name!r}")


def cmd_constant(args):
    cfg = _merged_config(args, ("name", "U", "V", "p", "q", "alpha",
                                "census", "out"))
    rep = _compute_constant(cfg)
    print(ConstantReport.CSV_HEADER)
    print(rep.csv_row())
    if cfg.get("out"):
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{rep.name}.json").write_text(
            json.dumps(rep.to_json_dict(), sort_keys=True,
                       separators=(",", ":")))
        (out / f"{rep.name}.csv").write_text(
            ConstantReport.CSV_HEADER + "\n" + rep.csv_row() + "\n")
    return 0


def _operator_from(cfg, seed):
    U = _load_field(cfg["U"]) if "U" in cfg else None
    V = _load_field(cfg["V"]) if "V" in cfg else U
    if U is None:
        U = V
    d = U.d
    fam = None
    if cfg.get("family") is not None:
        fam = sparse_sets(_cubes_from(cfg["family"], d), d, U.L)
    cubes = _cubes_from(cfg["cubes"], d) if cfg.get("cubes") else None
    spec = OperatorSpec(
        kind=cfg.get("kind", "matrix_maximal"), U=U, V=V,
        p=float(cfg.get("p", 2.0)),
        q=float(cfg.get("q", cfg.get("p", 2.0))),
        alpha=float(cfg.get("alpha", 0.0)),
        phi=_young_from(cfg, "phi"), psi=_young_from(cfg, "psi"),
        cubes=cubes, family=fam, t=float(cfg.get("t", 0.5)),
        mode=cfg.get("mode", "single_grid"))
    return spec, U, seed


def cmd_apply(args):
    cfg = _merged_config(args, ("kind", "U", "V", "p", "q", "alpha",
                                "mode", "seed", "out"))
    seed = int(cfg.get("seed", 0))
    spec, U, seed = _operator_from(cfg, seed)
    f = _function_from(cfg, U, seed)
    out_field = spec.apply(f)
    mag = out_field if np.asarray(out_field).ndim == 1 else \
        np.linalg.norm(out_field, axis=1)
    out = cfg.get("out", "applied.mws1")
    save_scalar_field(out, mag, U.d, U.L)
    info = {"kind": spec.kind, "method": "definitional", "out": str(out),
            "p": spec.p, "q": spec.q, "alpha": spec.alpha, "seed": seed}
    print(json.dumps(info, sort_keys=True))
    return 0


def cmd_norm(args):
    cfg = _merged_config(args, ("kind", "U", "V", "p", "q", "alpha",
                                "budget", "sweeps", "weak", "seed", "out"))
    seed = int(cfg.get("seed", 0))
    spec, U, seed = _operator_from(cfg, seed)
    fn = weak_norm_estimate if cfg.get("weak") else estimate_norm
    est = fn(spec, budget=int(cfg.get("budget", 8)), seed=seed,
             sweeps=int(cfg.get("sweeps", 3)))
    info = {"kind": spec.kind, "value": est.value, "trials": est.trials,
            "trace": est.trace, "method": "estimated", "seed": seed,
            "weak": bool(cfg.get("weak", False))}
    print(json.dumps(info, sort_keys=True))
    if cfg.get("out"):
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        (out / "norm.json").write_text(
            json.dumps(info, sort_keys=True, separators=(",", ":")))
    return 0


def _plot_report(rep_obj, out):
    for c in rep_obj["checks"]:
        info = c.get("info", {})
        if "log_constants" in info:
            xs, ys = info["log_constants"], info["log_norms"]
            slope = np.polyfit(xs, ys, 1)
            svg = svg_scatter(xs, ys, title=c["check"],
                              xlabel="log constant", ylabel="log norm",
                              line=(float(slope[0]), float(slope[1])))
            (out / f"{c['check']}.svg").write_text(svg)
        if "constants" in info and len(info["constants"]) >= 2:
            ys = info["constants"]
            svg = svg_curve(list(range(len(ys))), ys, title=c["check"],
                            xlabel="refinement step", ylabel="ratio")
            (out / f"{c['check']}.svg").write_text(svg)
        if "deviations" in info:
            ys = info["deviations"]
            svg = svg_curve(list(range(len(ys))), ys, title=c["check"],
                            xlabel="ladder step", ylabel="deviation")
            (out / f"{c['check']}.svg").write_text(svg)


def cmd_verify(args):
    cfg = _merged_config(args, ("suite", "seed", "out", "plot"))
    names = [cfg.get("suite", "holder")]
    if names[0] == "all":
        names = sorted(SUITES)
    sub = dict(cfg.get("suite_config", {}))
    if "seed" in cfg:
        sub.setdefault("seed", int(cfg["seed"]))
    worst = 0
    for name in names:
        rep = run_suite(name, sub)
        print(rep.summary())
        if cfg.get("out"):
            out = Path(cfg["out"])
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{name}.json").write_text(rep.to_json())
            if cfg.get("plot"):
                _plot_report(json.loads(rep.to_json()), out)
        if not rep.passed:
            print(f"reproducer: mwbump verify --suite {name} "
                  f"--seed {sub.get('seed', 0)}")
            worst = 1
    return worst


def cmd_report(args):
    cfg = _merged_config(args, ("inputs", "out", "plot"))
    inputs = cfg.get("inputs", [])
    if isinstance(inputs, str):
        inputs = [inputs]
    worst = 0
    for path in inputs:
        obj = json.loads(Path(path).read_text())
        status = "PASS" if obj.get("passed") else "FAIL"
        print(f"suite {obj['suite']}: {status} "
              f"({sum(c['passed'] for c in obj['checks'])}/"
              f"{len(obj['checks'])} checks)")
        for c in obj["checks"]:
            mark = "ok " if c["passed"] else "FAIL"
            print(f"  [{mark}] {c['check']}: value={c['value']:.6g} "
                  f"{c['direction']} bound={c['bound']:.6g}")
        if not obj.get("passed"):
            worst = 1
        if cfg.get("out") and cfg.get("plot"):
            out = _out_dir(args)
            _plot_report(obj, out)
    return worst


def build_parser():
    ap = argparse.ArgumentParser(
        prog="mwbump",
        description="matrix-weight constants, operators, and verification")
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--census", choices=("dyadic", "shifted", "brute"),
                    default=None)
    ap.add_argument("--out", default=None)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate weight fields")
    g.add_argument("--generator", choices=("power", "random"))
    g.add_argument("--d", type=int)
    g.add_argument("--L", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--gamma", type=float)
    g.add_argument("--kappa", type=float)
    g.add_argument("--lam", type=float)

    c = sub.add_parser("constant", help="compute weight constants")
    c.add_argument("--name")
    c.add_argument("--U")
    c.add_argument("--V")
    c.add_argument("--p", type=float)
    c.add_argument("--q", type=float)
    c.add_argument("--alpha", type=float)

    a = sub.add_parser("apply", help="apply an operator to a function")
    a.add_argument("--kind")
    a.add_argument("--U")
    a.add_argument("--V")
    a.add_argument("--p", type=float)
    a.add_argument("--q", type=float)
    a.add_argument("--alpha", type=float)
    a.add_argument("--mode")

    n = sub.add_parser("norm", help="estimate operator norms")
    n.add_argument("--kind")
    n.add_argument("--U")
    n.add_argument("--V")
    n.add_argument("--p", type=float)
    n.add_argument("--q", type=float)
    n.add_argument("--alpha", type=float)
    n.add_argument("--budget", type=int)
    n.add_argument("--sweeps", type=int)
    n.add_argument("--weak", action="store_const", const=True)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite")
    v.add_argument("--plot", action="store_const", const=True)

    r = sub.add_parser("report", help="summarize suite reports")
    r.add_argument("--inputs", nargs="+")
    r.add_argument("--plot", action="store_const", const=True)
    return ap


_COMMANDS = {"gen": cmd_gen, "constant": cmd_constant, "apply": cmd_apply,
             "norm": cmd_norm, "verify": cmd_verify, "report": cmd_report}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.workers:
        runtime.set_workers(args.workers)
    try:
        return _COMMANDS[args.command](args)
    except (DomainError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
