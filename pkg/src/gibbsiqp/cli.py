"""Command-line front end.

Every subcommand writes one JSON document (or CSV rows) to stdout or
``--out``. Output carries a config echo and the library version and no
timings, so identical configs give byte-identical files.
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__
from . import checks, circuit as cc, distill, hamiltonian, lindblad, markov, noise, repcode
from .core import CapacityError

DEFAULTS = {
    "circuit": None, "grid": None, "b_seed": 0, "beta": 1.0, "p_in": 0.05, "p_out": 0.0,
    "gadget": None, "rep": 9, "seed": 0, "samples": 100000, "trials": 100000,
    "out": None, "format": "json", "p": "0.1,0.25", "Bs": "3,5", "Ds": "2,3",
    "t_max": 20.0, "t_points": 50, "eps": 1e-3, "A": None, "B": None, "C": None,
    "lattice": None, "criterion": None, "check": None, "skip_slow": False, "list": False,
}

COMMANDS = ("gibbs-check", "davies", "mixing", "convex", "distill-sweep", "ft-pipeline",
            "repcode", "markov", "verify")


class ConfigError(ValueError):
    pass


def _add_circuit(p):
    p.add_argument("--circuit", metavar="PATH", help="circuit file")
    p.add_argument("--grid", metavar="WxH", help="cluster IQP circuit on a W x H grid")
    p.add_argument("--b-seed", type=int, dest="b_seed", metavar="S", help="seed for the T powers b")


def _add_common(p):
    p.add_argument("--config", metavar="PATH", help="JSON config; flags override it")
    p.add_argument("--seed", type=int, metavar="N")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=("json", "csv"))


def build_parser():
    parser = argparse.ArgumentParser(prog="gibbsiqp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("gibbs-check", help="Gibbs state vs noisy circuit output")
    _add_circuit(p)
    _add_common(p)
    p.add_argument("--beta", type=float, metavar="F")

    for name, text in (("davies", "Davies generator diagnostics"),
                       ("mixing", "mixing time and relative-entropy decay"),
                       ("convex", "convex decomposition of the rotated generator")):
        p = sub.add_parser(name, help=text)
        _add_circuit(p)
        _add_common(p)
        p.add_argument("--beta", type=float, metavar="F")
        if name != "convex":
            p.add_argument("--t-max", type=float, dest="t_max", metavar="F")
            p.add_argument("--t-points", type=int, dest="t_points", metavar="N")
        if name == "convex":
            p.add_argument("--eps", type=float, metavar="F")

    p = sub.add_parser("distill-sweep", help="exact and Monte Carlo gadget failure rates")
    _add_common(p)
    p.add_argument("--gadget", metavar="B,D", help="single gadget (overrides --Bs/--Ds)")
    p.add_argument("--Bs", metavar="LIST", help="comma-separated odd branching factors")
    p.add_argument("--Ds", metavar="LIST", help="comma-separated level counts")
    p.add_argument("--p", metavar="LIST", help="comma-separated input flip rates")
    p.add_argument("--trials", type=int, metavar="N")

    p = sub.add_parser("ft-pipeline", help="noisy sampling with distillation gadgets")
    _add_circuit(p)
    _add_common(p)
    p.add_argument("--beta", type=float, metavar="F")
    p.add_argument("--gadget", metavar="B,D")
    p.add_argument("--samples", type=int, metavar="N")

    p = sub.add_parser("repcode", help="repetition-code protected sampling")
    _add_circuit(p)
    _add_common(p)
    p.add_argument("--rep", type=int, metavar="R")
    p.add_argument("--p-in", type=float, dest="p_in", metavar="F")
    p.add_argument("--p-out", type=float, dest="p_out", metavar="F")
    p.add_argument("--samples", type=int, metavar="N")

    p = sub.add_parser("markov", help="CMI, Petz recovery and local indistinguishability")
    _add_circuit(p)
    _add_common(p)
    p.add_argument("--beta", type=float, metavar="F")
    p.add_argument("--A", metavar="LIST")
    p.add_argument("--B", metavar="LIST")
    p.add_argument("--C", metavar="LIST")
    p.add_argument("--lattice", metavar="line|WxH", help="geometry (defaults to the --grid)")

    p = sub.add_parser("verify", help="run the invariant and acceptance battery")
    _add_common(p)
    p.add_argument("--criterion", type=int, metavar="N", help="run acceptance criterion N only")
    p.add_argument("--check", metavar="NAME", help="run one named check")
    p.add_argument("--skip-slow", action="store_true", dest="skip_slow", default=None)
    p.add_argument("--list", action="store_true", default=None, help="list check names")
    return parser


def resolve(args):
    """Merge flags over the config file over defaults."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("cannot read config %s: %s" % (args.config, exc))
        if not isinstance(loaded, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise ConfigError("unknown config keys: %s" % ", ".join(sorted(unknown)))
        cfg.update(loaded)
    for key, val in vars(args).items():
        if key in DEFAULTS and val is not None:
            cfg[key] = val
    cfg["command"] = args.command
    _validate(cfg)
    return cfg


def _int_list(text, name):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError("%s must be a comma-separated list of integers" % name)


def _float_list(text, name):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError("%s must be a comma-separated list of numbers" % name)


def _gadget(text):
    vals = _int_list(text, "--gadget")
    if len(vals) != 2:
        raise ConfigError("--gadget expects B,D")
    B, D = vals
    if B < 3 or B % 2 == 0:
        raise ConfigError("gadget B must be odd and at least 3")
    if D < 2:
        raise ConfigError("gadget D must be at least 2")
    return B, D


def _validate(cfg):
    cmd = cfg["command"]
    if cfg["beta"] is None or not cfg["beta"] >= 0:
        raise ConfigError("beta must be non-negative")
    for key in ("p_in", "p_out"):
        if not 0 <= cfg[key] < 0.5:
            raise ConfigError("%s must lie in [0, 1/2)" % key)
    for p in _float_list(cfg["p"], "--p"):
        if not 0 <= p < 0.5:
            raise ConfigError("flip rates must lie in [0, 1/2)")
    if cfg["rep"] < 1 or cfg["rep"] % 2 == 0:
        raise ConfigError("repetition r must be odd and positive")
    for key in ("samples", "trials", "t_points"):
        if cfg[key] < 1:
            raise ConfigError("%s must be positive" % key)
    if cfg["format"] not in ("json", "csv"):
        raise ConfigError("format must be json or csv")
    if cmd == "ft-pipeline" and cfg["gadget"] is None:
        cfg["gadget"] = "3,3"
    if cfg["gadget"] is not None:
        _gadget(cfg["gadget"])
    if cmd == "distill-sweep":
        for B in _int_list(cfg["Bs"], "--Bs"):
            if B < 3 or B % 2 == 0:
                raise ConfigError("gadget B must be odd and at least 3")
        for D in _int_list(cfg["Ds"], "--Ds"):
            if D < 2:
                raise ConfigError("gadget D must be at least 2")
    if cmd not in ("distill-sweep", "verify"):
        if cfg["circuit"] is None and cfg["grid"] is None:
            raise ConfigError("give --circuit PATH or --grid WxH")
        if cfg["circuit"] is not None and cfg["grid"] is not None:
            raise ConfigError("--circuit and --grid are exclusive")


def _grid_dims(text):
    try:
        w, h = (int(v) for v in str(text).lower().split("x"))
    except ValueError:
        raise ConfigError("grid must look like WxH")
    if w < 1 or h < 1:
        raise ConfigError("grid dimensions must be positive")
    return w, h


def load_circuit(cfg):
    if cfg["circuit"] is not None:
        try:
            return cc.load_circuit(cfg["circuit"])
        except OSError as exc:
            raise ConfigError("cannot read circuit: %s" % exc)
    w, h = _grid_dims(cfg["grid"])
    return cc.build_iqp_cluster(w, h, cc.random_b(w * h, cfg["b_seed"]))


def _circuit_echo(c):
    return {"n": c.n, "depth": c.depth, "hash": cc.circuit_hash(c)}


# ------------------------------------------------------------ commands

def cmd_gibbs_check(cfg):
    c = load_circuit(cfg)
    if c.n > 10:
        raise CapacityError("gibbs-check supports n <= 10")
    hp = hamiltonian.build_parent(c)
    return {"circuit": _circuit_echo(c), "beta": cfg["beta"], "p": noise.beta_to_p(cfg["beta"]),
            "residual": noise.gibbs_equivalence_check(c, cfg["beta"]),
            "ell": hp.ell, "r": hp.r,
            "partition_function": hamiltonian.partition_function(c.n, cfg["beta"])}


def _generator(cfg):
    c = load_circuit(cfg)
    return c, lindblad.build_davies(hamiltonian.build_parent(c), cfg["beta"])


def _grid(cfg):
    return np.linspace(0.0, cfg["t_max"], cfg["t_points"])


def cmd_davies(cfg):
    c, g = _generator(cfg)
    disc = lindblad.discriminant_gap(g)
    db = {str(s): lindblad.detailed_balance_check(g, s).residual for s in (0.0, 0.5, 1.0)}
    out = {"circuit": _circuit_echo(c), "beta": cfg["beta"], "jumps": len(g.jumps),
           "fixed_point_residual": float(np.abs(g.apply(g.gibbs)).sum()),
           "detailed_balance": db, "gap": disc.gap,
           "max_imag_eigenvalue": float(np.abs(np.linalg.eigvals(g.superop).imag).max())}
    if c.n <= 4:
        diag = lindblad.mixing_diagnostics(g, _grid(cfg))
        out["halving_time"] = diag.halving_time
        out["mixing_time_bound"] = lindblad.mixing_time_bound(g, disc.gap)
        cd = lindblad.convex_decomposition(g)
        out["q"] = cd.q
        out["identity_residual"] = cd.identity_residual
    return out


def cmd_mixing(cfg):
    c, g = _generator(cfg)
    gap = lindblad.discriminant_gap(g).gap
    diag = lindblad.mixing_diagnostics(g, _grid(cfg))
    return {"circuit": _circuit_echo(c), "beta": cfg["beta"], "gap": gap,
            "halving_time": diag.halving_time, "mixing_time_bound": lindblad.mixing_time_bound(g, gap),
            "fitted_rate": diag.fitted_rate, "monotone": diag.monotone,
            "entropy_curve": [{"t": t, "D": d} for t, d in diag.entropy_curve]}


def cmd_convex(cfg):
    c, g = _generator(cfg)
    cd = lindblad.convex_decomposition(g, cfg["eps"])
    return {"circuit": _circuit_echo(c), "beta": cfg["beta"], "ell": g.hp.ell, "q": cd.q,
            "identity_residual": cd.identity_residual,
            "rest_fixed_point_residual": cd.rest_fixed_point_residual,
            "eps": cfg["eps"], "min_choi_eig": cd.rest_cptp.min_choi_eig,
            "rest_cptp": bool(cd.rest_cptp.is_cp and cd.rest_cptp.is_tp)}


def cmd_distill_sweep(cfg):
    if cfg["gadget"] is not None:
        B, D = _gadget(cfg["gadget"])
        Bs, Ds = [B], [D]
    else:
        Bs, Ds = _int_list(cfg["Bs"], "--Bs"), _int_list(cfg["Ds"], "--Ds")
    rows = distill.sweep(Bs, Ds, _float_list(cfg["p"], "--p"), cfg["trials"], cfg["seed"])
    for row in rows:
        row["sigma"] = abs(row["mc_rate"] - row["exact_rate"]) / row["stderr"] if row["stderr"] else 0.0
    return {"rows": rows}


def cmd_ft_pipeline(cfg):
    c = load_circuit(cfg)
    B, D = _gadget(cfg["gadget"])
    ft = distill.assemble_ft_circuit(c, B, D)
    res = distill.ft_pipeline(ft, cfg["beta"], cfg["seed"], cfg["samples"])
    return {"circuit": _circuit_echo(c), "B": B, "D": D, "p": res.p, "tvd": res.tvd,
            "failure_bound": res.failure_bound, "stderr": res.stderr,
            "allowed": res.failure_bound + 3 * res.stderr,
            "within_bound": res.tvd <= res.failure_bound + 3 * res.stderr,
            "total_qubits": ft.total_bits, "samples": cfg["samples"]}


def cmd_repcode(cfg):
    c = load_circuit(cfg)
    res = repcode.repcode_pipeline(c, cfg["rep"], cfg["p_in"], cfg["p_out"], cfg["seed"], cfg["samples"])
    return {"circuit": _circuit_echo(c), "r": res.r, "p_in": res.p_in, "p_out": res.p_out,
            "q": res.q, "bound": res.bound, "tvd": res.measured_tvd, "stderr": res.stderr,
            "within_bound": res.measured_tvd <= res.bound + 3 * res.stderr,
            "encoded_depth": res.encoded_depth, "samples": res.samples}


def _lattice(cfg, c):
    spec = cfg["lattice"]
    if spec is None and cfg["grid"] is not None:
        spec = cfg["grid"]
    if spec is None or spec == "line":
        return markov.line_lattice(c.n)
    w, h = _grid_dims(spec)
    if w * h != c.n:
        raise ConfigError("lattice size does not match the circuit")
    return markov.grid_lattice(w, h)


def cmd_markov(cfg):
    c = load_circuit(cfg)
    if c.n > 10:
        raise CapacityError("markov supports n <= 10")
    sets = {}
    for key in ("A", "B", "C"):
        if cfg[key] is None:
            raise ConfigError("markov needs --A, --B and --C")
        sets[key] = _int_list(cfg[key], "--" + key)
        if any(not 0 <= q < c.n for q in sets[key]):
            raise ConfigError("qubit index out of range in --%s" % key)
    try:
        t = markov.Tripartition(sets["A"], sets["B"], sets["C"], _lattice(cfg, c))
    except ValueError as exc:
        raise ConfigError(str(exc))
    hp = hamiltonian.build_parent(c)
    rho, _ = hamiltonian.gibbs_state(hp, cfg["beta"])
    fr = markov.fawzi_renner(rho, t)
    out = {"circuit": _circuit_echo(c), "beta": cfg["beta"], "tripartition": t.as_json(),
           "shielding": markov.is_shielding(hp, t), "cmi": markov.cmi(rho, t),
           "petz_residual": markov.petz_residual(rho, t),
           "fawzi_renner": {"cmi_bits": fr.cmi_bits, "bound_bits": fr.bound_bits, "holds": fr.holds}}
    try:
        rep = markov.local_indistinguishability_check(c, t, cfg["beta"])
    except ValueError as exc:
        out["local_indistinguishability"] = {"skipped": str(exc)}
    else:
        out["local_indistinguishability"] = {
            "residual": rep.residual, "witness_residual": rep.witness_residual,
            "distance": rep.distance, "depth": rep.depth, "condition_met": rep.condition_met}
    return out


def cmd_verify(cfg):
    if cfg["list"]:
        return {"checks": sorted(checks.REGISTRY), "acceptance": {
            str(k): v for k, v in sorted(checks.ACCEPTANCE.items())}}
    names = None
    if cfg["criterion"] is not None:
        if cfg["criterion"] not in checks.ACCEPTANCE:
            raise ConfigError("no acceptance criterion %s" % cfg["criterion"])
        names = {checks.ACCEPTANCE[cfg["criterion"]]}
    if cfg["check"] is not None:
        if cfg["check"] not in checks.REGISTRY:
            raise ConfigError("unknown check %s" % cfg["check"])
        names = {cfg["check"]}
    results = checks.run_checks(names, skip_slow=bool(cfg["skip_slow"]))
    failed = [r.name for r in results if not r.passed]
    return {"checks": [r.as_json() for r in results], "total": len(results),
            "failed": failed, "passed": not failed}


HANDLERS = {
    "gibbs-check": cmd_gibbs_check, "davies": cmd_davies, "mixing": cmd_mixing,
    "convex": cmd_convex, "distill-sweep": cmd_distill_sweep, "ft-pipeline": cmd_ft_pipeline,
    "repcode": cmd_repcode, "markov": cmd_markov, "verify": cmd_verify,
}


# -------------------------------------------------------------- output

def _echo(cfg):
    keys = {"gibbs-check": ("circuit", "grid", "b_seed", "beta"),
            "davies": ("circuit", "grid", "b_seed", "beta", "t_max", "t_points"),
            "mixing": ("circuit", "grid", "b_seed", "beta", "t_max", "t_points"),
            "convex": ("circuit", "grid", "b_seed", "beta", "eps"),
            "distill-sweep": ("gadget", "Bs", "Ds", "p", "trials", "seed"),
            "ft-pipeline": ("circuit", "grid", "b_seed", "beta", "gadget", "samples", "seed"),
            "repcode": ("circuit", "grid", "b_seed", "rep", "p_in", "p_out", "samples", "seed"),
            "markov": ("circuit", "grid", "b_seed", "beta", "A", "B", "C", "lattice"),
            "verify": ("criterion", "check", "skip_slow")}[cfg["command"]]
    return {k: cfg[k] for k in keys}


def render_json(cfg, result):
    doc = {"command": cfg["command"], "config": _echo(cfg), "version": __version__,
           "result": checks._plain(result)}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def render_csv(result):
    rows = result.get("rows")
    if rows is None:
        rows = result.get("checks")
    if rows is None:
        rows = [{k: v for k, v in result.items() if not isinstance(v, (dict, list))}]
    rows = [{k: (json.dumps(checks._plain(v), sort_keys=True) if isinstance(v, (dict, list)) else v)
             for k, v in row.items()} for row in rows]
    buf = io.StringIO()
    fields = sorted({k for row in rows for k in row})
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        result = HANDLERS[cfg["command"]](cfg)
    except CapacityError as exc:
        print("capacity error: %s" % exc, file=sys.stderr)
        return 1
    except (ConfigError, cc.CircuitParseError, noise.StructureError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    text = render_csv(result) if cfg["format"] == "csv" else render_json(cfg, result)
    if cfg["out"]:
        with open(cfg["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cfg["command"] == "verify" and not result.get("passed", True):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
