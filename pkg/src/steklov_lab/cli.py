"""Command-line front end: ``steklov-lab <command> [options]``.

Exit codes: 0 success, 2 invalid input, 1 numerical failure. Errors are
written to stderr as a one-line JSON object.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Sequence

from . import analytic, experiments, reports
from .errors import NumericalError, SteklovLabError, ValidationError
from .mesh import (
    BoundaryArc,
    GlueSpec,
    align_for_glue,
    glue,
    make_annulus_mesh,
    make_disk_mesh,
    make_rectangle_mesh,
    read_mesh,
    scale,
    surface_topology,
    write_mesh,
)
from .steklov import SteklovProblem, solve_steklov

ENV_OUT = "STEKLOV_LAB_OUT"


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D401 - argparse hook
        raise UsageError(message)


# -- parser -------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.add_argument("--out-dir", default=None, help=f"report directory (env {ENV_OUT})")
    p.add_argument("--config", default=None, help="key=value file; command-line flags win")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for grid points")


def _disk_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--base", default=None, help="base mesh file (default: clustered unit disk)")
    p.add_argument("--n-radial", type=int, default=20)
    p.add_argument("--n-angular", type=int, default=160)
    p.add_argument("--nx", type=int, default=experiments.DEFAULT_RESOLUTION[0])
    p.add_argument("--ny", type=int, default=experiments.DEFAULT_RESOLUTION[1])


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="steklov-lab", description="Steklov spectra of glued surfaces")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mesh", help="generate a mesh file")
    _common(p)
    p.add_argument("--kind", choices=["disk", "rectangle", "annulus"], default="disk")
    p.add_argument("--n-radial", type=int, default=20)
    p.add_argument("--n-angular", type=int, default=160)
    p.add_argument("--cluster", type=float, nargs="*", default=[], help="boundary angles to refine")
    p.add_argument("--cluster-factor", type=float, default=1.0)
    p.add_argument("--inner-radius", type=float, default=0.5)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--nx", type=int, default=8)
    p.add_argument("--ny", type=int, default=200)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--output", default="mesh.msh")

    p = sub.add_parser("spectrum", help="Steklov spectrum of a mesh file")
    _common(p)
    p.add_argument("--mesh", required=True)
    p.add_argument("--count", type=int, default=6)
    p.add_argument("--dirichlet", nargs="*", default=[], metavar="LABEL")
    p.add_argument("--neumann", nargs="*", default=[], metavar="LABEL")
    p.add_argument("--lumped", action="store_true")

    p = sub.add_parser("rect-analytic", help="closed-form rectangle spectrum")
    _common(p)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--condition", choices=["dirichlet", "neumann"], default="dirichlet")
    p.add_argument("--count", type=int, default=4)

    p = sub.add_parser("glue", help="attach the strip to a base mesh")
    _common(p)
    _disk_opts(p)
    p.add_argument("--eps", type=float, default=0.15)
    p.add_argument("--h", type=float, default=2.5)
    p.add_argument("--reverse", action="store_true", help="reverse one identification")
    p.add_argument("--arc2-chain", type=int, default=0)
    p.add_argument("--arc2-position", type=float, default=None, help="arclength centre of arc 2 (default L/2)")
    p.add_argument("--output", default="glued.msh")

    p = sub.add_parser("converge-eps", help="glued spectra as eps decreases")
    _common(p)
    _disk_opts(p)
    p.add_argument("--h", type=float, default=2.5)
    p.add_argument("--eps", type=float, nargs="+", default=[0.3, 0.2, 0.15, 0.1])
    p.add_argument("--J", type=int, default=4)

    for name, help_ in (("sweep-h", "track the strip branch over an h grid"),
                        ("find-multiplicity", "locate a double sigma_1"),
                        ("verify-monotonicity", "sigma_1 * L before and after glueing"),
                        ("check-lemmas", "bracketing inequalities at one h")):
        p = sub.add_parser(name, help=help_)
        _common(p)
        _disk_opts(p)
        p.add_argument("--eps", type=float, default=0.15)
        p.add_argument("--h0", type=float, default=2.0)
        p.add_argument("--h1", type=float, default=3.3)
        if name == "sweep-h":
            p.add_argument("--grid", type=int, default=27)
        if name in ("find-multiplicity", "verify-monotonicity", "check-lemmas"):
            p.add_argument("--tol-gap", type=float, default=1e-2)
            p.add_argument("--grid", type=int, default=14)
        if name == "find-multiplicity":
            p.add_argument("--polish", action="store_true", help="refine an interior minimum")
        if name == "verify-monotonicity":
            p.add_argument("--auto-window", action="store_true", help="use the admissible window of the base")
        if name == "check-lemmas":
            p.add_argument("--h", type=float, default=None, help="evaluate here instead of at h_eps")

    p = sub.add_parser("topology", help="topological type after attachment")
    _common(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--orientable", dest="orientable", action="store_true", default=True)
    g.add_argument("--non-orientable", dest="orientable", action="store_false")
    p.add_argument("--genus", type=int, default=0)
    p.add_argument("--k", type=int, default=1)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--same-component", dest="same", action="store_true", default=True)
    g.add_argument("--different-component", dest="same", action="store_false")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--preserve", dest="reverse", action="store_false", default=False)
    g.add_argument("--reverse", dest="reverse", action="store_true")
    p.add_argument("--mesh-check", action="store_true", help="also realize the case on a mesh")
    return ap


# -- config -------------------------------------------------------------------


def read_config(path: str) -> list[tuple[str, str]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc.strerror}") from None
    items = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{n}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        items.append((k, v))
    return items


def _config_tokens(sub: argparse.ArgumentParser, items: list[tuple[str, str]]) -> list[str]:
    flags = {}
    for act in sub._actions:
        for opt in act.option_strings:
            if opt.startswith("--"):
                flags[opt[2:].replace("-", "_")] = (opt, act)
    out: list[str] = []
    for k, v in items:
        key = k.replace("-", "_")
        if key in ("config", "help") or key not in flags:
            raise ValidationError(f"unknown config key {k!r}")
        opt, act = flags[key]
        if act.nargs == 0:
            if v.lower() in ("1", "true", "yes", "on"):
                out.append(opt)
            elif v.lower() not in ("0", "false", "no", "off"):
                raise ValidationError(f"config key {k!r} expects true/false")
        else:
            out += [opt, *v.split()] if act.nargs in ("+", "*") else [opt, v]
    return out


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        sub = ap._subparsers._group_actions[0].choices[args.command]
        tokens = _config_tokens(sub, read_config(args.config))
        argv = list(argv)
        i = argv.index(args.command)
        args = ap.parse_args(argv[: i + 1] + tokens + argv[i + 1 :])
    return args


# -- helpers ----------------------------------------------------------------------


def out_dir(args) -> Path:
    d = args.out_dir or os.environ.get(ENV_OUT) or "."
    p = Path(d)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _load_mesh(path: str):
    if not Path(path).is_file():
        raise ValidationError(f"mesh file not found: {path}")
    return read_mesh(path)


def _base(args):
    if args.base:
        return _load_mesh(args.base)
    return experiments.ClusteredDisk(args.n_radial, args.n_angular)


def _resolution(args) -> tuple[int, int]:
    return (args.nx, args.ny)


def _emit(args, name: str, report, text: str, rows=None) -> None:
    d = out_dir(args)
    (d / f"{name}.json").write_text(reports.dumps(report) + "\n")
    if rows is not None:
        (d / f"{name}.csv").write_text(reports.csv_text(rows))
    print(reports.dumps(report) if args.json else text)


def _fmt(values) -> str:
    return " ".join(f"{v:.7g}" for v in values)


# -- commands -----------------------------------------------------------------------


def cmd_mesh(args) -> None:
    if args.kind == "disk":
        m = make_disk_mesh(args.n_radial, args.n_angular, args.cluster, args.cluster_factor)
    elif args.kind == "annulus":
        m = make_annulus_mesh(args.n_radial, args.n_angular, args.inner_radius, args.cluster, args.cluster_factor)
    else:
        m = make_rectangle_mesh(args.eps, args.h, args.nx, args.ny)
    m = scale(m, args.scale)
    path = out_dir(args) / args.output
    write_mesh(m, path)
    topo = surface_topology(m)
    rep = dict(path=str(path), vertices=m.n_vertices, triangles=len(m.triangles), chains=len(m.chains),
               labels=sorted(m.labels), boundary_length=m.boundary_length(),
               euler_characteristic=topo.euler_characteristic, mesh_hash=m.fingerprint())
    text = f"wrote {path}: V={m.n_vertices} T={len(m.triangles)} L={m.boundary_length():.6f}"
    print(json.dumps(rep, sort_keys=True) if args.json else text)


def cmd_spectrum(args) -> None:
    m = _load_mesh(args.mesh)
    cond = {lab: "dirichlet" for lab in args.dirichlet}
    for lab in args.neumann:
        if lab in cond:
            raise ValidationError(f"label {lab!r} given as both dirichlet and neumann")
        cond[lab] = "neumann"
    s = solve_steklov(SteklovProblem(m, cond, count=args.count, lumped=args.lumped))
    rep = s.report()
    rep["conditions"] = {k: v.value for k, v in SteklovProblem(m, cond, count=args.count).conditions.items()}
    _emit(args, "spectrum", rep, _fmt(s.values))


def cmd_rect_analytic(args) -> None:
    vals = analytic.rectangle_spectrum(args.eps, args.h, args.condition, args.count)
    eigs = analytic.rectangle_eigs(args.eps, args.h, args.condition, args.count)
    rep = dict(eps=args.eps, h=args.h, condition=args.condition, eigenvalues=[float(v) for v in vals],
               families=[e.family for e in eigs], j=[e.j for e in eigs])
    _emit(args, "rect_analytic", rep, _fmt(vals))


def cmd_glue(args) -> None:
    raw = _load_mesh(args.base) if args.base else experiments.ClusteredDisk(args.n_radial, args.n_angular)(args.eps, args.nx)
    w = args.eps**2
    pos = args.arc2_position
    if pos is None:
        pos = 0.5 * raw.chain_length(args.arc2_chain) if args.arc2_chain == 0 else 0.0
    a1 = BoundaryArc.centered(raw, 0, 0.0, w)
    a2 = BoundaryArc.centered(raw, args.arc2_chain, pos, w)
    aligned, spec = align_for_glue(raw, GlueSpec(args.eps, args.h, a1, a2, args.reverse, _resolution(args)))
    g = glue(aligned, spec)
    path = out_dir(args) / args.output
    write_mesh(g, path)
    t = surface_topology(g)
    rep = dict(path=str(path), vertices=g.n_vertices, boundary_length=g.boundary_length(),
               base_length=raw.boundary_length(), orientable=t.orientable, genus=t.genus,
               boundary_components=t.boundary_components, euler_characteristic=t.euler_characteristic,
               mesh_hash=g.fingerprint())
    _emit(args, "glue", rep, f"wrote {path}: L={g.boundary_length():.6f} "
          f"{'orientable' if t.orientable else 'non-orientable'} genus={t.genus} k={t.boundary_components}")


def cmd_converge(args) -> None:
    r = experiments.converge_eps(_base(args), args.h, args.eps, args.J, _resolution(args), jobs=args.jobs)
    lines = [f"eps={e:g} max_dev={d:.6f} " + _fmt(v) for e, d, v in zip(r.eps, r.deviations, r.eigenvalues)]
    lines.append(f"targets {_fmt(r.targets)}; decreasing={r.trend_decreasing}")
    _emit(args, "converge_eps", r, "\n".join(lines), r.rows())


def cmd_sweep(args) -> None:
    r = experiments.sweep_h(_base(args), args.eps, (args.h0, args.h1), args.grid,
                            resolution=_resolution(args), jobs=args.jobs)
    lines = [f"h={h:.4f} m={m:.4f} gap={g:.6f}" for h, m, g in zip(r.h, r.m, r.gap)]
    lines.append(f"h_eps={r.h_eps}")
    _emit(args, "sweep_h", r, "\n".join(lines), r.rows())


def cmd_multiplicity(args) -> None:
    r = experiments.find_h_multiplicity(_base(args), args.eps, (args.h0, args.h1), args.tol_gap, grid=args.grid,
                                        resolution=_resolution(args), jobs=args.jobs, polish=args.polish)
    _emit(args, "find_multiplicity", r,
          f"h_eps={r.h_eps:.6f} sigma1={r.sigma1:.6f} sigma2={r.sigma2:.6f} rel_gap={r.rel_gap:.3g} reached={r.reached}")


def cmd_lemmas(args) -> None:
    base = _base(args)
    fam = experiments.GluedFamily(base, args.eps, _resolution(args))
    at_mult = args.h is None
    h = args.h
    if h is None:
        h = experiments.find_h_multiplicity(None, args.eps, (args.h0, args.h1), args.tol_gap, grid=args.grid,
                                            family=fam, jobs=args.jobs, polish=True).h_eps
    r = experiments.check_lemma_inequalities(None, args.eps, h, at_multiplicity=at_mult, family=fam)
    _emit(args, "check_lemmas", r,
          f"h={r.h:.6f} sigma1_N={r.sigma1_N_base:.6f} <= sigma_eps={r.sigma_eps:.6f} "
          f"<= sigma0_D={r.sigma0_D_rect:.6f}: lower={r.lower_holds} upper={r.upper_holds}")


def cmd_monotonicity(args) -> None:
    window = None if args.auto_window else (args.h0, args.h1)
    r = experiments.verify_monotonicity(_base(args), args.eps, window, args.tol_gap, _resolution(args),
                                        grid=args.grid, jobs=args.jobs)
    _emit(args, "verify_monotonicity", r,
          f"{r.verdict}: P_glued={r.P_glued:.6f} P_base={r.P_base:.6f} threshold={r.threshold:.6f}")


def cmd_topology(args) -> None:
    r = experiments.topology_of_attachment(args.orientable, args.genus, args.k, args.same, args.reverse)
    rep = dict(orientable=r.orientable, genus=r.genus, k=r.k)
    text = str(r)
    if args.mesh_check:
        chk = experiments.realize_attachment(args.same, args.reverse)
        rep["mesh_check"] = reports.to_plain(chk)
        text += f"\nmesh: {chk.measured} (chi {chk.chi_base} -> {chk.chi_glued}) agrees={chk.agrees}"
    _emit(args, "topology", rep, text)


COMMANDS = {
    "mesh": cmd_mesh,
    "spectrum": cmd_spectrum,
    "rect-analytic": cmd_rect_analytic,
    "glue": cmd_glue,
    "converge-eps": cmd_converge,
    "sweep-h": cmd_sweep,
    "find-multiplicity": cmd_multiplicity,
    "check-lemmas": cmd_lemmas,
    "verify-monotonicity": cmd_monotonicity,
    "topology": cmd_topology,
}


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        if getattr(args, "jobs", 1) < 1:
            raise ValidationError("--jobs must be at least 1")
        COMMANDS[args.command](args)
    except ValidationError as exc:
        return _fail(2, type(exc).__name__, str(exc))
    except NumericalError as exc:
        return _fail(1, type(exc).__name__, str(exc))
    except SteklovLabError as exc:
        return _fail(1, type(exc).__name__, str(exc))
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        return _fail(2, type(exc).__name__, f"{exc.strerror}: {exc.filename}")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
