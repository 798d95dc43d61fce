"""``cavity`` command-line front end.

Exit codes: 0 success (validity warnings are reported, not fatal), 2 bad
usage or configuration, 3 numerical failure.  Failures print a one-line
JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from . import config as cfgmod
from .config import ConfigError
from .errors import DomainError, FitDiverged, NoResonantMode, NumericalInstability, ValidityWarning
from .output import error_record, header_fields, render_csv, render_json

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

DEFAULT_FORMAT = {"modes": "csv", "scan": "csv", "fit": "json", "coupling": "json", "dynamics": "csv"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(error_record("usage", message, EXIT_USAGE) + "\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with [geometry], [atom], [scan], [fit], [modes], [dynamics]")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--threads", type=int, default=1, help="worker threads for grid scans")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from the header")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config option (repeatable)")

    p = _Parser(prog="cavity", description="Open-cavity modes, spectra, couplings and dynamics.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("modes", parents=[common], help="mode profile at one frequency")
    m.add_argument("--omega", type=float)
    m.add_argument("--locate", action="store_true", help="move omega onto the nearest located peak")
    m.add_argument("--samples", type=int)

    s = sub.add_parser("scan", parents=[common], help="|T|^2 over omega (and ell_c / N sweeps)")
    s.add_argument("--omega-min", type=float)
    s.add_argument("--omega-max", type=float)
    s.add_argument("--resolution", type=float)
    s.add_argument("--ell-c", type=float, nargs="+", dest="ell_c_values")
    s.add_argument("--N", type=int, nargs="+", dest="N_values")

    f = sub.add_parser("fit", parents=[common], help="Lorentzian fits and effective lengths")
    f.add_argument("--select", choices=("highest", "nearest", "all"))
    f.add_argument("--omega-target", type=float)
    f.add_argument("--ell-c", type=float, nargs="+", dest="ell_c_values")

    for name, hlp in (("coupling", "effective atom-cavity coupling"),
                      ("dynamics", "continuum versus effective single-excitation dynamics")):
        a = sub.add_parser(name, parents=[common], help=hlp)
        a.add_argument("--atom-x", help="atom position or 'antinode'")
        a.add_argument("--atom-omega", help="transition frequency or 'peak'")
        a.add_argument("--dipole", help="dipole moment, 're,im' or a complex literal")
        a.add_argument("--atom-linewidth", type=float)
        if name == "dynamics":
            a.add_argument("--duration", type=float)
            a.add_argument("--dt", type=float)
            a.add_argument("--model", choices=("continuum", "effective", "both"))
            a.add_argument("--counter-rotating", action="store_true", default=None)
            a.add_argument("--K", type=float, help="continuum half-window in linewidths")
    return p


# --------------------------------------------------------------------------
# config resolution


def resolve_config(args) -> cfgmod.RunConfig:
    cfg = cfgmod.load(args.config)
    for item in args.set:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
        lhs, raw = item.split("=", 1)
        sec, key = lhs.split(".", 1)
        cfg.set_text(sec, key, raw, "--set")
    flags = {
        "modes": [("omega", "modes", "omega"), ("samples", "modes", "samples")],
        "scan": [("omega_min", "scan", "omega_min"), ("omega_max", "scan", "omega_max"),
                 ("resolution", "scan", "resolution"), ("ell_c_values", "scan", "ell_c_values"),
                 ("N_values", "scan", "N_values")],
        "fit": [("select", "fit", "select"), ("omega_target", "fit", "omega_target"),
                ("ell_c_values", "fit", "ell_c_values")],
        "coupling": [("atom_linewidth", "atom", "linewidth")],
        "dynamics": [("atom_linewidth", "atom", "linewidth"), ("duration", "dynamics", "duration"),
                     ("dt", "dynamics", "dt"), ("model", "dynamics", "model"),
                     ("counter_rotating", "dynamics", "counter_rotating"), ("K", "dynamics", "K")],
    }[args.command]
    for attr, sec, key in flags:
        v = getattr(args, attr, None)
        if v is not None:
            cfg.set(sec, key, v)
    if args.command in ("coupling", "dynamics"):
        for attr, key in (("atom_x", "x_A"), ("atom_omega", "omega_A"), ("dipole", "d")):
            v = getattr(args, attr, None)
            if v is not None:
                cfg.set_text("atom", key, v, f"--{attr.replace('_', '-')}")
    return cfg


# --------------------------------------------------------------------------
# subcommands; each returns (columns, rows, notes) for CSV or a dict for JSON


def _scan_one(cfg, ell_c, N):
    from .spectra import scan_response

    sc = cfg["scan"]
    geom = cfgmod.geometry_from(cfg, ell_c=ell_c, N=N)
    spec = scan_response(geom, (sc["omega_min"], sc["omega_max"]), sc["resolution"])
    return ell_c, N, spec


def cmd_scan(cfg, threads):
    jobs = [(l, n) for l in cfg.ell_c_scan_values() for n in cfg.N_scan_values()]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(lambda j: _scan_one(cfg, *j), jobs))
    else:
        results = [_scan_one(cfg, *j) for j in jobs]
    results.sort(key=lambda r: (r[0], r[1]))
    rows, peaks = [], []
    for ell_c, N, spec in results:
        for w, v in zip(spec.grid, spec.values):
            rows.append((ell_c, N, float(w), float(v)))
        for p in spec.candidates:
            peaks.append({"ell_c": ell_c, "N": N, "omega": p.omega, "height": p.height, "fwhm": p.fwhm})
    notes = [f"peak ell_c={p['ell_c']!r} N={p['N']} omega={p['omega']!r} height={p['height']!r} "
             f"fwhm={p['fwhm']!r}" for p in peaks]
    return {"columns": ["ell_c", "N", "omega", "intensity_ratio"], "rows": rows,
            "notes": notes, "record": {"peaks": peaks}}


def cmd_fit(cfg, threads):
    from .spectra import fit_candidate, scan_response

    sc, ft = cfg["scan"], cfg["fit"]
    records = []
    for ell_c in cfg.fit_ell_c_values():
        geom = cfgmod.geometry_from(cfg, ell_c=ell_c)
        spec = scan_response(geom, (sc["omega_min"], sc["omega_max"]), sc["resolution"])
        if not spec.candidates:
            raise NoResonantMode(f"no peak located for ell_c = {ell_c}")
        if ft["select"] == "highest":
            cands = [spec.highest_candidate()]
        elif ft["select"] == "nearest":
            if ft["omega_target"] is None:
                raise ConfigError("fit.select = nearest needs fit.omega_target")
            cands = [spec.nearest_candidate(ft["omega_target"])]
        else:
            cands = spec.candidates
        for cand in cands:
            try:
                peak = fit_candidate(geom, cand)
            except FitDiverged as exc:
                if ft["on_overlap"] == "raise" or ft["select"] != "all":
                    raise
                records.append({"ell_c": ell_c, "N": geom.N, "omega": cand.omega,
                                "rejected": str(exc)})
                continue
            rec = {"N": geom.N, "n1": geom.stack.n1}
            rec.update(peak.as_record())
            records.append(rec)
    cols = ["ell_c", "N", "m", "omega_eff", "gamma", "L_coupling", "ell_eff",
            "ell_eff_over_ell_c", "L_over_ell_c", "fit_residual", "degraded"]
    rows = [tuple(r.get(k, "") for k in cols) for r in records if "rejected" not in r]
    return {"columns": cols, "rows": rows, "notes": [], "record": {"peaks": records}}


def resolve_atom(cfg, geom):
    """Pick the resonance and build the atom; ``peak``/``antinode`` are resolved here."""
    from .coupling import AtomSpec, antinode_position
    from .spectra import fit_highest, fit_nearest

    at, sc = cfg["atom"], cfg["scan"]
    if at["omega_A"] is None:
        raise ConfigError("atom.omega_A is required (a number or 'peak')")
    if at["x_A"] is None:
        raise ConfigError("atom.x_A is required (a number or 'antinode')")
    try:
        if at["omega_A"] == "peak":
            target = cfg["fit"]["omega_target"]
            if target is None:
                peak = fit_highest(geom, (sc["omega_min"], sc["omega_max"]), sc["resolution"])
            else:
                peak = fit_nearest(geom, target, resolution=sc["resolution"])
            omega_A = peak.omega_m_eff
        else:
            omega_A = float(at["omega_A"])
            peak = fit_nearest(geom, omega_A, resolution=sc["resolution"])
    except LookupError as exc:
        raise NoResonantMode(str(exc)) from None
    x_A = antinode_position(geom, peak.omega_m_eff) if at["x_A"] == "antinode" else float(at["x_A"])
    return AtomSpec(omega_A, x_A, at["d"], at["linewidth"]), peak


def cmd_coupling(cfg, threads):
    from .coupling import g_effective

    geom = cfgmod.geometry_from(cfg)
    atom, peak = resolve_atom(cfg, geom)
    res = g_effective(atom, peak, geom)
    rec = {"omega_A": atom.omega_A, "x_A": atom.x_A, "d": [atom.d.real, atom.d.imag]}
    rec.update(res.as_record(atom.linewidth))
    cols = ["m", "omega_eff", "gamma", "L_coupling", "g_re", "g_im", "g_bar_re", "g_bar_im",
            "epsilon", "g_perfect_abs", "cooperativity"]
    row = (res.mode.m, res.mode.omega_m_eff, res.mode.gamma, res.mode.L_coupling,
           res.g_m.real, res.g_m.imag, res.g_bar_m.real, res.g_bar_m.imag, res.epsilon,
           abs(res.g_perfect), "" if rec["cooperativity"] is None else rec["cooperativity"])
    return {"columns": cols, "rows": [row], "notes": [], "record": rec}


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def cmd_dynamics(cfg, threads):
    from .coupling import eta_continuum, g_effective
    from .dynamics import (ContinuumState, compare_models, continuum_grid, evolve_continuum,
                           evolve_effective)

    geom = cfgmod.geometry_from(cfg)
    atom, peak = resolve_atom(cfg, geom)
    dy = cfg["dynamics"]
    cpl = g_effective(atom, peak, geom)
    duration = dy["duration"]
    if duration is None:
        if abs(cpl.g_m) == 0:
            raise ConfigError("zero coupling: set dynamics.duration explicitly")
        duration = dy["rabi_periods"] * math.pi / abs(cpl.g_m)
    trajs, summary = [], {"m": peak.m, "omega_eff": peak.omega_m_eff, "gamma": peak.gamma,
                          "g_abs": abs(cpl.g_m), "epsilon": cpl.epsilon, "duration": duration}
    if dy["model"] == "both":
        rep = compare_models(geom, atom, duration=duration, K=dy["K"],
                             samples_per_fwhm=dy["samples_per_fwhm"], n_samples=dy["n_samples"],
                             peak=peak, dt=dy["dt"], counter_rotating=dy["counter_rotating"],
                             n_max=dy["n_max"])
        trajs = [rep.continuum, rep.effective]
        summary.update(rep.as_record())
    elif dy["model"] == "continuum":
        grid, w = continuum_grid(peak, K=dy["K"], samples_per_fwhm=dy["samples_per_fwhm"])
        eta = eta_continuum(atom, geom, grid)
        trajs = [evolve_continuum(ContinuumState.excited(grid, w), eta, atom.omega_A, duration,
                                  dt=dy["dt"], n_samples=dy["n_samples"], selected_coupling=cpl.g_m)]
    else:
        trajs = [evolve_effective(atom.omega_A, [peak.omega_m_eff - atom.omega_A], [peak.gamma],
                                  [cpl.g_m], duration, dt=dy["dt"], n_samples=dy["n_samples"],
                                  counter_rotating=dy["counter_rotating"], g_bars=[cpl.g_bar_m],
                                  omegas=[peak.omega_m_eff], n_max=dy["n_max"])]
    cols = ["model", "t", "pop_e0", "re_c_e0", "im_c_e0", f"pop_g1_m{peak.m}", "norm"]
    rows = []
    for tr in trajs:
        mp = tr.mode_pop[:, 0] if tr.mode_pop.shape[1] else np.full(tr.t.size, np.nan)
        for i in range(tr.t.size):
            rows.append((tr.model, float(tr.t[i]), float(abs(tr.c_e0[i]) ** 2), float(tr.c_e0[i].real),
                         float(tr.c_e0[i].imag), float(mp[i]), float(tr.norm[i])))
    notes = [f"{k} = {_plain(v)!r}" for k, v in summary.items()]
    return {"columns": cols, "rows": rows, "notes": notes,
            "record": {"summary": summary,
                       "trajectories": [{"model": tr.model, "dt": tr.dt, "t": tr.t, "pop_e0": tr.population,
                                         "norm": tr.norm} for tr in trajs]}}


def cmd_modes(cfg, threads, locate=False):
    from .modes import assemble_mode
    from .spectra import scan_response

    geom = cfgmod.geometry_from(cfg)
    md = cfg["modes"]
    omega = md["omega"]
    if locate:
        sc = cfg["scan"]
        spec = scan_response(geom, (sc["omega_min"], sc["omega_max"]), sc["resolution"])
        try:
            omega = spec.nearest_candidate(omega).omega
        except LookupError as exc:
            raise NoResonantMode(str(exc)) from None
    mode = assemble_mode(geom, omega)
    x, phi, reg = mode.sample(md["samples"], md["outside"])
    peaks = {r: float(mode.peak_intensity(r)) for r in ("in", "stack", "out")}
    rows = [(float(a), int(j), float(p.real), float(p.imag), float(abs(p) ** 2))
            for a, j, p in zip(x, reg, phi)]
    notes = [f"omega = {omega!r}"] + [f"max_intensity_{r} = {v!r}" for r, v in peaks.items()]
    return {"columns": ["x", "region", "re_phi", "im_phi", "intensity"], "rows": rows, "notes": notes,
            "record": {"omega": omega, "max_intensity": peaks,
                       "profile": {"x": x, "region": reg, "intensity": np.abs(phi) ** 2}}}


# --------------------------------------------------------------------------


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        fmt = args.format or DEFAULT_FORMAT[args.command]
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ValidityWarning)
            if args.command == "modes":
                result = cmd_modes(cfg, args.threads, locate=args.locate)
            else:
                result = {"scan": cmd_scan, "fit": cmd_fit, "coupling": cmd_coupling,
                          "dynamics": cmd_dynamics}[args.command](cfg, args.threads)
        msgs = sorted({str(w.message) for w in caught if issubclass(w.category, ValidityWarning)})
        header = header_fields(args.command, cfg, timestamp=not args.no_timestamp,
                               extra=[("warnings", "; ".join(msgs) or "none")])
        if fmt == "csv":
            text = render_csv(header, result["columns"], result["rows"], result["notes"])
        else:
            payload = dict(result["record"])
            payload["warnings"] = msgs
            text = render_json(header, payload)
        _emit(text, args.out)
        for m in msgs:
            sys.stderr.write(error_record("validity_warning", m, EXIT_OK) + "\n")
        return EXIT_OK
    except (ConfigError, UsageError, DomainError) as exc:
        sys.stderr.write(error_record(type(exc).__name__, exc, EXIT_USAGE) + "\n")
        return EXIT_USAGE
    except (NumericalInstability, FitDiverged, NoResonantMode, LookupError, FloatingPointError) as exc:
        sys.stderr.write(error_record(type(exc).__name__, exc, EXIT_NUMERIC) + "\n")
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
