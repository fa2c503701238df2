"""Command-line pipeline: generate, mesh, project, measure, analyze.

Every run writes a manifest (full parameters, seeds, file digests)
beside its outputs, and a fixed seed reproduces every output byte for
byte.  Failures exit nonzero with a one-line JSON error category on
stderr.
"""

import argparse
import glob
import json
import os
import sys

import numpy as np

from . import analysis, digitize, lattice_io, montecarlo, observables
from .errors import GeometryMismatchError, Su2LatError

_VERSION = "0.1.0"


def _manifest(out_base, command, params, outputs):
    digests = {os.path.basename(p): lattice_io.file_digest(p) for p in outputs}
    lattice_io.write_manifest(out_base + ".manifest.json", {
        "tool": "su2lat",
        "version": _VERSION,
        "command": command,
        "params": params,
        "outputs": digests,
    })


def _config_paths(in_dir):
    paths = sorted(glob.glob(os.path.join(in_dir, "cfg_*.su2")))
    if not paths:
        raise Su2LatError(f"no configurations under {in_dir}")
    return paths


def _dir_info(in_dir):
    """Scheme metadata for an ensemble directory (written by project)."""
    info = {"scheme": "ultrafine", "bits_per_link": 256.0, "mesh_file": None}
    path = os.path.join(in_dir, "manifest.json")
    if os.path.exists(path):
        with open(path) as fh:
            info.update(json.load(fh))
    return info


def cmd_generate(args):
    params = montecarlo.RunParams(
        beta=args.beta,
        dims=tuple(int(x) for x in args.dims.split(",")),
        seed=args.seed,
        n_trajectories=args.trajectories,
        save_every=args.save_every,
        thermalization=args.therm,
        start=args.start,
    )
    meta = montecarlo.generate_ensemble(params, args.out)
    lattice_io.write_manifest(os.path.join(args.out, "manifest.json"), {
        "scheme": "ultrafine",
        "bits_per_link": 256.0,
        "ensemble_id": meta.ensemble_id,
        "params": params.to_dict(),
    })
    _manifest(os.path.join(args.out, "ensemble"), "generate", params.to_dict(),
              [os.path.join(args.out, f) for (_t, f, _s) in meta.configs])
    print(f"saved {len(meta.configs)} configurations to {args.out}")
    return 0


def cmd_mesh_gen(args):
    if args.kind == "edgewise":
        if args.level is None:
            raise Su2LatError("edgewise meshes need --level")
        mesh = digitize.gen_edgewise_mesh(args.level)
    else:
        if args.name is None:
            raise Su2LatError("subgroup meshes need --name")
        mesh = digitize.gen_subgroup(args.name)
    lattice_io.save_mesh(mesh, args.out)
    _manifest(args.out, "mesh-gen",
              {"kind": args.kind, "level": args.level, "name": args.name},
              [args.out])
    print(f"{mesh.label}: v={mesh.size}, {mesh.bits_per_link:.3f} bits per link")
    return 0


def cmd_project(args):
    os.makedirs(args.out, exist_ok=True)
    mesh = None
    fp_spec = None
    if args.scheme == "fixedpoint":
        if args.bits is None:
            raise Su2LatError("fixed-point projection needs --bits")
        fp_spec = digitize.FixedPointSpec(args.bits)
        scheme_id = fp_spec.scheme_id
        bits = float(fp_spec.bits_per_link)
    else:
        if args.mesh is None:
            raise Su2LatError(f"{args.scheme} projection needs --mesh")
        mesh = lattice_io.load_mesh(args.mesh)
        scheme_id = f"{mesh.label}+{args.scheme}"
        bits = mesh.bits_per_link

    emit = args.emit
    outputs = []
    dims = None
    for path in _config_paths(getattr(args, "in")):
        field, header = lattice_io.read_config(path)
        if dims is None:
            dims = header.dims
        elif dims != header.dims:
            raise GeometryMismatchError(f"{path}: dims {header.dims} != {dims}")
        if args.scheme == "l2":
            proj = digitize.project_l2(field, mesh)
        elif args.scheme == "apr":
            proj = digitize.project_apr(field, mesh, objective=args.apr_objective)
        else:
            proj = digitize.project_fixed_point(field, fp_spec)
        out_path = os.path.join(args.out, os.path.basename(path))
        if emit == "indexed":
            kind = "fixedpoint" if args.scheme == "fixedpoint" else "indexed"
        else:
            kind = "quaternion"
        lattice_io.write_config(
            out_path, proj, beta=header.beta, trajectory=header.trajectory,
            seed=header.seed, start=header.start, payload=kind,
            mesh=mesh, fp_spec=fp_spec,
        )
        outputs.append(out_path)

    # relative paths keep rerun output trees byte-identical
    src_info = _dir_info(getattr(args, "in"))
    mesh_rel = (os.path.relpath(os.path.abspath(args.mesh), os.path.abspath(args.out))
                if args.mesh else None)
    lattice_io.write_manifest(os.path.join(args.out, "manifest.json"), {
        "scheme": scheme_id,
        "bits_per_link": bits,
        "mesh_file": mesh_rel,
        "mesh_digest": mesh.digest.hex() if mesh else None,
        "source": os.path.relpath(os.path.abspath(getattr(args, "in")),
                                  os.path.abspath(args.out)),
        "ensemble_id": src_info.get("ensemble_id"),
        "apr_objective": args.apr_objective if args.scheme == "apr" else None,
        "params": src_info.get("params"),
    })
    _manifest(os.path.join(args.out, "projected"), "project", {
        "scheme": args.scheme, "mesh": args.mesh, "bits": args.bits,
        "emit": emit, "in": getattr(args, "in"),
    }, outputs)
    print(f"projected {len(outputs)} configurations with {scheme_id}")
    return 0


def cmd_measure(args):
    in_dir = getattr(args, "in")
    info = _dir_info(in_dir)
    obs = args.obs.split(",")
    mesh = None
    if info.get("mesh_file"):
        mesh = lattice_io.load_mesh(os.path.join(in_dir, info["mesh_file"]))
    ensemble_id = info.get("ensemble_id") or "unknown"

    records = []
    dims = None
    for path in _config_paths(in_dir):
        field, header = lattice_io.read_config(path, mesh=mesh)
        if dims is None:
            dims = header.dims
        elif dims != header.dims:
            raise GeometryMismatchError(f"{path}: dims {header.dims} != {dims}")
        values = observables.measure_config(field, obs, rmax=args.rmax, tmax=args.tmax)
        for key, val in values.items():
            if isinstance(key, tuple):
                name, r, t = key
                params = {"r": r, "t": t}
            else:
                name, params = key, {}
            records.append(observables.MeasurementRecord(
                ensemble_id=ensemble_id,
                config_index=header.trajectory,
                observable=name,
                value=val,
                params=params,
                scheme=info["scheme"],
                bits_per_link=info["bits_per_link"],
                beta=header.beta,
            ))
    lattice_io.write_measurements(args.out, records)
    _manifest(args.out, "measure",
              {"in": in_dir, "obs": args.obs, "rmax": args.rmax, "tmax": args.tmax,
               "dims": list(dims)},
              [args.out])
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _tables_from_csvs(paths):
    tables = []
    for path in paths:
        records = lattice_io.read_measurements(path)
        by_scheme = {}
        for rec in records:
            by_scheme.setdefault((rec.scheme, rec.beta), []).append(rec)
        for recs in by_scheme.values():
            tables.append(analysis.MeasurementTable.from_records(recs))
    return tables


def cmd_analyze(args):
    tables = _tables_from_csvs(getattr(args, "in"))
    if args.mode == "potential":
        return _analyze_potential(args, tables)
    if args.mode == "error-curve":
        return _analyze_error_curve(args, tables)
    return _analyze_beta_scan(args, tables)


def _analyze_potential(args, tables):
    import csv

    window = (args.tmin, args.tmax)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        if len(tables) == 1:
            tb = tables[0]
            wilson = {(k[1], k[2]): v for k, v in tb.values.items()
                      if isinstance(k, tuple) and k[0] == "wilson"}
            w.writerow(["scheme", "r", "V", "V_err", "t_min", "t_max", "chi2_dof"])
            for fit in analysis.fit_potential(wilson, window):
                w.writerow([tb.scheme, fit.r, repr(float(fit.V)), repr(float(fit.V_err)),
                            fit.t_min, fit.t_max, repr(float(fit.chi2_dof))])
        else:
            orig = _find_ultrafine(tables)
            w.writerow(["scheme", "bits_per_link", "r", "rel_error", "rel_error_err"])
            for tb in tables:
                if tb is orig:
                    continue
                for r, (err, err_err) in sorted(
                        analysis.potential_error(orig, tb, window).items()):
                    w.writerow([tb.scheme, repr(float(tb.bits_per_link)), r,
                                repr(float(err)), repr(float(err_err))])
    _manifest(args.out, "analyze-potential",
              {"in": getattr(args, "in"), "window": list(window)}, [args.out])
    return 0


def _find_ultrafine(tables):
    orig = [tb for tb in tables if tb.scheme == "ultrafine"]
    if len(orig) != 1:
        raise Su2LatError(f"need exactly one ultrafine table, found {len(orig)}")
    return orig[0]


def _analyze_error_curve(args, tables):
    import csv

    orig = _find_ultrafine(tables)
    digs = [tb for tb in tables if tb is not orig]
    points = analysis.error_curve(orig, digs)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scheme", "bits_per_link", "observable", "r", "t",
                    "rel_value", "rel_value_err", "rel_error", "rel_error_err"])
        for p in points:
            w.writerow([p.scheme, repr(float(p.bits_per_link)), p.observable,
                        p.r or "", p.t or "",
                        repr(float(p.rel_value)), repr(float(p.rel_value_err)),
                        repr(float(p.rel_error)), repr(float(p.rel_error_err))])
    _manifest(args.out, "analyze-error-curve", {"in": getattr(args, "in")}, [args.out])
    return 0


def _analyze_beta_scan(args, tables):
    import csv

    rows, transitions = analysis.beta_scan(tables)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scheme", "beta", "polyakov_abs", "err"])
        for scheme, beta, mean, err in rows:
            w.writerow([scheme, repr(float(beta)), repr(float(mean)), repr(float(err))])
    with open(args.out + ".transitions.json", "w") as fh:
        json.dump(transitions, fh, indent=1, sort_keys=True)
        fh.write("\n")
    _manifest(args.out, "analyze-beta-scan", {"in": getattr(args, "in")},
              [args.out, args.out + ".transitions.json"])
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="su2lat",
                                description="SU(2) lattice digitization laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="run a heat-bath ensemble")
    g.add_argument("--beta", type=float, required=True)
    g.add_argument("--dims", required=True, help="NX,NY,NZ,NT")
    g.add_argument("--trajectories", type=int, required=True)
    g.add_argument("--save-every", type=int, default=1000)
    g.add_argument("--therm", type=int, default=500)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--start", choices=["hot", "cold", "auto"], default="auto")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    m = sub.add_parser("mesh", help="codebook operations")
    msub = m.add_subparsers(dest="mesh_command", required=True)
    mg = msub.add_parser("gen", help="generate a codebook file")
    mg.add_argument("--kind", choices=["edgewise", "subgroup"], required=True)
    mg.add_argument("--level", type=int)
    mg.add_argument("--name", choices=["2T", "2O", "2I"])
    mg.add_argument("--out", required=True)
    mg.set_defaults(func=cmd_mesh_gen)

    pr = sub.add_parser("project", help="project an ensemble onto a digitization")
    pr.add_argument("--scheme", choices=["l2", "apr", "fixedpoint"], required=True)
    pr.add_argument("--mesh")
    pr.add_argument("--bits", type=int, help="fixed-point precision p")
    pr.add_argument("--apr-objective", choices=["single", "all-staples"],
                    default="all-staples")
    pr.add_argument("--in", required=True)
    pr.add_argument("--out", required=True)
    pr.add_argument("--emit", choices=["indexed", "quaternion"], default="quaternion")
    pr.set_defaults(func=cmd_project)

    me = sub.add_parser("measure", help="measure Wilson-loop observables")
    me.add_argument("--obs", default="plaq,loops6,polyakov")
    me.add_argument("--rmax", type=int)
    me.add_argument("--tmax", type=int)
    me.add_argument("--in", required=True)
    me.add_argument("--out", required=True)
    me.set_defaults(func=cmd_measure)

    an = sub.add_parser("analyze", help="post-process measurement tables")
    an.add_argument("mode", choices=["potential", "error-curve", "beta-scan"])
    an.add_argument("--in", nargs="+", required=True)
    an.add_argument("--out", required=True)
    an.add_argument("--tmin", type=int, default=1)
    an.add_argument("--tmax", type=int, default=4)
    an.set_defaults(func=cmd_analyze)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Su2LatError as exc:
        print(json.dumps({"error": exc.category, "detail": str(exc)}),
              file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": "runtime", "detail": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
