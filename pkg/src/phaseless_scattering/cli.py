"""Command line driver: synthesize, invert, verify-invariance, oracle-check.

Every subcommand reads one JSON config (angles in degrees). Exit codes are
0 on success, 2 on invalid input and 3 on numerical failure.

Example config::

    {
      "obstacle": {"kind": "apple"},
      "bc": {"kind": "dirichlet"},
      "pairs_deg": [[0, 120], [0, -120]],
      "ks": [0.5, 1, 3, 5, 7, 9, 11],
      "n_f": 128,
      "delta": 0.05,
      "seed": 1,
      "initial": {"r0": 0.5, "center": [-1.5, 0]},
      "inversion": {"max_iter": 50}
    }
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from pathlib import Path

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

logger = logging.getLogger("phaseless_scattering.cli")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


class MetadataMismatch(ConfigError):
    """Dataset header disagrees with the configuration."""


def _limit_threads(n: int | None) -> None:
    # only effective if numpy has not initialized its BLAS yet
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(n)


# --------------------------------------------------------------------------
# config parsing


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _field(cfg: dict, key: str, default=None, required: bool = False):
    if key not in cfg:
        if required:
            raise ConfigError(f"missing required field '{key}'")
        return default
    return cfg[key]


def _wrap(key: str, fn, value):
    try:
        return fn(value)
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"field '{key}': {exc}") from None


def parse_obstacle(spec):
    from .geometry import StarlikeCurve, benchmark

    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("field 'obstacle': expected an object with 'kind'")
    kind = spec["kind"]
    if kind == "starlike":
        return _wrap("obstacle", StarlikeCurve.from_json, spec)
    if kind == "circle":
        return _wrap("obstacle", lambda s: benchmark("circle", r0=float(s.get("r0", 1.0)), center=s.get("center", (0, 0))), spec)
    return _wrap("obstacle", lambda s: benchmark(s["kind"]), spec)


def parse_bc(spec):
    from .conditions import from_json

    if not isinstance(spec, dict):
        raise ConfigError("field 'bc': expected an object")
    return _wrap("bc", from_json, spec)


def parse_pairs(value) -> list:
    if not isinstance(value, list) or not value:
        raise ConfigError("field 'pairs_deg': expected a non-empty list of angle lists")
    pairs = []
    for i, p in enumerate(value):
        p = p if isinstance(p, list) else [p]
        if not 1 <= len(p) <= 2:
            raise ConfigError(f"field 'pairs_deg[{i}]': expected one or two angles")
        try:
            pairs.append([float(a) for a in p])
        except (TypeError, ValueError):
            raise ConfigError(f"field 'pairs_deg[{i}]': angles must be numbers") from None
    return pairs


def parse_ks(value) -> list:
    try:
        ks = [float(k) for k in value]
    except (TypeError, ValueError):
        raise ConfigError("field 'ks': expected a list of numbers") from None
    if not ks or any(k <= 0 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
        raise ConfigError("field 'ks': wavenumbers must be positive and strictly increasing")
    return ks


def parse_initial(spec, bc):
    from .conditions import Transmission
    from .geometry import StarlikeCurve
    from .inversion import IterateState

    if not isinstance(spec, dict):
        raise ConfigError("field 'initial': expected an object")
    lam = spec.get("lam")
    if isinstance(bc, Transmission) and lam is None:
        raise ConfigError("field 'initial.lam': required for a transmission inversion")
    if "alpha" in spec:
        curve = _wrap("initial", StarlikeCurve.from_json, spec)
    else:
        curve = _wrap("initial", lambda s: StarlikeCurve.circle(float(s.get("r0", 0.5)), s.get("center", (0, 0))), spec)
    return IterateState(curve, None if lam is None else float(lam))


def parse_inversion(cfg: dict, ks, n_f):
    from dataclasses import fields

    from .inversion import InversionConfig

    overrides = dict(_field(cfg, "inversion", {}))
    known = {f.name for f in fields(InversionConfig)}
    unknown = set(overrides) - known
    if unknown:
        raise ConfigError(f"field 'inversion': unknown keys {sorted(unknown)}")
    overrides.setdefault("delta", float(_field(cfg, "delta", 0.0)))
    overrides["ks"] = tuple(ks)
    overrides["n_f"] = n_f
    if "beta_bracket" in overrides:
        overrides["beta_bracket"] = tuple(overrides["beta_bracket"])
    return _wrap("inversion", lambda o: InversionConfig(**o), overrides)


def location_warning(pairs) -> str | None:
    """Message if fewer than two two-wave pairs have non-parallel bisectors."""
    import numpy as np

    from .incident import direction
    from .phaseless import bisector_normal

    normals = [
        bisector_normal(direction(np.deg2rad(p[0])), direction(np.deg2rad(p[1]))) for p in pairs if len(p) == 2
    ]
    for i in range(len(normals)):
        for j in range(i + 1, len(normals)):
            if abs(normals[i][0] * normals[j][1] - normals[i][1] * normals[j][0]) > 1e-8:
                return None
    return "no two direction pairs have non-parallel bisectors; the location is not determined by the data"


# --------------------------------------------------------------------------
# subcommands


def cmd_synthesize(cfg: dict, out: Path, dataset: Path | None = None, seed=None) -> Path:
    from .phaseless import synthesize

    curve = parse_obstacle(_field(cfg, "obstacle", required=True))
    bc = parse_bc(_field(cfg, "bc", required=True))
    pairs = parse_pairs(_field(cfg, "pairs_deg", required=True))
    ks = parse_ks(_field(cfg, "ks", required=True))
    n_f = int(_field(cfg, "n_f", 128))
    delta = float(_field(cfg, "delta", 0.0))
    if not 0 <= delta < 1:
        raise ConfigError("field 'delta': must satisfy 0 <= delta < 1")
    seed = _field(cfg, "seed") if seed is None else seed
    msg = location_warning(pairs)
    if msg:
        warnings.warn(msg, stacklevel=2)
    ds = synthesize(curve, bc, pairs, ks, n_f=n_f, delta=delta, seed=seed, n_q=int(_field(cfg, "n_q_data", 128)))
    ds.meta = {"obstacle": cfg["obstacle"], "bc": cfg["bc"]}
    path = dataset or out / "dataset.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    ds.write(path)
    return path


def check_metadata(ds, pairs, ks, n_f) -> None:
    import numpy as np

    if ds.n_f != n_f:
        raise MetadataMismatch(f"dataset has n_f={ds.n_f}, config expects {n_f}")
    if len(ds.ks) != len(ks) or not np.allclose(ds.ks, ks, rtol=0, atol=1e-12):
        raise MetadataMismatch(f"dataset wavenumbers {ds.ks.tolist()} differ from config {ks}")
    if ds.pairs_deg != pairs:
        raise MetadataMismatch(f"dataset direction pairs {ds.pairs_deg} differ from config {pairs}")


def cmd_invert(cfg: dict, out: Path, dataset: Path | None = None) -> dict:
    from .geometry import write_curve_json, write_polyline_csv
    from .inversion import reconstruct
    from .phaseless import PhaselessDataset

    bc = parse_bc(_field(cfg, "bc", required=True))
    pairs = parse_pairs(_field(cfg, "pairs_deg", required=True))
    ks = parse_ks(_field(cfg, "ks", required=True))
    n_f = int(_field(cfg, "n_f", 128))
    path = dataset or out / "dataset.csv"
    try:
        ds = PhaselessDataset.read(path)
    except FileNotFoundError:
        raise ConfigError(f"dataset file not found: {path}") from None
    check_metadata(ds, pairs, ks, n_f)
    msg = location_warning(pairs)
    if msg:
        warnings.warn(msg, stacklevel=2)
    initial = parse_initial(_field(cfg, "initial", required=True), bc)
    config = parse_inversion(cfg, ks, n_f)
    result = reconstruct(initial, ds, bc, config)

    out.mkdir(parents=True, exist_ok=True)
    report = result.report()
    write_polyline_csv(initial.curve, out / "initial.csv")
    for k, state in zip(ds.ks, result.trajectory):
        write_polyline_csv(state.curve, out / f"curve_k{k:g}.csv")
    write_curve_json(result.state.curve, out / "final_curve.json")
    if "obstacle" in cfg:
        report["metrics"] = _metrics(result.state.curve, parse_obstacle(cfg["obstacle"]))
        write_polyline_csv(parse_obstacle(cfg["obstacle"]), out / "true.csv")
    if result.state.lam is not None:
        report["lam"] = result.state.lam
    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, default=float)
    return report


def _metrics(recon, truth) -> dict:
    from . import metrics

    return {
        "center_error": metrics.center_error(recon, truth),
        "radial_relative_error": metrics.radial_relative_error(recon, truth),
        "hausdorff": metrics.hausdorff_distance(recon, truth),
    }


def invariance_shifts(spec: dict, d1, d2, k) -> list:
    """Explicit ``shifts`` plus lattice points from ``lattice: {n: [...], a: [...]}``."""
    from .phaseless import invariance_offset

    shifts = [list(map(float, s)) for s in spec.get("shifts", [])]
    lattice = spec.get("lattice")
    if lattice:
        if d2 is None:
            raise ConfigError("field 'invariance.lattice': needs a two-wave pair")
        tau = float(lattice.get("tau", 0.0))
        for n in lattice.get("n", [0]):
            for a in lattice.get("a", [0.0]):
                shifts.append(invariance_offset(d1, d2, k, int(n), float(a), tau).shift.tolist())
    if not shifts:
        raise ConfigError("field 'invariance': give 'shifts' or 'lattice'")
    return shifts


def cmd_verify_invariance(cfg: dict, out: Path) -> list:
    import numpy as np

    from .incident import direction
    from .phaseless import check_invariance

    curve = parse_obstacle(_field(cfg, "obstacle", required=True))
    bc = parse_bc(_field(cfg, "bc", required=True))
    spec = _field(cfg, "invariance", required=True)
    pair = parse_pairs([spec.get("pair_deg", [0])])[0]
    k = float(spec.get("k", 1.0))
    d1 = direction(np.deg2rad(pair[0]))
    d2 = None if spec.get("single", False) or len(pair) == 1 else direction(np.deg2rad(pair[1]))
    n_f = int(_field(cfg, "n_f", 128))
    rows = []
    for s in invariance_shifts(spec, d1, d2, k):
        rows.append((s[0], s[1], check_invariance(curve, bc, d1, d2, k, s, n_f=n_f, n_q=int(spec.get("n_q", 64)))))
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "invariance.csv", "w") as fh:
        fh.write("lx,ly,discrepancy\n")
        for r in rows:
            fh.write(f"{r[0]!r},{r[1]!r},{r[2]!r}\n")
    return rows


def cmd_oracle_check(cfg: dict, out: Path) -> list:
    import numpy as np

    from .forward import NystromSolver
    from .incident import PlaneWaveSuperposition
    from .oracle import series_farfield

    bc = parse_bc(_field(cfg, "bc", required=True))
    spec = _field(cfg, "oracle", {})
    R = float(spec.get("R", 1.0))
    center = spec.get("center", [0.0, 0.0])
    ks = parse_ks(spec.get("ks", _field(cfg, "ks", [0.5, 1, 3, 5, 7, 9, 11])))
    n_q = int(spec.get("n_q", 128))
    angles = parse_pairs([spec.get("angles_deg", [0.0])])[0]
    n_f = int(_field(cfg, "n_f", 128))
    from .geometry import benchmark

    curve = benchmark("circle", r0=R, center=center)
    rows = []
    for k in ks:
        w = PlaneWaveSuperposition.from_angles(k, angles, degrees=True)
        num = NystromSolver(curve, bc, k, n_q).solve(w, n_f).samples
        ref = series_farfield(R, center, bc, k, w.directions, n_f).samples
        rows.append((k, n_q, float(np.abs(num - ref).max())))
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "oracle_check.csv", "w") as fh:
        fh.write("k,n_q,sup_error\n")
        for r in rows:
            fh.write(f"{r[0]!r},{r[1]},{r[2]!r}\n")
    return rows


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phaseless-scattering", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("synthesize", "invert", "verify-invariance", "oracle-check"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--threads", type=int, default=None, help="BLAS thread limit")
        p.add_argument("-v", "--verbose", action="store_true")
        if name in ("synthesize", "invert"):
            p.add_argument("--dataset", default=None, help="dataset path (default OUT/dataset.csv)")
        if name == "synthesize":
            p.add_argument("--seed", type=int, default=None, help="override the config seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _limit_threads(args.threads)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    out = Path(args.out)
    try:
        import numpy as np

        from .forward import SolverSingularError
        from .inversion import SingularNormalEquations
        from .oracle import ModeSingularError

        numerical = (SolverSingularError, SingularNormalEquations, ModeSingularError, np.linalg.LinAlgError)
        cfg = load_config(args.config)
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        dataset = Path(args.dataset) if getattr(args, "dataset", None) else None
        if args.command == "synthesize":
            path = cmd_synthesize(cfg, out, dataset, args.seed)
            print(path)
        elif args.command == "invert":
            report = cmd_invert(cfg, out, dataset)
            for r in report["frequencies"]:
                print(f"k={r['k']:g} iterations={r['iterations']} Err={r['err_before']:.4f}->{r['err_after']:.4f}")
            if "lam" in report:
                print(f"lam={report['lam']:.4f}")
            if "metrics" in report:
                print(" ".join(f"{k}={v:.4g}" for k, v in report["metrics"].items()))
        elif args.command == "verify-invariance":
            for lx, ly, disc in cmd_verify_invariance(cfg, out):
                print(f"{lx:+.6f} {ly:+.6f} {disc:.3e}")
        else:
            for k, n_q, err in cmd_oracle_check(cfg, out):
                print(f"k={k:g} n_q={n_q} sup_error={err:.3e}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except numerical as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
