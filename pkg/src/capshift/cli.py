"""Command-line front end: configure experiments, run them, emit artifacts.

Subcommands map onto the library layers: ``constants`` prints the closed-form
tables, ``capacity``/``spectrum`` run single solves, ``verify`` drives a
ladder experiment from a TOML config, ``isospectral`` compares the two-pole
spectrum with its half-domain twins, and ``ab-collide`` runs the pole
collision ladder.  Every run writes CSV (schema-versioned header line) and a
JSON report; ``--plot`` adds an SVG derived from the same CSV data.

Exit codes: 0 pass, 1 usage/validation (including a failed verdict),
2 hypothesis violation, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - 3.10 fallback
    import tomli as tomllib

from . import aharonov_bohm, asymptotics, capacity, closed_form, geometry, spectral
from .errors import CapshiftError, HypothesisViolation, NumericalFailure, ValidationError

CSV_SCHEMA = "capshift-csv v1"

# template kinds a theorem's law is stated for (config invariant)
_TEMPLATE_KINDS = {
    "T-seg": ("segment",),
    "T-seg-tangent": ("segment",),
    "T-disk": ("disk",),
    "T-one": ("segment", "disk", "polyline"),
    "P-nonvanishing": ("segment", "disk", "polyline"),
    "P-diam": ("segment", "disk", "polyline"),
    "P-shift": ("segment", "disk", "polyline"),
}


# ---------------------------------------------------------------------------
# serialization helpers


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _write_csv(path: Path, kind: str, header: list, rows: list) -> None:
    lines = [f"# {CSV_SCHEMA} {kind}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row[col]) for col in header))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(_jsonable(payload), indent=2) + "\n", encoding="utf-8")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# config parsing


def _load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path!r}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"malformed config {path!r}: {exc}") from exc


def _domain_from(cfg: dict) -> geometry.Domain:
    kind = cfg.get("kind", "rectangle")
    if kind == "rectangle":
        return geometry.rectangle(float(cfg["a"]), float(cfg["b"]))
    if kind == "disk":
        return geometry.disk(float(cfg.get("r", 1.0)))
    if kind == "polygon":
        return geometry.polygon(
            [tuple(v) for v in cfg["vertices"]], anchor=tuple(cfg["anchor"])
        )
    raise ValidationError(f"unknown domain kind {kind!r}")


def _template_from(cfg: dict) -> geometry.CompactSet:
    kind = cfg.get("kind", "segment")
    if kind == "segment":
        return geometry.segment(
            float(cfg.get("half_length", 0.5)), angle=float(cfg.get("angle", 0.0))
        )
    if kind == "disk":
        return geometry.closed_disk(float(cfg.get("radius", 1.0)))
    if kind == "polyline":
        return geometry.polyline([tuple(p) for p in cfg["points"]])
    raise ValidationError(f"unknown template kind {kind!r}")


def _parse_spec(spec: str, what: str):
    name, _, rest = spec.partition(":")
    parts = [float(tok) for tok in rest.split(",") if tok] if rest else []
    return name, parts


def _domain_from_flag(spec: str) -> geometry.Domain:
    name, parts = _parse_spec(spec, "domain")
    if name == "rectangle" and len(parts) == 2:
        return geometry.rectangle(*parts)
    if name == "disk" and len(parts) == 1:
        return geometry.disk(parts[0])
    raise ValidationError(
        f"cannot parse domain {spec!r}; use rectangle:A,B or disk:R"
    )


def _set_from_flag(spec: str) -> geometry.CompactSet:
    name, parts = _parse_spec(spec, "set")
    if name == "disk" and len(parts) == 1:
        return geometry.closed_disk(parts[0])
    if name == "segment" and len(parts) in (1, 2):
        return geometry.segment(parts[0], angle=parts[1] if len(parts) == 2 else 0.0)
    raise ValidationError(
        f"cannot parse set {spec!r}; use disk:EPS or segment:HALF[,ANGLE]"
    )


def _ladder_from_flag(text: str) -> tuple:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok)
    except ValueError as exc:
        raise ValidationError(f"cannot parse ladder {text!r}") from exc


# ---------------------------------------------------------------------------
# plotting (SVG artifacts derived from the CSV data)


def _save_svg(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


def _plot_ladder(report, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "capshift"
    xs = np.array(
        [
            r.delta if report.theorem_id in ("T-one", "P-diam") else r.eps
            for r in report.rows
        ]
    )
    if report.theorem_id == "P-shift":
        ys = np.array([r.dlam / r.ucap for r in report.rows])
        fig, ax = plt.subplots(figsize=(4.8, 3.6))
        ax.semilogx(xs, ys, "o-", label="shift / u-capacity")
        ax.axhline(1.0, color="k", lw=0.8, ls="--")
        ax.set_ylabel("ratio")
    else:
        ys = np.array(
            [r.cap if report.theorem_id == "P-diam" else r.dlam for r in report.rows]
        )
        fig, ax = plt.subplots(figsize=(4.8, 3.6))
        ax.loglog(xs, np.abs(ys), "o", label="measured")
        grid = np.geomspace(xs.min(), xs.max(), 64)
        fit = report.fitted
        if fit is not None and fit.kind == "power_law":
            ax.loglog(grid, fit.constant * grid**fit.exponent, "-", label="fitted")
        elif fit is not None and fit.kind == "log_law":
            curve = fit.constant / np.abs(np.log(grid))
            if fit.second_order is not None:
                curve = curve + fit.second_order / np.log(grid) ** 2
            ax.loglog(grid, curve, "-", label="fitted")
        pred = report.predicted
        if pred is not None and pred.law_kind == "power_law":
            ax.loglog(grid, pred.constant * grid**pred.exponent, ":", label="predicted")
        elif pred is not None and pred.law_kind == "log_law":
            ax.loglog(grid, pred.constant / np.abs(np.log(grid)), ":", label="predicted")
        ax.set_ylabel("eigenvalue shift" if report.theorem_id != "P-diam" else "capacity")
    ax.set_xlabel("set size")
    ax.set_title(f"{report.case_id}: {'pass' if report.verdict else 'fail'}")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save_svg(fig, path)
    plt.close(fig)


def _plot_pairs(report, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "capshift"
    idx = [p.index for p in report.pairs]
    gaps = [p.rel_gap for p in report.pairs]
    fig, ax = plt.subplots(figsize=(4.8, 3.6))
    ax.bar(idx, gaps, color=["tab:blue" if p.source == "NDN" else "tab:orange" for p in report.pairs])
    ax.axhline(report.tol, color="k", lw=0.8, ls="--", label=f"tolerance {report.tol}")
    ax.set_xlabel("eigenvalue index")
    ax.set_ylabel("relative mismatch")
    ax.set_title(f"two-pole vs sector union, a={report.a}, h={report.h:.5g}")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save_svg(fig, path)
    plt.close(fig)


# ---------------------------------------------------------------------------
# subcommands


def cmd_constants(args) -> int:
    k_max = int(args.k_max)
    if k_max > 12:
        raise ValidationError("k_max must be <= 12 (the quadrature table is exact there)")
    if k_max < 0:
        raise ValidationError("k_max must be >= 0")
    rows = []
    if k_max == 0:
        print("note: k=0 uses log law; no C_k constants apply")
    for k in range(1, k_max + 1):
        for j in range(1, k + 1):
            val = closed_form.fourier_A(j, k)
            rows.append({"quantity": "A", "j": j, "k": k, "value": val})
            print(f"A[{j},{k}] = {val:.12g}")
        ck = closed_form.C_constant(k)
        rows.append({"quantity": "C", "j": "", "k": k, "value": ck})
        print(f"C[{k}]  = {ck:.12g}")
    for k, beta, alpha in args.poly or ():
        P = closed_form.harmonic_polynomial(int(k), beta, alpha)
        val = closed_form.D_constant(P)
        rows.append({"quantity": "D", "j": "", "k": int(k), "value": val})
        print(f"D(beta={beta:g}, k={int(k)}, alpha={alpha:g}) = {val:.12g}")
    if args.out:
        _write_csv(
            _outdir(args) / "constants.csv", "constants", ["quantity", "j", "k", "value"], rows
        )
    return 0


def cmd_capacity(args) -> int:
    domain = _domain_from_flag(args.domain)
    K = _set_from_flag(args.set)
    res = capacity.condenser_capacity(domain, K, float(args.h), extrapolate=not args.no_extrapolate)
    print(f"capacity = {res.value:.12g}  (h = {res.h:g}, extrapolated = {res.extrapolated})")
    if args.out:
        out = _outdir(args)
        rows = [
            {
                "domain": args.domain,
                "set": args.set,
                "h": h,
                "value": v,
                "l2_norm_sq": l2,
            }
            for h, v, l2 in res.raw
        ]
        rows.append(
            {
                "domain": args.domain,
                "set": args.set,
                "h": res.h,
                "value": res.value,
                "l2_norm_sq": res.l2_norm_sq,
            }
        )
        _write_csv(
            out / "capacity.csv",
            "capacity",
            ["domain", "set", "h", "value", "l2_norm_sq"],
            rows,
        )
        _write_json(
            out / "capacity.json",
            {
                "domain": args.domain,
                "set": args.set,
                "value": res.value,
                "l2_norm_sq": res.l2_norm_sq,
                "h": res.h,
                "extrapolated": res.extrapolated,
            },
        )
    return 0


def cmd_spectrum(args) -> int:
    domain = _domain_from_flag(args.domain)
    M = int(args.m)
    if args.a is not None:
        res = aharonov_bohm.magnetic_spectrum(domain, float(args.a), float(args.h), M)
        kind = "two-pole"
    else:
        res = spectral.spectrum(domain, float(args.h), M, extrapolate=args.extrapolate)
        kind = "dirichlet"
    for i, lam in enumerate(res.eigenvalues, start=1):
        print(f"lambda_{i} = {lam:.12g}")
    if args.out:
        rows = [
            {"kind": kind, "index": i, "h": res.h, "eigenvalue": float(lam)}
            for i, lam in enumerate(res.eigenvalues, start=1)
        ]
        if res.extrapolated is not None:
            for row, ex in zip(rows, res.extrapolated):
                row["extrapolated"] = float(ex)
            header = ["kind", "index", "h", "eigenvalue", "extrapolated"]
        else:
            header = ["kind", "index", "h", "eigenvalue"]
        _write_csv(_outdir(args) / "spectrum.csv", "spectrum", header, rows)
    return 0


def _report_artifacts(report, args) -> None:
    out = _outdir(args)
    stem = report.case_id.replace("/", "-")
    _write_csv(
        out / f"{stem}.csv",
        "ladder",
        [
            "case_id",
            "theorem_id",
            "eps",
            "delta",
            "h",
            "cap",
            "ucap",
            "lam",
            "lam_perturbed",
            "dlam",
            "l2_cap",
            "l2_ucap",
        ],
        report.to_records(),
    )
    _write_json(
        out / f"{stem}.json",
        {
            "case_id": report.case_id,
            "theorem_id": report.theorem_id,
            "verdict": report.verdict,
            "fitted": report.fitted,
            "predicted": report.predicted,
            "deviation": report.deviation,
            "expansion": report.expansion,
            "notes": report.notes,
            "rows": report.rows,
        },
    )
    if args.plot:
        _plot_ladder(report, out / f"{stem}.svg")


def _verify_config(args) -> dict:
    cfg = _load_config(args.config)
    theorem = cfg.get("theorem")
    if not theorem:
        raise ValidationError("config must name the experiment under the 'theorem' key")
    config = {
        "case_id": cfg.get("case_id", theorem),
        "N": int(cfg.get("N", 1)),
        "extrapolate": bool(cfg.get("extrapolate", True)),
    }
    if "domain" not in cfg:
        raise ValidationError("config must carry a [domain] section")
    config["domain"] = _domain_from(cfg["domain"])
    if theorem != "T-AB":
        if "template" not in cfg:
            raise ValidationError("config must carry a [template] section")
        template_cfg = cfg["template"]
        kinds = _TEMPLATE_KINDS.get(theorem)
        if kinds and template_cfg.get("kind", "segment") not in kinds:
            raise ValidationError(
                f"{theorem} is stated for {'/'.join(kinds)} templates, "
                f"not {template_cfg.get('kind')!r}"
            )
        config["template"] = _template_from(template_cfg)
    if args.ladder:
        config["ladder"] = _ladder_from_flag(args.ladder)
    elif "ladder" in cfg:
        config["ladder"] = tuple(float(x) for x in cfg["ladder"])
    if args.h_rule is not None:
        config["h_rule"] = float(args.h_rule)
    elif "h_rule" in cfg:
        config["h_rule"] = float(cfg["h_rule"])
    tol = cfg.get("tolerances", {})
    if "constant" in tol:
        config["constant_tol"] = float(tol["constant"])
    if "exponent" in tol:
        config["exponent_tol"] = float(tol["exponent"])
    if "ratio_band" in tol:
        config["ratio_band"] = float(tol["ratio_band"])
    return theorem, config


def cmd_verify(args) -> int:
    theorem, config = _verify_config(args)
    report = asymptotics.verify(theorem, config)
    status = "pass" if report.verdict else "fail"
    print(f"{report.case_id} [{theorem}]: {status}")
    for key, val in sorted(report.deviation.items()):
        print(f"  {key} = {val}")
    for note in report.notes:
        print(f"  note: {note}")
    _report_artifacts(report, args)
    return 0 if report.verdict else 1


def cmd_ab_collide(args) -> int:
    if args.config:
        cfg = _load_config(args.config)
    else:
        cfg = {"domain": {"kind": "rectangle", "a": 1.0, "b": 0.8}}
    domain = _domain_from(cfg.get("domain", {"kind": "rectangle", "a": 1.0, "b": 0.8}))
    ladder = (
        _ladder_from_flag(args.ladder)
        if args.ladder
        else tuple(float(x) for x in cfg.get("ladder", asymptotics.DEFAULT_LADDER))
    )
    h_rule = float(args.h_rule if args.h_rule is not None else cfg.get("h_rule", 8.0))
    report = aharonov_bohm.ab_collision_asymptotics(
        domain,
        int(args.n if args.n is not None else cfg.get("N", 1)),
        ladder,
        h_rule,
        case_id=cfg.get("case_id", "T-AB"),
    )
    status = "pass" if report.verdict else "fail"
    print(f"{report.case_id} [T-AB]: {status}")
    for key, val in sorted(report.deviation.items()):
        print(f"  {key} = {val}")
    _report_artifacts(report, args)
    return 0 if report.verdict else 1


def cmd_isospectral(args) -> int:
    if args.config:
        cfg = _load_config(args.config)
    else:
        cfg = {}
    domain = _domain_from(cfg.get("domain", {"kind": "rectangle", "a": 1.0, "b": 0.8}))
    a = float(cfg.get("a", 0.1))
    h = float(cfg.get("h", 1.0 / 128.0))
    if "h_half" in cfg and float(cfg["h_half"]) != h:
        raise ValidationError(
            "mismatched grids: the two-pole operator and its half-domain twins "
            "must share one spacing (h_half must equal h)"
        )
    M = int(cfg.get("M", 6))
    tol = float(cfg.get("tol", 0.01))
    report = aharonov_bohm.isospectrality_check(domain, a, h, M, tol=tol)
    status = "pass" if report.passed else "fail"
    print(
        f"isospectral a={a} h={h:.5g} M={M}: {status} "
        f"(max relative mismatch {report.max_rel_mismatch:.3e}, tolerance {tol})"
    )
    for p in report.pairs:
        print(
            f"  {p.index}: two-pole {p.lam_ab:.9g} vs {p.source} {p.lam_union:.9g} "
            f"(rel {p.rel_gap:.2e})"
        )
    out = _outdir(args)
    _write_csv(
        out / "isospectral.csv",
        "isospectral",
        [
            "index",
            "a",
            "a_eff",
            "h",
            "lam_ab",
            "lam_ndn",
            "lam_dnd",
            "lam_union",
            "source",
            "rel_gap",
        ],
        report.to_records(),
    )
    _write_json(out / "isospectral.json", report)
    if args.plot:
        _plot_pairs(report, out / "isospectral.svg")
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# parser


def _poly_triple(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("polynomial spec must be K,BETA,ALPHA")
    return float(parts[0]), float(parts[1]), float(parts[2])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capshift",
        description="Capacity-driven eigenvalue shifts: solvers, ladders, reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="closed-form A/C tables and D values")
    p.add_argument("--k-max", default=4, help="largest vanishing order (<= 12)")
    p.add_argument(
        "--poly",
        action="append",
        type=_poly_triple,
        metavar="K,BETA,ALPHA",
        help="also print D for this local model (repeatable)",
    )
    p.add_argument("--out", default="", help="directory for constants.csv")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("capacity", help="condenser capacity of a compact set")
    p.add_argument("--domain", required=True, help="rectangle:A,B or disk:R")
    p.add_argument("--set", required=True, help="disk:EPS or segment:HALF[,ANGLE]")
    p.add_argument("--h", required=True, help="grid spacing")
    p.add_argument("--no-extrapolate", action="store_true")
    p.add_argument("--out", default="", help="directory for capacity.csv/json")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("spectrum", help="lowest Dirichlet or two-pole eigenvalues")
    p.add_argument("--domain", required=True, help="rectangle:A,B or disk:R")
    p.add_argument("--h", required=True, help="grid spacing")
    p.add_argument("--m", default=6, help="number of eigenvalues")
    p.add_argument("--a", default=None, help="pole half-distance (two-pole operator)")
    p.add_argument("--extrapolate", action="store_true", help="(h, h/2) refinement")
    p.add_argument("--out", default="", help="directory for spectrum.csv")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", help="run a ladder experiment from a TOML config")
    p.add_argument("--config", required=True, help="TOML experiment config")
    p.add_argument("--out", default=".", help="artifact directory")
    p.add_argument("--ladder", default="", help="override: comma-separated sizes")
    p.add_argument("--h-rule", default=None, help="override: size/h ratio")
    p.add_argument("--plot", action="store_true", help="also write an SVG plot")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("isospectral", help="two-pole spectrum vs half-domain twins")
    p.add_argument("--config", default="", help="TOML config (defaults: 1 x 0.8 box)")
    p.add_argument("--out", default=".", help="artifact directory")
    p.add_argument("--plot", action="store_true", help="also write an SVG plot")
    p.set_defaults(func=cmd_isospectral)

    p = sub.add_parser("ab-collide", help="pole collision ladder")
    p.add_argument("--config", default="", help="TOML config (defaults: 1 x 0.8 box)")
    p.add_argument("--n", default=None, help="eigenvalue index")
    p.add_argument("--ladder", default="", help="override: comma-separated half-distances")
    p.add_argument("--h-rule", default=None, help="override: size/h ratio")
    p.add_argument("--out", default=".", help="artifact directory")
    p.add_argument("--plot", action="store_true", help="also write an SVG plot")
    p.set_defaults(func=cmd_ab_collide)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except HypothesisViolation as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except CapshiftError as exc:  # pragma: no cover - future error kinds
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
