"""Command line entry point.

Every subcommand writes JSON to stdout (DOT or CSV where asked).  Exit codes:
0 success, 1 validation failure or negative outcome, 2 usage error.  File
arguments default to ``-`` (stdin), so build commands pipe into the rest.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from . import brunnian, constructors, globalizer, persistence, serialize
from .core import BondId, Hyperstructure
from .errors import HyperstructError, ParseError, SchemaError, ValidationError
from .globalizer import Product, PropertyAssignment


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _emit(obj: Any) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


def parse_value(text: str) -> Any:
    """CLI literal: int, then float, then ``product:TOKEN``, else a label."""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    if text.startswith("product:"):
        return Product(text[len("product:"):])
    return text


def _int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"{flag} expects comma-separated integers, got {text!r}") from exc


def _float_list(text: str, flag: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"{flag} expects comma-separated numbers, got {text!r}") from exc


def _bond(text: str, flag: str) -> BondId:
    try:
        return BondId.parse(text)
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}") from exc


def _load(path: str) -> serialize.Document:
    return serialize.decode(_read(path))


def _spec(args, h: Hyperstructure) -> globalizer.GlobalizerSpec:
    kinds = args.agg.split(",")
    if len(kinds) == 1:
        kinds = kinds * h.height
    if len(kinds) != h.height:
        raise UsageError(f"--agg names {len(kinds)} aggregators for {h.height} levels")
    try:
        return globalizer.GlobalizerSpec.from_kinds(kinds)
    except ValueError as exc:
        raise UsageError(f"--agg: {exc}") from exc


def _omega0(doc: serialize.Document, fill: str | None) -> PropertyAssignment:
    values = dict(doc.assignments[0].values)
    if fill is not None:
        for b in doc.structure.levels[0]:
            values.setdefault(b, parse_value(fill))
    return PropertyAssignment(0, values)


# -- config files ------------------------------------------------------------

def cone_spec_from_dict(cfg: dict) -> tuple[list[str], constructors.ConeSpec]:
    points = cfg.get("points", [])
    if isinstance(points, int):
        points = constructors._ids("x", points)
    sizes = [s if s == "all" else int(s) for s in cfg.get("subset_sizes", [])]
    return [str(p) for p in points], constructors.ConeSpec(tuple(sizes), cfg.get("cap"))


def stack_plan_from_dict(cfg: dict) -> constructors.StackPlan:
    """``{"alphabet": {name: dim}, "base": name | [names], "steps": [...]}``.

    Steps are ``{"arity": k, "label": "..."}`` or ``{"restart": "note"}``.
    """
    steps = []
    for step in cfg.get("steps", []):
        if "restart" in step:
            steps.append(constructors.Restart(str(step["restart"])))
        else:
            steps.append(constructors.StackMove(int(step["arity"]), str(step.get("label", ""))))
    return constructors.StackPlan(dict(cfg["alphabet"]), cfg["base"], tuple(steps))


def family_from_dict(cfg: dict, base_dir: Path) -> persistence.ParametrizedFamily:
    """Clustering sweep: ``{"builder": "clusters", "matrix": path | rows, "grid": [...] | "merges"}``.

    At parameter ``t`` the builder is the one-threshold ladder ``[t]``.
    """
    if cfg.get("builder", "clusters") != "clusters":
        raise UsageError(f"unknown sweep builder {cfg.get('builder')!r}")
    matrix = cfg["matrix"]
    labels = cfg.get("labels")
    if isinstance(matrix, str):
        path = Path(matrix)
        if not path.is_absolute():
            path = base_dir / path
        matrix, header = serialize.read_matrix_csv(_read(str(path)))
        labels = labels or header
    probe = constructors.ClusterLadder(matrix, (), labels)
    grid = cfg.get("grid", "merges")
    if grid == "merges":
        grid = probe.merge_heights()

    def build(t: float) -> Hyperstructure:
        return constructors.cluster_hyperstructure(constructors.ClusterLadder(probe.dissimilarity, (t,), labels))

    return persistence.ParametrizedFamily(tuple(float(t) for t in grid), build)


# -- subcommands -------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        doc = serialize.decode(_read(args.file), check=False)
    except (ParseError, SchemaError) as exc:
        _emit({"ok": False, "violations": [{"rule": type(exc).__name__, "bond": None, "message": str(exc)}],
               "warnings": []})
        return 1
    _emit(doc.report.to_dict())
    return 0 if doc.report.ok else 1


def cmd_build_cones(args) -> int:
    cfg: dict = json.loads(_read(args.config)) if args.config else {}
    if args.points is not None:
        cfg["points"] = int(args.points) if args.points.isdigit() else args.points.split(",")
    if args.sizes is not None:
        cfg["subset_sizes"] = [s if s == "all" else int(s) for s in args.sizes.split(",")]
    if not cfg.get("points") or not cfg.get("subset_sizes"):
        raise UsageError("build-cones needs --points and --sizes (or --config)")
    points, spec = cone_spec_from_dict(cfg)
    h, props = constructors.cone_hyperstructure(points, spec)
    sys.stdout.write(serialize.encode(h, props, {"constructor": "cones"}))
    return 0


def cmd_build_clusters(args) -> int:
    matrix, labels = serialize.read_matrix_csv(_read(args.csv))
    ladder = constructors.ClusterLadder(matrix, tuple(_float_list(args.thresholds, "--thresholds")), labels)
    h = constructors.cluster_hyperstructure(ladder)
    sys.stdout.write(serialize.encode(h, None, {"constructor": "clusters", "thresholds": list(ladder.thresholds)}))
    return 0


def cmd_build_brunnian(args) -> int:
    type_ = _int_list(args.type, "--type")
    try:
        spec = brunnian.BrunnianSpec.of_type(*type_, order=args.order)
    except ValueError as exc:
        raise UsageError(f"--type/--order: {exc}") from exc
    h = brunnian.build_brunnian(spec)
    meta = {"constructor": "brunnian", "type": type_, "order": args.order}
    sys.stdout.write(serialize.encode(h, None, meta))
    return 0


def cmd_build_stack(args) -> int:
    try:
        plan = stack_plan_from_dict(json.loads(_read(args.plan)))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad stack plan: {exc}") from exc
    result = constructors.stack(plan)
    meta = {"constructor": "stack", "labels": result.labels, "restarts": result.restarts,
            "virtual_dims": result.virtual_dims}
    sys.stdout.write(serialize.encode(result.structure, None, meta))
    return 0


def cmd_globalize(args) -> int:
    doc = _load(args.file)
    h = doc.structure
    spec = _spec(args, h)
    upper = globalizer.globalize(h, _omega0(doc, args.fill), spec)
    assignments = [_omega0(doc, args.fill)] + upper
    top = {str(b): serialize.encode_value(assignments[h.height][b]) for b in h.top()}
    meta = dict(doc.metadata, globalizer={"agg": args.agg, "top": top})
    sys.stdout.write(serialize.encode(h, assignments, meta))
    return 0


def cmd_localize(args) -> int:
    doc = _load(args.file)
    h = doc.structure
    top = _bond(args.top, "--top") if args.top else h.single_top()
    refiners = globalizer.uniform_refiners(args.refiner, h.height)
    base = globalizer.localize(h, top, parse_value(args.target), refiners)
    meta = dict(doc.metadata, localized={"top": str(top), "target": serialize.encode_value(parse_value(args.target))})
    sys.stdout.write(serialize.encode(h, [base], meta))
    return 0


def cmd_minimal_flip(args) -> int:
    doc = _load(args.file)
    h = doc.structure
    spec = _spec(args, h)
    alphabet = [parse_value(x) for x in args.alphabet.split(",")] if args.alphabet else None
    try:
        changes = globalizer.minimal_flip(
            h, _omega0(doc, args.fill), spec, parse_value(args.desired), args.budget, alphabet
        )
    except globalizer.NotFound as exc:
        _emit({"found": False, "message": str(exc)})
        return 1
    _emit({
        "found": True,
        "size": len(changes),
        "changes": {str(b): serialize.encode_value(v) for b, v in sorted(changes.items())},
    })
    return 0


def cmd_brunnian_check(args) -> int:
    h = _load(args.file).structure
    if args.bond:
        targets = [_bond(args.bond, "--bond")]
    else:
        targets = [b for b in h.bonds() if b.level >= 1 and len(h.boundary[b]) >= 2]
    results = {}
    for b in targets:
        try:
            results[str(b)] = brunnian.is_brunnian_bond(h, b)
        except HyperstructError as exc:
            results[str(b)] = {"error": type(exc).__name__, "message": str(exc)}
    ok = all(v is True for v in results.values())
    _emit({"all": ok, "bonds": results})
    return 0 if ok else 1


def cmd_sweep(args) -> int:
    base = Path(args.plan).parent if args.plan != "-" else Path.cwd()
    try:
        family = family_from_dict(json.loads(_read(args.plan)), base)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"bad sweep plan: {exc}") from exc
    intervals = persistence.stability_rank(persistence.sweep(family)) if args.rank else persistence.sweep(family)
    if args.format == "csv":
        sys.stdout.write(persistence.intervals_to_csv(intervals))
    else:
        _emit({"grid": list(family.parameter_grid), "intervals": persistence.intervals_to_json(intervals)})
    return 0


def cmd_export_dot(args) -> int:
    doc = _load(args.file)
    sys.stdout.write(serialize.export_dot(doc.structure, doc.assignments))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hyperstruct", description="Build and analyse hyperstructures.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a document, print the report")
    s.add_argument("file", nargs="?", default="-")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("build-cones", help="cones on finite subsets")
    s.add_argument("--config", help="JSON with points and subset_sizes")
    s.add_argument("--points", help="a count, or comma-separated point ids")
    s.add_argument("--sizes", help="subset size per level, e.g. 3,4 (or 'all')")
    s.set_defaults(func=cmd_build_cones)

    s = sub.add_parser("build-clusters", help="single-linkage ladder from a dissimilarity CSV")
    s.add_argument("csv")
    s.add_argument("--thresholds", required=True, help="strictly increasing, comma-separated")
    s.set_defaults(func=cmd_build_clusters)

    s = sub.add_parser("build-brunnian", help="grouped Brunnian structure")
    s.add_argument("--type", required=True, help="GROUPS,SIZE (or SIZE for one group)")
    s.add_argument("--order", type=int, default=1)
    s.set_defaults(func=cmd_build_brunnian)

    s = sub.add_parser("build-stack", help="hyperstructured stacking from a JSON plan")
    s.add_argument("plan", nargs="?", default="-")
    s.set_defaults(func=cmd_build_stack)

    for name, func, extra in (
        ("globalize", cmd_globalize, "aggregate level-0 properties to the top"),
        ("minimal-flip", cmd_minimal_flip, "smallest level-0 change reaching a top value"),
    ):
        s = sub.add_parser(name, help=extra)
        s.add_argument("file", nargs="?", default="-")
        s.add_argument("--agg", default="vote" if name == "minimal-flip" else "sum",
                       help="sum|max|vote|concat, or one per level comma-separated")
        s.add_argument("--fill", default="1", help="value for level-0 bonds without a property")
        s.set_defaults(func=func)
        if name == "minimal-flip":
            s.add_argument("--desired", required=True)
            s.add_argument("--budget", type=int, required=True)
            s.add_argument("--alphabet", help="comma-separated finite value set")

    s = sub.add_parser("localize", help="refine a top target down to level 0")
    s.add_argument("file", nargs="?", default="-")
    s.add_argument("--target", required=True)
    s.add_argument("--refiner", default="even_split", choices=["even_split", "split", "constant"])
    s.add_argument("--top", help="top bond as LEVEL:ID (default: the unique top bond)")
    s.set_defaults(func=cmd_localize)

    s = sub.add_parser("brunnian-check", help="Brunnian test for one or all bonds")
    s.add_argument("file", nargs="?", default="-")
    s.add_argument("--bond", help="LEVEL:ID")
    s.set_defaults(func=cmd_brunnian_check)

    s = sub.add_parser("sweep", help="bond persistence over a parameter grid")
    s.add_argument("plan", nargs="?", default="-")
    s.add_argument("--format", choices=["json", "csv"], default="json")
    s.add_argument("--rank", action="store_true", help="order by stability")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("export-dot", help="Graphviz rendering, one cluster per level")
    s.add_argument("file", nargs="?", default="-")
    s.add_argument("--format", choices=["dot"], default="dot")
    s.set_defaults(func=cmd_export_dot)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits 2
    except ValidationError as exc:
        _emit(exc.report.to_dict())
        return 1
    except HyperstructError as exc:
        _emit({"ok": False, "error": type(exc).__name__, "message": str(exc)})
        return 1
    except json.JSONDecodeError as exc:
        parser.error(f"config is not valid JSON: {exc}")
    except ValueError as exc:
        _emit({"ok": False, "error": "ValueError", "message": str(exc)})
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
