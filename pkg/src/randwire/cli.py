"""Command-line surface.

Subcommands: gen, analyze, fit-c, sweep, damage, exec, check, init-weights.
Exit codes: 0 success, 1 usage error, 2 validation/structural error, 3 I/O
error. Every artifact write is atomic (temp file + rename) and byte-stable
for identical invocations.

A JSON config file (``--config``) may supply any long flag by its underscored
name (e.g. ``{"model": "ws", "ws_k": 4}``); explicit flags win over the file.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import dot
from .assemble import assemble
from .complexity import analyze, fit_channels, mean_std, text_table
from .dag import dag_from_sample, validate_dag
from .errors import (
    ContractError,
    NonFiniteError,
    ParameterError,
    SchemaError,
    StructuralError,
)
from .graphs import GeneratorSpec, GraphFamily, is_connected, ring_lattice, sample
from .ir import NODE_OP_KINDS, OpKind, Regime, canonical_json, ir_from_json, ir_to_json
from .microexec import (
    TensorValue,
    damage,
    forward,
    init_weights,
    removable_edges,
    removable_nodes,
    store_from_json,
    store_to_json,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would sys.exit(2); we want exit 1
        raise UsageError(message)


def write_text_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# flag plumbing


def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=["er", "ba", "ws"], default=None, help="graph family")
    p.add_argument("--n", type=int, default=None, help="nodes per random stage")
    p.add_argument("--p", type=float, default=None, help="ER edge / WS rewiring probability")
    p.add_argument("--m", type=int, default=None, help="BA attachment edge count")
    p.add_argument("--k", type=int, default=None, help="WS ring neighbors (even)")
    p.add_argument("--seed", type=int, default=None, help="generator seed")


def _add_net_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--regime", choices=["small", "regular"], default=None)
    p.add_argument("--c", type=int, default=None, help="base channel count C")
    p.add_argument(
        "--op",
        choices=[k.value for k in NODE_OP_KINDS],
        default=None,
        help="node transformation kind",
    )
    p.add_argument("--classes", type=int, default=None)
    p.add_argument("--resolution", type=int, default=None)


SPEC_DEFAULTS = {"model": None, "n": 32, "p": None, "m": None, "k": None, "seed": 1}
NET_DEFAULTS = {
    "regime": "small",
    "c": 78,
    "op": OpKind.SEPARABLE_CONV_3X3.value,
    "classes": 1000,
    "resolution": 224,
}


def _merge(args: argparse.Namespace, defaults: dict) -> dict:
    """Resolve values: explicit flag > config file entry > built-in default."""
    config = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        try:
            text = path.read_text()
        except OSError as exc:
            raise exc
        try:
            config = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(config, dict):
            raise SchemaError(f"config file {path} must hold a JSON object")
    merged = dict(defaults)
    for key in defaults:
        if key in config:
            merged[key] = config[key]
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _build_spec(v: dict) -> GeneratorSpec:
    if v["model"] is None:
        raise UsageError("--model is required (er, ba or ws)")
    family = GraphFamily(v["model"])
    if family == GraphFamily.ER:
        return GeneratorSpec(family, v["n"], v["seed"], er_p=v["p"])
    if family == GraphFamily.BA:
        return GeneratorSpec(family, v["n"], v["seed"], ba_m=v["m"])
    return GeneratorSpec(family, v["n"], v["seed"], ws_k=v["k"], ws_p=v["p"])


def _assemble_from(v: dict, spec: GeneratorSpec):
    return assemble(
        spec,
        Regime(v["regime"]),
        v["c"],
        OpKind(v["op"]),
        class_count=v["classes"],
        input_resolution=v["resolution"],
    )


def _load_ir(path: str):
    return ir_from_json(Path(path).read_text())


def _load_or_init_weights(ir, weights_path: Optional[str], init_seed: Optional[int]):
    if weights_path:
        return store_from_json(Path(weights_path).read_text())
    return init_weights(ir, seed=init_seed if init_seed is not None else 0)


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args: argparse.Namespace) -> int:
    v = _merge(args, {**SPEC_DEFAULTS, **NET_DEFAULTS})
    spec = _build_spec(v)
    ir = _assemble_from(v, spec)
    prefix = args.out or f"{spec.label()}-{v['regime']}-c{v['c']}"
    ir_path = Path(f"{prefix}.ir.json")
    dot_path = Path(f"{prefix}.dot")
    write_text_atomic(ir_path, ir_to_json(ir))
    write_text_atomic(dot_path, dot.network_dot(ir))
    print(ir_path)
    print(dot_path)
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    ir = _load_ir(args.ir)
    report = analyze(ir, include_pool_ops=bool(args.pool_ops))
    sys.stdout.write(text_table(ir, report))
    if args.out:
        write_text_atomic(Path(args.out), canonical_json(report.to_json_dict()))
        print(args.out)
    return EXIT_OK


def cmd_fit_c(args: argparse.Namespace) -> int:
    v = _merge(args, {**SPEC_DEFAULTS, **NET_DEFAULTS})
    spec = _build_spec(v)
    c = fit_channels(
        spec,
        Regime(v["regime"]),
        args.target_flops,
        search_range=(args.min_c, args.max_c),
        op_kind=OpKind(v["op"]),
        class_count=v["classes"],
        input_resolution=v["resolution"],
    )
    ir = assemble(spec, Regime(v["regime"]), c, OpKind(v["op"]), v["classes"], v["resolution"])
    achieved = analyze(ir).total_flops
    print(f"c={c} flops={achieved}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    v = _merge(args, {**SPEC_DEFAULTS, **NET_DEFAULTS, "seeds": 5})
    base = _build_spec(v)
    rows = []
    for seed in range(1, int(v["seeds"]) + 1):
        spec = base.with_seed(seed)
        ir = _assemble_from(v, spec)
        report = analyze(ir)
        edges = sum(st.graph.edge_count for st in ir.stages)
        orig_inputs = sum(len(st.dag.original_inputs) for st in ir.stages)
        connected = sum(1 for st in ir.stages if is_connected(st.graph))
        rows.append(
            {
                "seed": seed,
                "flops": report.total_flops,
                "params": report.total_params,
                "edges": edges,
                "original_inputs": orig_inputs,
                "connected_stages": connected,
            }
        )
    columns = ["seed", "flops", "params", "edges", "original_inputs", "connected_stages"]
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(str(row[c]) for c in columns))
    for agg_name, idx in (("mean", 0), ("std", 1)):
        cells = [agg_name]
        for c in columns[1:]:
            stats = mean_std([row[c] for row in rows])
            cells.append(f"{stats[idx]:.4f}")
        lines.append(",".join(cells))
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        write_text_atomic(Path(args.out), csv_text)
        print(args.out)
    else:
        sys.stdout.write(csv_text)
    return EXIT_OK


def cmd_init_weights(args: argparse.Namespace) -> int:
    ir = _load_ir(args.ir)
    store = init_weights(ir, seed=args.seed)
    write_text_atomic(Path(args.out), store_to_json(store))
    print(args.out)
    return EXIT_OK


def _probe_input(ir, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.normal(size=(3, ir.input_resolution, ir.input_resolution))


def cmd_exec(args: argparse.Namespace) -> int:
    ir = _load_ir(args.ir)
    store = _load_or_init_weights(ir, args.weights, args.init_seed)
    if args.input:
        path = Path(args.input)
        if path.suffix == ".npy":
            x = np.load(path)
        else:
            x = TensorValue.from_json_dict(json.loads(path.read_text())).to_array()
    else:
        x = _probe_input(ir, args.input_seed)
    scores = forward(ir, store, x, mode=args.mode)
    payload = canonical_json({"scores": scores.tolist()})
    if args.out:
        write_text_atomic(Path(args.out), payload)
        print(args.out)
    else:
        sys.stdout.write(payload)
    return EXIT_OK


def cmd_damage(args: argparse.Namespace) -> int:
    ir = _load_ir(args.ir)
    store = _load_or_init_weights(ir, args.weights, args.init_seed)
    x = _probe_input(ir, args.probe_seed)
    baseline = forward(ir, store, x, mode="eval")
    base_norm = float(np.linalg.norm(baseline))

    lines = ["kind,stage,element,degree_metric,downstream_count,status,output_delta"]
    for removal in removable_nodes(ir) + removable_edges(ir):
        kind, stage_index = removal[0], removal[1]
        element = "n" + str(removal[2]) if kind == "node" else f"{removal[2]}-{removal[3]}"
        stage_name = ir.stages[stage_index].name
        try:
            new_ir, new_store, stats = damage(ir, store, removal)
            scores = forward(new_ir, new_store, x, mode="eval")
            delta = float(np.linalg.norm(scores - baseline)) / max(base_norm, 1e-12)
            lines.append(
                f"{kind},{stage_name},{element},{stats.degree_metric},"
                f"{len(stats.downstream)},ok,{delta:.6f}"
            )
        except StructuralError:
            lines.append(f"{kind},{stage_name},{element},,,structural_error,")
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        write_text_atomic(Path(args.out), csv_text)
        print(args.out)
    else:
        sys.stdout.write(csv_text)
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    v = _merge(args, {**SPEC_DEFAULTS, **NET_DEFAULTS, "seeds": 5})
    base = _build_spec(v)
    failures = 0

    def report(name: str, ok: bool) -> None:
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'} {name}")
        if not ok:
            failures += 1

    for seed in range(1, int(v["seeds"]) + 1):
        spec = base.with_seed(seed)
        sampled = sample(spec)
        again = sample(spec)
        report(f"seed {seed}: determinism", sampled.graph == again.graph)

        g = sampled.graph
        degrees_ok = all(u != v2 for u, v2 in g.edges) and len(set(g.edges)) == g.edge_count
        report(f"seed {seed}: simple graph", degrees_ok)

        fam = spec.family
        if fam == GraphFamily.BA:
            expected = spec.ba_m * (spec.node_count - spec.ba_m)
            report(f"seed {seed}: ba edge count {expected}", g.edge_count == expected)
        elif fam == GraphFamily.WS:
            expected = spec.node_count * spec.ws_k // 2
            report(f"seed {seed}: ws edge count {expected}", g.edge_count == expected)
            if spec.ws_p == 0:
                report(
                    f"seed {seed}: ws ring lattice",
                    g == ring_lattice(spec.node_count, spec.ws_k),
                )

        d = dag_from_sample(sampled)
        diag = validate_dag(d)
        report(f"seed {seed}: dag acyclic", diag.cycle_free)
        in_deg, out_deg = d.in_degrees(), d.out_degrees()
        deg = g.degrees()
        conserved = all(in_deg[d.index_map[nid]] + out_deg[d.index_map[nid]] == deg[nid] for nid in range(g.n))
        report(f"seed {seed}: degree conservation", conserved)

        ir = _assemble_from(v, spec)
        ok_channels = True
        for stage in ir.stages:
            for node in stage.nodes:
                for src in node.in_edges:
                    producer = stage.node_by_id(src)
                    if producer.out_channels != node.in_channels:
                        ok_channels = False
        report(f"seed {seed}: channel bookkeeping", ok_channels)
        ok_stride = all(
            (node.stride == 2) == (stage.input_node in node.in_edges)
            for stage in ir.stages
            for node in stage.internal_nodes()
        )
        report(f"seed {seed}: stride rule", ok_stride)
        report(f"seed {seed}: ir round trip", ir_from_json(ir_to_json(ir)) == ir)

    return EXIT_OK if failures == 0 else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# parser


def build_parser() -> _Parser:
    parser = _Parser(prog="randwire", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="JSON file mirroring the flags")

    p = sub.add_parser("gen", help="sample a spec and emit IR JSON + DOT")
    _add_spec_flags(p)
    _add_net_flags(p)
    p.add_argument("--out", default=None, help="output path prefix")
    common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("analyze", help="FLOPs/parameter report for an IR file")
    p.add_argument("--ir", required=True)
    p.add_argument("--out", default=None, help="write .report.json here")
    p.add_argument("--pool-ops", action="store_true", dest="pool_ops", help="fold pooling ops into the total")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fit-c", help="find C whose FLOPs are closest to a target")
    _add_spec_flags(p)
    _add_net_flags(p)
    p.add_argument("--target-flops", type=float, required=True)
    p.add_argument("--min-c", type=int, default=1)
    p.add_argument("--max-c", type=int, default=1024)
    common(p)
    p.set_defaults(func=cmd_fit_c)

    p = sub.add_parser("sweep", help="seed sweep with mean/std summary")
    _add_spec_flags(p)
    _add_net_flags(p)
    p.add_argument("--seeds", type=int, default=None, help="sweep seeds 1..k (default 5)")
    p.add_argument("--out", default=None, help="write .sweep.csv here")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("init-weights", help="deterministic weight store for an IR")
    p.add_argument("--ir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_init_weights)

    p = sub.add_parser("exec", help="run the reference interpreter")
    p.add_argument("--ir", required=True)
    p.add_argument("--weights", default=None)
    p.add_argument("--init-seed", type=int, default=None, help="init weights when no file given")
    p.add_argument("--input", default=None, help=".npy or TensorValue JSON input")
    p.add_argument("--input-seed", type=int, default=0, help="deterministic probe input seed")
    p.add_argument("--mode", choices=["eval", "train"], default="eval")
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_exec)

    p = sub.add_parser("damage", help="stats table over all single-element removals")
    p.add_argument("--ir", required=True)
    p.add_argument("--weights", default=None)
    p.add_argument("--init-seed", type=int, default=None)
    p.add_argument("--probe-seed", type=int, default=0)
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_damage)

    p = sub.add_parser("check", help="run the invariant suite for a spec")
    _add_spec_flags(p)
    _add_net_flags(p)
    p.add_argument("--seeds", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_check)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParameterError, ContractError, SchemaError, StructuralError, NonFiniteError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
