"""Command line entry point: ``prepgraph <subcommand> ...``.

Graphs are described by build parameters rather than files whenever a
certificate is involved, because only a graph built from the code knows
its codewords.  A graph spec is a comma-separated list of ``key=value``
with keys ``poly``, ``anchor`` (hex), ``perm`` (seed of a random coordinate
permutation) and ``scramble`` (seed of the vertex-id shuffle), e.g.
``poly=41,scramble=3``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .code import CodeParams, Word
from .errors import BudgetExceeded, StructuralError

log = logging.getLogger("prepgraph")

GRAPH_FORMATS = ("graph6", "dot", "json", "bin")


class UsageError(Exception):
    pass


# --- graph specs ----------------------------------------------------------------


def parse_graph_spec(text: str) -> dict:
    spec: dict = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, sep, value = part.partition("=")
        if not sep:
            raise UsageError(f"graph spec item {part!r} is not key=value")
        if key == "anchor":
            spec[key] = value.lower()
        elif key in ("poly", "perm", "scramble"):
            try:
                spec[key] = int(value, 0)
            except ValueError:
                raise UsageError(f"graph spec {key}={value!r}: not an integer") from None
        else:
            raise UsageError(f"unknown graph spec key {key!r}")
    return spec


def _params(t: int, poly: int | None) -> CodeParams:
    try:
        return CodeParams.from_t(t, poly or 0)
    except ValueError as exc:
        raise UsageError(f"--poly: {exc}") from None


def build_from_spec(t: int, spec: dict, threads: int = 1):
    from .graph import build_n0_graph, scramble

    params = _params(t, spec.get("poly"))
    anchor = None
    if spec.get("anchor"):
        try:
            anchor = Word.from_hex(spec["anchor"], params.n)
        except ValueError as exc:
            raise UsageError(f"--anchor: {exc}") from None
    perm = None
    if spec.get("perm") is not None:
        perm = np.random.default_rng(spec["perm"]).permutation(params.n)
    g = build_n0_graph(params, anchor, threads=threads, coordinate_permutation=perm)
    if spec.get("scramble") is not None:
        g = scramble(g, spec["scramble"])
    return g


def _spec_key(t: int, spec: dict) -> str:
    parts = [f"t{t}"] + [f"{k}{spec[k]}" for k in sorted(spec)]
    return "_".join(str(p) for p in parts)


def _spec_from_args(args) -> dict:
    spec = {}
    if args.poly:
        spec["poly"] = args.poly
    if getattr(args, "anchor", None):
        spec["anchor"] = args.anchor.lower()
    if getattr(args, "perm", None) is not None:
        spec["perm"] = args.perm
    if getattr(args, "scramble", None) is not None:
        spec["scramble"] = args.scramble
    return spec


def cached_analysis(g, key: str, cache_dir: Path | None):
    """(TripleCliques, PairSets), from the cache when possible."""
    from .cliques import PairSets, TripleCliques
    from .graph import find_anchor
    from .reconstruct import analyze_graph

    path = cache_dir / f"cliques_{key}.npz" if cache_dir else None
    if path is not None and path.exists():
        with np.load(path) as z:
            tc = TripleCliques(z["members"], int(z["anchor"]), g.n_vertices)
            ps = PairSets(z["ps_members"], z["ps_partner"], len(tc))
        log.info("cache hit: %s", path)
        return tc, ps
    tc, ps = analyze_graph(g, find_anchor(g))
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez_compressed(path, members=tc.members, anchor=tc.anchor,
                            ps_members=ps.members, ps_partner=ps.partner)
        log.info("cached clique analysis: %s", path)
    return tc, ps


# --- subcommands ------------------------------------------------------------------


def cmd_field_table(args, out) -> int:
    from .field import gf

    F = gf(args.t, args.poly or 0)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["element", "log", "cube", "inverse"])
    for a in F.elements():
        w.writerow([a, F.log[a] if a else "", F.cube(a), F.inv(a) if a else ""])
    return 0


def cmd_enumerate(args, out) -> int:
    from .enumeration import weight6_codewords

    params = _params(args.t, args.poly)
    t0 = time.perf_counter()
    words = weight6_codewords(params, method=args.method, threads=args.threads, cache_dir=args.cache_dir)
    log.info("enumerated in %.2fs", time.perf_counter() - t0)
    print(f"count: {len(words)}", file=out)
    return 0


def cmd_build_graph(args, out) -> int:
    from .graph import build_full_graph, export_graph

    if args.full:
        if args.anchor or args.perm is not None:
            raise UsageError("--full does not take --anchor or --perm")
        g = build_full_graph(_params(args.t, args.poly))
        if args.scramble is not None:
            from .graph import scramble

            g = scramble(g, args.scramble)
    else:
        g = build_from_spec(args.t, _spec_from_args(args), args.threads)
    print(f"vertices: {g.n_vertices}", file=out)
    print(f"edges: {g.n_edges}", file=out)
    if args.graph_out:
        Path(args.graph_out).write_bytes(export_graph(g, args.format))
        print(f"written: {args.graph_out} ({args.format})", file=out)
    return 0


def cmd_analyze(args, out) -> int:
    from .cliques import blocks_as_coordinates, blocks_from_graph, shared_vertex_relation
    from .enumeration import sqs_blocks

    spec = _spec_from_args(args)
    g = build_from_spec(args.t, spec, args.threads)
    tc, ps = cached_analysis(g, _spec_key(args.t, spec), args.cache_dir)
    blocks = blocks_from_graph(g, tc, ps)
    svp = shared_vertex_relation(g, tc)
    coord = blocks_as_coordinates(g, tc, blocks)
    sq = sqs_blocks(g.params)
    match = bool(np.array_equal(coord, sq[np.lexsort(sq.T[::-1])]))
    rows = [
        ("vertices", g.n_vertices),
        ("edges", g.n_edges),
        ("triple_cliques", len(tc)),
        ("clique_size", tc.size),
        ("shared_vertex_pairs", svp.n_pairs),
        ("pair_sets", len(ps)),
        ("block_partner_pairs", len(ps.block_partners())),
        ("blocks", len(blocks)),
        ("blocks_match_algebraic", int(match)),
        ("violations", 0 if match else 1),
    ]
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["metric", "value"])
    w.writerows(rows)
    return 0 if match else 1


def _labels_path(cert_path: str | None) -> Path:
    if cert_path is None:
        return Path("labels.npz").resolve()
    p = Path(cert_path)
    return p.with_name(p.stem + ".labels.npz")


def cmd_reconstruct(args, out) -> int:
    from .graph import NeighborhoodOracle
    from .reconstruct import extend_shell, propagate_n0, seed, verify

    spec = _spec_from_args(args)
    g = build_from_spec(args.t, spec, args.threads)
    tc, ps = cached_analysis(g, _spec_key(args.t, spec), args.cache_dir)
    rng = None if args.canonical else np.random.default_rng(args.seed)
    lab = propagate_n0(g, seed(g, tc, ps, rng), tc, ps)
    truth = g
    if args.shell_budget:
        oracle = NeighborhoodOracle(g, seed=args.oracle_seed)
        shells = [int(v) for v in np.flatnonzero(lab.labelled) if v != lab.anchor][:args.shell_budget]
        for u in shells:
            lab = extend_shell(oracle, lab, u, budget=args.vertex_budget)
        truth = oracle
    cert = verify(truth, lab)
    labels = _labels_path(args.output)
    lab.save(labels)
    doc = {
        "graph": {"t": args.t, **spec},
        "seed": None if args.canonical else args.seed,
        "oracle_seed": args.oracle_seed if args.shell_budget else None,
        "labels": labels.name if args.output else str(labels),
        "certificate": json.loads(cert.to_json()),
    }
    print(json.dumps(doc, indent=1, sort_keys=True), file=out)
    return 0


def cmd_verify(args, out) -> int:
    from .graph import NeighborhoodOracle
    from .reconstruct import EquivalenceCertificate, Labeling, check_certificate

    path = Path(args.cert)
    try:
        doc = json.loads(path.read_text())
        cert = EquivalenceCertificate.from_json(json.dumps(doc["certificate"]))
        spec = dict(doc["graph"])
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"CERT {args.cert}: {exc}") from None
    t = int(spec.pop("t"))
    g = build_from_spec(t, spec, args.threads)
    lab = Labeling.load(path.parent / doc["labels"])
    truth = g
    if lab.shells:
        truth = NeighborhoodOracle(g, seed=int(doc.get("oracle_seed") or 0))
        for u in lab.shells:
            truth.neighborhood(u)
    ok = check_certificate(cert, lab, truth)
    print(f"certificate: {'valid' if ok else 'INVALID'} ({cert.scope})", file=out)
    return 0 if ok else 1


def cmd_equivalence(args, out) -> int:
    from .reconstruct import codes_equivalent

    g1 = build_from_spec(args.t, parse_graph_spec(args.g1), args.threads)
    g2 = build_from_spec(args.t, parse_graph_spec(args.g2), args.threads)
    cert = codes_equivalent(g1, g2)
    if cert is None:
        print("no certificate", file=out)
        return 1
    print(cert.to_json(), file=out)
    return 0


def cmd_export(args, out) -> int:
    from .graph import export_graph

    g = build_from_spec(args.t, _spec_from_args(args), args.threads)
    data = export_graph(g, args.format)
    if args.output:
        return _write_binary(data, args.output)
    sys.stdout.buffer.write(data)
    return 0


def _write_binary(data: bytes, path: str) -> int:
    Path(path).write_bytes(data)
    return 0


def cmd_oracle(args, out) -> int:
    from . import oracle

    params = _params(args.t, args.poly)
    if args.check == "theorem1":
        res = oracle.theorem1_check(params)
    elif args.check == "lemma1":
        w6 = None
        if params.n > oracle.MAX_EXHAUSTIVE_N:
            from .enumeration import weight6_codewords

            w6 = weight6_codewords(params, cache_dir=args.cache_dir)
        res = oracle.lemma1_check(params, w6, sample=args.sample)
    elif args.check == "design":
        from .enumeration import sqs_blocks

        res = {"sqs_3_design": oracle.naive_design_check(sqs_blocks(params), params.n, 3, 4, 1)}
    else:  # cliques
        g = build_from_spec(args.t, _spec_from_args(args), args.threads)
        verts = np.r_[args.vertex, g.neighbors(args.vertex)]
        sizes = [len(c) for c in oracle.naive_maximal_cliques(g, verts)]
        res = {"vertex": args.vertex, "maximal_cliques": len(sizes),
               "sizes": {str(k): sizes.count(k) for k in sorted(set(sizes))}}
    print(json.dumps(res, sort_keys=True), file=out)
    return 0


# --- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--t", type=int, choices=(3, 5), default=3, help="field degree (n = 2^(t+1))")
    common.add_argument("--poly", type=lambda s: int(s, 0), default=None,
                        help="reduction polynomial as an integer (default: the standard one)")
    common.add_argument("--cache-dir", type=Path, default=None,
                        help="cache directory (default: $PREPGRAPH_CACHE_DIR)")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: all CPUs)")
    common.add_argument("--output", default=None, help="write the report here instead of stdout")
    common.add_argument("--log-level", default="WARNING",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))

    graph = argparse.ArgumentParser(add_help=False)
    graph.add_argument("--anchor", default=None, help="anchor codeword as hex")
    graph.add_argument("--perm", type=int, default=None, help="seed of a coordinate permutation of the code")
    graph.add_argument("--scramble", type=int, default=None, help="seed of a vertex-id shuffle")

    p = argparse.ArgumentParser(
        prog="prepgraph",
        description="Preparata code distance graphs: construction, clique analysis, blind reconstruction.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("field-table", parents=[common], help="GF(2^t) log/cube/inverse table (CSV)")
    s.set_defaults(func=cmd_field_table)

    s = sub.add_parser("enumerate-w6", parents=[common], help="count weight-6 codewords, fill the cache")
    s.add_argument("--method", choices=("brute", "algebraic"), default="brute")
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("build-graph", parents=[common, graph], help="build a distance graph")
    kind = s.add_mutually_exclusive_group()
    kind.add_argument("--n0", action="store_true", default=True, help="anchored neighbourhood graph (default)")
    kind.add_argument("--full", action="store_true", help="whole minimum distance graph (t=3)")
    s.add_argument("--graph-out", default=None, help="also write the graph to this file")
    s.add_argument("--format", choices=GRAPH_FORMATS, default="bin")
    s.set_defaults(func=cmd_build_graph)

    s = sub.add_parser("analyze", parents=[common, graph], help="clique / pair-set / block report (CSV)")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("reconstruct", parents=[common, graph], help="blind labelling + certificate (JSON)")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--seed", type=int, default=0, help="seed of the randomized seeding step")
    mode.add_argument("--canonical", action="store_true", help="deterministic seeding")
    s.add_argument("--shell-budget", type=int, default=0, help="number of shells N(u) to extend into")
    s.add_argument("--vertex-budget", type=int, default=None, help="max new vertices per shell")
    s.add_argument("--oracle-seed", type=int, default=0, help="seed of the neighbourhood oracle's ids")
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("verify", parents=[common], help="re-check a certificate written by reconstruct")
    s.add_argument("cert")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("equivalence", parents=[common], help="certificate between two graph specs")
    s.add_argument("g1", help="graph spec, e.g. 'scramble=1'")
    s.add_argument("g2", help="graph spec, e.g. 'poly=41,perm=7,scramble=2'")
    s.set_defaults(func=cmd_equivalence)

    s = sub.add_parser("export", parents=[common, graph], help="write a graph in an exchange format")
    s.add_argument("--format", choices=GRAPH_FORMATS, required=True)
    s.set_defaults(func=cmd_export)

    s = sub.add_parser("oracle", parents=[common, graph], help=argparse.SUPPRESS)
    s.add_argument("check", choices=("theorem1", "lemma1", "design", "cliques"))
    s.add_argument("--sample", type=int, default=10000)
    s.add_argument("--vertex", type=int, default=1)
    s.set_defaults(func=cmd_oracle)
    # keep the hidden subcommand out of the COMMAND listing
    sub._choices_actions = [a for a in sub._choices_actions if a.dest != "oracle"]
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    if args.cache_dir is None and os.environ.get("PREPGRAPH_CACHE_DIR"):
        args.cache_dir = Path(os.environ["PREPGRAPH_CACHE_DIR"])
    if args.threads is None:
        args.threads = os.cpu_count() or 1
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except UsageError as exc:
        parser.error(str(exc))
    except (StructuralError, BudgetExceeded) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = 1
    except ValueError as exc:  # parameters the library rejects, e.g. t=3 clique analysis
        parser.error(str(exc))
    text = buf.getvalue()
    if args.output and args.func is not cmd_export:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())
