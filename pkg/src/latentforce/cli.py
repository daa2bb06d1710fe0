"""Command-line interface.

Subcommands::

    layout     infer a maximum-likelihood (or MAP) layout for a network
    generate   sample synthetic networks with known ground truth
    validate   recovery sweeps and Mantel comparisons
    loglik     re-score a network at a stored layout
    render     draw a stored layout as SVG

Exit codes: 0 on success, 1 on file-format or validation errors, 2 when
every restart of a simulation diverged.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from latentforce.forces import finite_difference_gradient, forces
from latentforce.graphs import (
    GraphFormatError,
    WeightedGraph,
    parse_cumulative,
    parse_edge_list,
    serialize_cumulative,
    serialize_edge_list,
)
from latentforce.integrator import (
    IntegratorConfig,
    LayoutResult,
    SimulationDiverged,
    init_state,
    run_restarts,
)
from latentforce.layoutfile import (
    atomic_write_text,
    document_from_result,
    read_layout,
    state_from_document,
    write_layout,
)
from latentforce.model import ModelConfig, PriorConfig, log_prior, loglik, objective
from latentforce.svg import render_svg
from latentforce.synth import (
    GaussianClusterSpec,
    SbmSpec,
    generate_dataset,
    ground_truth_loglik,
)
from latentforce.validation import distance_matrix, mantel_test, sbm_sweep

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=("unweighted", "cumulative", "weighted"),
                   default="unweighted", help="observation family (default unweighted)")
    p.add_argument("--undirected", action="store_true",
                   help="treat ties as unordered; one alpha per node, no beta")
    p.add_argument("--bipartite", action="store_true",
                   help="weighted only: sum rater->item ordered pairs only")
    p.add_argument("--levels", type=int, default=3,
                   help="number of ordinal levels K for the weighted family (default 3)")


def _add_integrator_flags(p: argparse.ArgumentParser, restarts_default: int = 5) -> None:
    p.add_argument("--dim", type=int, default=2, help="latent dimensions (default 2)")
    p.add_argument("--seed", type=int, default=0, help="base random seed (default 0)")
    p.add_argument("--restarts", type=int, default=restarts_default,
                   help=f"independent restarts, consecutive seeds (default {restarts_default})")
    p.add_argument("--dt", type=float, default=0.05, help="integration step (default 0.05)")
    p.add_argument("--damping", type=float, default=0.9,
                   help="velocity damping per step (default 0.9)")
    p.add_argument("--max-iters", type=int, default=5000,
                   help="iteration cap per restart (default 5000)")
    p.add_argument("--tol", type=float, default=1e-4,
                   help="convergence threshold on max coordinate change (default 1e-4)")
    p.add_argument("--param-mass", type=float, default=1.0,
                   help="mass of alpha/beta/cut coordinates (default 1.0)")
    p.add_argument("--deterministic", action="store_true",
                   help="fix the reduction order for bit-stable output (always on; "
                        "accepted for compatibility)")


def _add_prior_flags(p: argparse.ArgumentParser, default: str = "on") -> None:
    p.add_argument("--prior", choices=("on", "off"), default=default,
                   help=f"Gaussian prior on parameters and positions (default {default})")
    p.add_argument("--prior-sigma-alpha", type=float, default=10.0)
    p.add_argument("--prior-sigma-beta", type=float, default=10.0)
    p.add_argument("--prior-sigma-pos", type=float, default=10.0)


def _model_from_args(args) -> ModelConfig:
    prior = PriorConfig(
        enabled=(args.prior == "on"),
        sigma_alpha=args.prior_sigma_alpha,
        sigma_beta=args.prior_sigma_beta,
        sigma_pos=args.prior_sigma_pos,
    )
    return ModelConfig(
        family=args.model,
        levels=args.levels,
        undirected=args.undirected,
        bipartite=args.bipartite,
        prior=prior,
    ).validate()


def _config_from_args(args, fit_defaults=True) -> IntegratorConfig:
    return IntegratorConfig(
        dt=args.dt,
        damping=args.damping,
        max_iters=args.max_iters,
        tol=args.tol,
        param_mass=args.param_mass,
        restarts=args.restarts,
        dim=args.dim,
        deterministic=args.deterministic,
    ).validate()


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _parse_network(path: str, model: ModelConfig):
    text = _read_text(path)
    if model.family == "cumulative":
        return parse_cumulative(text)
    graph = parse_edge_list(text, directed=not model.undirected)
    if model.family == "weighted":
        return WeightedGraph.from_graph(graph, model.levels)
    return graph


def _check_gradients(graph, model, config, seed, max_coords: int = 48) -> float:
    """Spot-check analytic forces against finite differences at the start state."""
    state = init_state(graph, model, config, seed)
    analytic = forces(graph, state, model).to_vector()
    total = analytic.size
    if total <= max_coords:
        picked = np.arange(total)
    else:
        picked = np.unique(np.linspace(0, total - 1, max_coords).astype(np.int64))
    base = state.to_vector()
    worst = 0.0
    for k in picked:
        hi = base.copy()
        lo = base.copy()
        hi[k] += 1e-5
        lo[k] -= 1e-5
        fd = (
            objective(graph, state.with_vector(hi), model)
            - objective(graph, state.with_vector(lo), model)
        ) / 2e-5
        err = abs(analytic[k] - fd)
        scale = max(abs(analytic[k]), abs(fd), 1e-3)
        worst = max(worst, err / scale)
    return worst


def _cmd_layout(args) -> int:
    model = _model_from_args(args)
    config = _config_from_args(args)
    graph = _parse_network(args.input, model)
    if args.check_gradients:
        worst = _check_gradients(graph, model, config, args.seed)
        print(f"gradient spot-check: max relative error {worst:.3e}")
        if worst > 1e-4:
            print("gradient check failed (analytic forces disagree with finite differences)",
                  file=sys.stderr)
            return 1
    best, records = run_restarts(graph, model, config, args.seed, return_all=True)
    print(f"{'restart':>7}  {'seed':>6}  {'loglik':>18}  {'log_posterior':>18}  "
          f"{'iters':>6}  {'conv':>4}")
    for k, (seed, res, err) in enumerate(records, start=1):
        if res is None:
            print(f"{k:>7}  {seed:>6}  diverged: {err}")
            continue
        star = "  *" if res is best else ""
        print(f"{k:>7}  {seed:>6}  {res.loglik:>18.6f}  {res.log_posterior:>18.6f}  "
              f"{res.iterations:>6}  {'yes' if res.converged else 'no':>4}{star}")
    print(f"best restart: seed {best.seed}, loglik {best.loglik!r}")
    doc = document_from_result(best, graph, model)
    write_layout(args.out, doc)
    print(f"wrote {args.out}")
    if args.svg:
        atomic_write_text(args.svg, render_svg(doc))
        print(f"wrote {args.svg}")
    return 0


def _truth_result(state, network, model, seed) -> LayoutResult:
    ll = ground_truth_loglik(network, state, model)
    return LayoutResult(
        state=state, loglik=ll, log_posterior=ll, iterations=0, converged=True, seed=seed
    )


def _write_dataset(prefix, network, gen_state, labels, model, seed) -> None:
    if model.family == "cumulative":
        network_text = serialize_cumulative(network)
    else:
        network_text = serialize_edge_list(network)
    atomic_write_text(f"{prefix}.network.tsv", network_text)
    doc = document_from_result(_truth_result(gen_state, network, model, seed), network, model)
    write_layout(f"{prefix}.truth.json", doc)
    rows = ["id,label"] + [
        f"{node_id},{int(lab)}" for node_id, lab in zip(network.node_ids, labels)
    ]
    atomic_write_text(f"{prefix}.labels.csv", "\n".join(rows) + "\n")
    print(f"wrote {prefix}.network.tsv ({network_text.count(chr(10))} records)")
    print(f"wrote {prefix}.truth.json")
    print(f"wrote {prefix}.labels.csv")


def _cmd_generate_sbm(args) -> int:
    spec = SbmSpec(p_out=args.pout, n1=args.n1, n2=args.n2, p_in=args.pin, dim=args.dim)
    spec.validate()
    model = ModelConfig(family="unweighted", prior=PriorConfig(enabled=False))
    network, gen_state, labels = generate_dataset(spec, model, seed=args.seed)
    _write_dataset(args.out, network, gen_state, labels, model, args.seed)
    return 0


def _cmd_generate_gaussian(args) -> int:
    spec = GaussianClusterSpec(
        n_nodes=args.n,
        n_clusters=args.clusters,
        sigma=args.sigma,
        separation=args.sep,
        dim=args.dim,
        seed=args.seed,
    )
    spec.validate()
    model = ModelConfig(
        family=args.model, levels=args.levels, prior=PriorConfig(enabled=False)
    ).validate()
    network, gen_state, labels = generate_dataset(
        spec, model, seed=args.seed, actions_per_author=args.actions
    )
    _write_dataset(args.out, network, gen_state, labels, model, args.seed)
    return 0


def _cmd_validate_sbm_sweep(args) -> int:
    pouts = [float(tok) for tok in args.pouts.split(",") if tok.strip()]
    config = IntegratorConfig(
        dt=args.dt,
        damping=args.damping,
        max_iters=args.max_iters,
        tol=args.tol,
        restarts=args.restarts,
        dim=args.dim,
    ).validate()
    prior = PriorConfig(enabled=(args.prior == "on"))
    records = sbm_sweep(
        pouts=pouts,
        runs=args.runs,
        n1=args.n1,
        n2=args.n2,
        p_in=args.pin,
        seed=args.seed,
        config=config,
        prior=prior,
        permutations=args.permutations,
    )
    header = (
        f"{'p_out':>6} {'run':>4} {'d_expect':>9} {'d_found':>9} {'rel_err':>8} "
        f"{'ll_gap':>12} {'mantel_r':>9} {'conv':>5}"
    )
    print(header)
    for rec in records:
        print(
            f"{rec['p_out']:>6.2f} {rec['run']:>4d} {rec['expected_distance']:>9.4f} "
            f"{rec['inferred_distance']:>9.4f} {rec['distance_rel_error']:>8.4f} "
            f"{rec['loglik_gap']:>12.2f} {rec['mantel_r']:>9.4f} "
            f"{'yes' if rec['converged'] else 'no':>5}"
        )
    print()
    for p_out in pouts:
        errs = [r["distance_rel_error"] for r in records if r["p_out"] == p_out]
        gaps = [r["loglik_gap"] for r in records if r["p_out"] == p_out]
        print(
            f"p_out={p_out:.2f}: mean rel distance error {np.mean(errs):.4f}, "
            f"min loglik gap {min(gaps):.2f}"
        )
    if args.out:
        atomic_write_text(args.out, json.dumps(records, indent=2) + "\n")
        print(f"wrote {args.out}")
    return 0


def _cmd_validate_mantel(args) -> int:
    truth = read_layout(args.truth)
    layout = read_layout(args.layout)
    if set(truth.node_ids) != set(layout.node_ids):
        print("error: truth and layout id sets differ", file=sys.stderr)
        return 1
    order = {s: k for k, s in enumerate(layout.node_ids)}
    perm = np.asarray([order[s] for s in truth.node_ids], dtype=np.int64)
    result = mantel_test(
        distance_matrix(truth.positions),
        distance_matrix(layout.positions[perm]),
        permutations=args.permutations,
        seed=args.seed,
    )
    print(f"mantel_r {result.r!r}")
    print(f"mantel_z {result.z!r}")
    print(f"permutations {result.permutations}")
    print(f"seed {result.seed}")
    return 0


def _cmd_loglik(args) -> int:
    doc = read_layout(args.layout)
    graph = _parse_network(args.input, doc.model)
    state = state_from_document(doc, graph)
    ll = loglik(graph, state, doc.model)
    lp = ll + log_prior(state, doc.model.prior)
    print(f"loglik {ll!r}")
    print(f"log_posterior {lp!r}")
    return 0


def _read_metadata(path: str) -> dict[str, str]:
    labels: dict[str, str] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or (not row[0].strip() and len(row) == 1):
                continue
            if len(row) != 2:
                raise GraphFormatError(f"metadata rows need 2 columns, got {len(row)}")
            key, value = row[0].strip(), row[1].strip()
            if (key.lower(), value.lower()) == ("id", "label"):
                continue
            labels[key] = value
    return labels


def _cmd_render(args) -> int:
    doc = read_layout(args.layout)
    graph = _parse_network(args.input, doc.model) if args.input else None
    labels = _read_metadata(args.metadata) if args.metadata else None
    text = render_svg(
        doc,
        graph,
        width=args.width,
        height=args.height,
        margin_frac=args.margin,
        node_radius=args.radius,
        draw_edges=args.edges,
        labels=labels,
    )
    atomic_write_text(args.out, text)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="latentforce",
                     description="Likelihood-maximizing force-directed network layouts")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_layout = sub.add_parser("layout", help="infer a layout for a network file")
    p_layout.add_argument("--input", required=True, help="network file (TSV)")
    _add_model_flags(p_layout)
    _add_integrator_flags(p_layout)
    _add_prior_flags(p_layout, default="on")
    p_layout.add_argument("--check-gradients", action="store_true",
                          help="verify forces against finite differences before running")
    p_layout.add_argument("--out", required=True, help="layout file to write (JSON)")
    p_layout.add_argument("--svg", default=None, help="also render the layout to this SVG path")
    p_layout.set_defaults(func=_cmd_layout)

    p_gen = sub.add_parser("generate", help="sample synthetic networks with ground truth")
    gen_sub = p_gen.add_subparsers(dest="generator", required=True, parser_class=_Parser)

    p_sbm = gen_sub.add_parser("sbm", help="two-block stochastic block model")
    p_sbm.add_argument("--n1", type=int, default=100)
    p_sbm.add_argument("--n2", type=int, default=100)
    p_sbm.add_argument("--pin", type=float, default=0.5)
    p_sbm.add_argument("--pout", type=float, required=True)
    p_sbm.add_argument("--dim", type=int, default=2)
    p_sbm.add_argument("--seed", type=int, default=0)
    p_sbm.add_argument("--out", required=True, help="output path prefix")
    p_sbm.set_defaults(func=_cmd_generate_sbm)

    p_gauss = gen_sub.add_parser("gaussian", help="Gaussian cluster mixture")
    p_gauss.add_argument("--n", type=int, required=True, help="total nodes")
    p_gauss.add_argument("--clusters", type=int, default=2)
    p_gauss.add_argument("--sigma", type=float, default=1.0 / 12.0)
    p_gauss.add_argument("--sep", type=float, default=5.0 / 6.0)
    p_gauss.add_argument("--dim", type=int, default=2)
    p_gauss.add_argument("--model", choices=("unweighted", "cumulative", "weighted"),
                         default="unweighted")
    p_gauss.add_argument("--levels", type=int, default=3)
    p_gauss.add_argument("--actions", type=int, default=3,
                         help="actions per author for the cumulative family")
    p_gauss.add_argument("--seed", type=int, default=0)
    p_gauss.add_argument("--out", required=True, help="output path prefix")
    p_gauss.set_defaults(func=_cmd_generate_gaussian)

    p_val = sub.add_parser("validate", help="statistical recovery checks")
    val_sub = p_val.add_subparsers(dest="check", required=True, parser_class=_Parser)

    p_sweep = val_sub.add_parser("sbm-sweep", help="block-distance recovery sweep")
    p_sweep.add_argument("--pouts", default="0.1,0.2,0.3,0.4",
                         help="comma-separated cross-block tie rates")
    p_sweep.add_argument("--runs", type=int, default=5)
    p_sweep.add_argument("--n1", type=int, default=100)
    p_sweep.add_argument("--n2", type=int, default=100)
    p_sweep.add_argument("--pin", type=float, default=0.5)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--restarts", type=int, default=1)
    p_sweep.add_argument("--dim", type=int, default=2)
    p_sweep.add_argument("--dt", type=float, default=0.05)
    p_sweep.add_argument("--damping", type=float, default=0.9)
    p_sweep.add_argument("--max-iters", type=int, default=5000)
    p_sweep.add_argument("--tol", type=float, default=1e-4)
    p_sweep.add_argument("--prior", choices=("on", "off"), default="off")
    p_sweep.add_argument("--permutations", type=int, default=199)
    p_sweep.add_argument("--out", default=None, help="optional JSON records path")
    p_sweep.set_defaults(func=_cmd_validate_sbm_sweep)

    p_mantel = val_sub.add_parser("mantel", help="compare two stored layouts")
    p_mantel.add_argument("--truth", required=True)
    p_mantel.add_argument("--layout", required=True)
    p_mantel.add_argument("--permutations", type=int, default=999)
    p_mantel.add_argument("--seed", type=int, default=0)
    p_mantel.set_defaults(func=_cmd_validate_mantel)

    p_ll = sub.add_parser("loglik", help="re-score a network at a stored layout")
    p_ll.add_argument("--input", required=True, help="network file (TSV)")
    p_ll.add_argument("--layout", required=True, help="layout file (JSON)")
    p_ll.set_defaults(func=_cmd_loglik)

    p_render = sub.add_parser("render", help="draw a stored layout as SVG")
    p_render.add_argument("--layout", required=True)
    p_render.add_argument("--input", default=None, help="network file (needed for --edges)")
    p_render.add_argument("--metadata", default=None, help="CSV id,label for node colors")
    p_render.add_argument("--edges", action="store_true", help="draw edges")
    p_render.add_argument("--width", type=int, default=1000)
    p_render.add_argument("--height", type=int, default=1000)
    p_render.add_argument("--margin", type=float, default=0.05)
    p_render.add_argument("--radius", type=float, default=6.0)
    p_render.add_argument("--out", required=True)
    p_render.set_defaults(func=_cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SimulationDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (GraphFormatError, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
