"""Command-line front end.

Presentations are given inline ("< a b | [a,b] >") or as a path to a UTF-8
file with '#' comments.  Exit codes: 0 success with verdict, 3 inconclusive
(a search or enumeration limit was hit), 4 input rejected, 1 internal error.
A config file of ``key = value`` lines (keys mirroring long flags) supplies
defaults; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from . import __version__
from .constructions import (
    NotPerfectError,
    SchemeExhausted,
    TubularBundleData,
    enumerate_tubular_bundles,
    fibre_product_generators,
    fibre_product_presentation_finite_quotient,
    higman_presentation,
    j_construction,
    rips_construction,
    small_cancellation_ratio,
    uce_defect_words,
    uce_presentation,
)
from .finite_quotients import (
    CatalogBoundError,
    CosetLimitExceeded,
    InconclusiveSearch,
    catalog_group,
    catalog_up_to,
    epi_count_report,
    reidemeister_schreier,
    simple_quotients_up_to,
    todd_coxeter,
)
from .homology import abelianization_invariants, h2_rank_2complex, smith_normal_form
from .pipeline import (
    DEFAULT_PIPELINE_NODE_LIMIT,
    VERDICT_INCONCLUSIVE,
    fingerprint,
    pipeline_grothendieck,
    pipeline_theorem_b,
)
from .presentations import (
    FinitePresentation,
    ParseError,
    PresentationError,
    euler_characteristic,
    parse_presentation,
    parse_word,
    tietze_simplify,
)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INCONCLUSIVE = 3
EXIT_REJECTED = 4


def _load_presentation(arg: str) -> FinitePresentation:
    text = arg if arg.lstrip().startswith("<") else Path(arg).read_text(encoding="utf-8")
    return parse_presentation(text)


def _load_config(path: str) -> dict:
    defaults: dict = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PresentationError(f"config line is not 'key = value': {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        try:
            defaults[key] = int(value)
        except ValueError:
            defaults[key] = value
    return defaults


def _emit(args, command: str, report: dict, summary: list[str]):
    for line in summary:
        print(line)
    if args.json:
        payload = {
            "tool": "fpgroups",
            "version": __version__,
            "command": command,
            "config": {
                key: getattr(args, key)
                for key in ("bound", "workers", "seed", "node_limit")
                if hasattr(args, key)
            },
            "report": report,
        }
        Path(args.json).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        print(f"json report written to {args.json}")


def _groups_for(args):
    if getattr(args, "groups", None):
        return [catalog_group(name.strip()) for name in args.groups.split(",") if name.strip()]
    return catalog_up_to(args.bound)


# ---------------------------------------------------------------------------
# subcommand handlers (each returns an exit code)
# ---------------------------------------------------------------------------


def _cmd_present(args) -> int:
    p = _load_presentation(args.presentation)
    simplified = tietze_simplify(p, args.simplify) if args.simplify else p
    summary = [simplified.render()]
    report = {
        "input": p.render(),
        "generators": len(simplified.generators),
        "relators": len(simplified.relators),
        "total_relator_length": simplified.total_relator_length(),
        "presentation": simplified.render(),
    }
    _emit(args, "present", report, summary)
    return EXIT_OK


def _cmd_homology(args) -> int:
    p = _load_presentation(args.presentation)
    h1 = abelianization_invariants(p)
    snf = smith_normal_form(p.exponent_matrix())
    report = {
        "presentation": p.render(),
        "h1": {"torsion": list(h1.torsion), "free_rank": h1.free_rank},
        "h2_rank_2complex": h2_rank_2complex(p),
        "euler_characteristic": euler_characteristic(p),
        "exponent_matrix": p.exponent_matrix().to_lists(),
        "smith_diagonal": snf.diagonal(),
    }
    summary = [
        f"H1 = {h1.describe()}",
        f"h2 rank of presentation 2-complex = {report['h2_rank_2complex']} "
        "(equals group H2 rank only for aspherical presentations)",
        f"euler characteristic = {report['euler_characteristic']}",
    ]
    _emit(args, "homology", report, summary)
    return EXIT_OK


def _cmd_jcons(args) -> int:
    p = _load_presentation(args.presentation)
    vertex = _load_presentation(args.vertex) if args.vertex else higman_presentation()
    alpha = args.alpha or vertex.names[0]
    out = j_construction(p, vertex, alpha)
    report = {
        "input": p.render(),
        "vertex": vertex.render(),
        "alpha": alpha,
        "presentation": out.render(),
        "generators": len(out.generators),
        "relators": len(out.relators),
        "euler_characteristic": euler_characteristic(out),
    }
    _emit(args, "jcons", report, [out.render()])
    return EXIT_OK


def _cmd_uce(args) -> int:
    p = _load_presentation(args.presentation)
    out = uce_presentation(p)
    defects = uce_defect_words(p)
    report = {
        "input": p.render(),
        "presentation": out.render(),
        "relators": len(out.relators),
        "expected_relators": len(p.generators) * (1 + len(p.relators)),
        "defect_words": {
            p.names[i]: w.render(p.names) for i, w in enumerate(defects)
        },
    }
    _emit(args, "uce", report, [out.render()])
    return EXIT_OK


def _cmd_rips(args) -> int:
    q = _load_presentation(args.presentation)
    out = rips_construction(q, args.seed)
    h = out.presentation
    report = {
        "input": q.render(),
        "presentation": h.render(),
        "kernel_generators": [w.render(h.names) for w in out.kernel_generators],
        "relator_count": len(h.relators),
        "expected_relator_count": len(q.relators) + 6 * len(q.generators),
        "small_cancellation_ratio": str(out.ratio),
        "filler_offset": out.offset,
    }
    summary = [
        f"{len(h.generators)} generators, {len(h.relators)} relators "
        f"(= {len(q.relators)} + 6*{len(q.generators)})",
        f"small cancellation ratio {out.ratio} < 1/6",
    ]
    _emit(args, "rips", report, summary)
    return EXIT_OK


def _cmd_product(args) -> int:
    from .presentations import direct_product

    p1 = _load_presentation(args.presentation)
    p2 = _load_presentation(args.other)
    out = direct_product(p1, p2)
    _emit(args, "product", {"presentation": out.render()}, [out.render()])
    return EXIT_OK


def _cmd_fibre(args) -> int:
    q = _load_presentation(args.presentation)
    rips = rips_construction(q, args.seed)
    fib = fibre_product_generators(rips)
    report = {
        "input": q.render(),
        "embedding": rips.presentation.render(),
        "ambient": fib.ambient.render(),
        "fibre_generators": [w.render(fib.ambient.names) for w in fib.generators],
    }
    summary = [f"fibre product generators in {len(fib.ambient.generators)}-generator ambient:"]
    summary += [f"  {w.render(fib.ambient.names)}" for w in fib.generators]
    code = EXIT_OK
    if args.present:
        try:
            pres = fibre_product_presentation_finite_quotient(
                rips.presentation, list(rips.kernel_generators), args.max_cosets
            )
            report["fibre_presentation"] = pres.render()
            summary.append(pres.render())
        except CosetLimitExceeded as exc:
            report["fibre_presentation"] = None
            report["status"] = f"inconclusive: {exc}"
            summary.append(f"inconclusive: {exc}")
            code = EXIT_INCONCLUSIVE
    _emit(args, "fibre", report, summary)
    return code


def _cmd_epi_count(args) -> int:
    p = _load_presentation(args.presentation)
    groups = _groups_for(args)
    rep = epi_count_report(p, groups, workers=args.workers, node_limit=args.node_limit)
    summary = []
    for e in rep.entries:
        status = "" if e.complete else "  [inconclusive: node limit]"
        summary.append(
            f"{e.group} (order {e.order}): hom={e.hom_count} epi={e.epi_count} "
            f"nodes={e.nodes} {e.elapsed:.2f}s{status}"
        )
    _emit(args, "epi-count", rep.to_json(), summary)
    return EXIT_OK if all(e.complete for e in rep.entries) else EXIT_INCONCLUSIVE


def _cmd_quotients(args) -> int:
    p = _load_presentation(args.presentation)
    rep = simple_quotients_up_to(p, args.bound, workers=args.workers, node_limit=args.node_limit)
    summary = [f"H1 = {rep.h1.describe()}"]
    if rep.abelian_witness:
        summary.append(f"abelian witness: {rep.abelian_witness}")
    for e in rep.entries:
        found = {True: "epi found", False: "none", None: "inconclusive"}[e.epi_found]
        summary.append(f"{e.group} (order {e.order}): {found}")
    summary.append(f"verdict: {rep.verdict}")
    _emit(args, "quotients", rep.to_json(), summary)
    return EXIT_INCONCLUSIVE if rep.verdict == "inconclusive" else EXIT_OK


def _cmd_coset(args) -> int:
    p = _load_presentation(args.presentation)
    subgroup = [parse_word(w, p) for w in args.subgroup or []]
    try:
        table = todd_coxeter(p, subgroup, args.max_cosets)
    except CosetLimitExceeded as exc:
        _emit(args, "coset", {"status": f"inconclusive: {exc}"}, [f"inconclusive: {exc}"])
        return EXIT_INCONCLUSIVE
    report = {"presentation": p.render(), "index": table.index}
    summary = [f"index = {table.index}"]
    if args.present:
        sub = reidemeister_schreier(table)
        if args.simplify:
            sub = tietze_simplify(sub, args.simplify)
        report["subgroup_presentation"] = sub.render()
        summary.append(sub.render())
    _emit(args, "coset", report, summary)
    return EXIT_OK


def _bundle_from_args(args) -> list[TubularBundleData]:
    vertex = _load_presentation(args.vertex)
    loop = parse_word(args.loop, vertex)
    d, n, m = args.type
    rose = FinitePresentation([f"a{i+1}" for i in range(n)])
    rho = [parse_word(w, rose) for w in args.rho]
    return list(enumerate_tubular_bundles(vertex, loop, d, n, m, rho, args.height))


def _cmd_bundle(args) -> int:
    if args.bundle_command == "enum":
        bundles = _bundle_from_args(args)
        report = {"count": len(bundles), "bundles": [b.to_json() for b in bundles]}
        _emit(args, "bundle enum", report, [f"{len(bundles)} bundles"])
        return EXIT_OK
    data = json.loads(Path(args.bundle).read_text(encoding="utf-8"))
    bundle = TubularBundleData.from_json(data)
    from .constructions import tubular_bundle_presentation

    pres = tubular_bundle_presentation(bundle)
    if args.bundle_command == "present":
        _emit(args, "bundle present", {"presentation": pres.render()}, [pres.render()])
        return EXIT_OK
    fp = fingerprint(pres, args.bound, workers=args.workers)
    _emit(args, "bundle fingerprint", fp.to_json(), [json.dumps(fp.to_json())])
    return EXIT_OK


def _cmd_pipeline(args) -> int:
    p = _load_presentation(args.presentation)
    if args.pipeline_command == "grothendieck":
        rep = pipeline_grothendieck(
            p, args.bound, seed=args.seed, workers=args.workers, node_limit=args.node_limit
        )
        summary = [
            f"relator count identity holds: {rep.relator_count_identity['holds']}",
            f"verdict: {rep.verdict}"
            + (f" (witness onto {rep.witness_group})" if rep.witness_group else ""),
        ]
        _emit(args, "pipeline grothendieck", rep.to_json(), summary)
        return EXIT_INCONCLUSIVE if rep.verdict == VERDICT_INCONCLUSIVE else EXIT_OK
    rep = pipeline_theorem_b(
        p,
        args.bound,
        args.height,
        workers=args.workers,
        node_limit=args.node_limit,
        fingerprint_bound=args.fingerprint_bound,
    )
    summary = [
        f"chi check holds: {rep.euler_check['holds']}; d = {rep.d}"
        + ("; degenerate (d=0)" if rep.degenerate else ""),
        f"bundles: {len(rep.bundles)}, candidates: {list(rep.candidates)}",
        f"verdict: {rep.verdict}",
    ]
    _emit(args, "pipeline theorem-b", rep.to_json(), summary)
    return EXIT_INCONCLUSIVE if rep.verdict == VERDICT_INCONCLUSIVE else EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bound", type=int, default=2520, help="simple-group order bound")
    common.add_argument("--workers", type=int, default=1, help="search worker processes")
    common.add_argument("--seed", type=int, default=0, help="deterministic scheme seed")
    common.add_argument("--node-limit", type=int, default=None, help="search node budget")
    common.add_argument("--json", metavar="PATH", default=None, help="write JSON report")
    common.add_argument("--config", metavar="PATH", default=None, help="key = value defaults file")

    parser = argparse.ArgumentParser(
        prog="fpgroups",
        description="finitely presented group toolkit",
    )
    parser.add_argument("--version", action="version", version=f"fpgroups {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("present", parents=[common], help="parse and normalize a presentation")
    sp.add_argument("presentation")
    sp.add_argument("--simplify", type=int, default=0, metavar="BUDGET")
    sp.set_defaults(func=_cmd_present)

    sp = sub.add_parser("homology", parents=[common], help="H1, H2 rank, euler characteristic")
    sp.add_argument("presentation")
    sp.set_defaults(func=_cmd_homology)

    sp = sub.add_parser("jcons", parents=[common], help="relator-cell replacement construction")
    sp.add_argument("presentation")
    sp.add_argument("--vertex", default=None, help="vertex presentation (default: Higman)")
    sp.add_argument("--alpha", default=None, help="attaching generator (default: first)")
    sp.set_defaults(func=_cmd_jcons)

    sp = sub.add_parser("uce", parents=[common], help="universal central extension presentation")
    sp.add_argument("presentation")
    sp.set_defaults(func=_cmd_uce)

    sp = sub.add_parser("rips", parents=[common], help="small-cancellation quotient embedding")
    sp.add_argument("presentation")
    sp.set_defaults(func=_cmd_rips)

    sp = sub.add_parser("product", parents=[common], help="direct product presentation")
    sp.add_argument("presentation")
    sp.add_argument("other")
    sp.set_defaults(func=_cmd_product)

    sp = sub.add_parser("fibre", parents=[common], help="fibre product data from an embedding")
    sp.add_argument("presentation")
    sp.add_argument("--present", action="store_true", help="also present the fibre product (finite quotient case)")
    sp.add_argument("--max-cosets", type=int, default=10000)
    sp.set_defaults(func=_cmd_fibre)

    sp = sub.add_parser("epi-count", parents=[common], help="hom/epi counts over catalog groups")
    sp.add_argument("presentation")
    sp.add_argument("--groups", default=None, help="comma-separated names, e.g. A5,PSL2_7")
    sp.set_defaults(func=_cmd_epi_count)

    sp = sub.add_parser("quotients", parents=[common], help="finite simple quotient scan")
    sp.add_argument("presentation")
    sp.set_defaults(func=_cmd_quotients)

    sp = sub.add_parser("coset", parents=[common], help="coset enumeration")
    sp.add_argument("presentation")
    sp.add_argument("--subgroup", action="append", metavar="WORD", help="subgroup generator (repeatable)")
    sp.add_argument("--max-cosets", type=int, default=10000)
    sp.add_argument("--present", action="store_true", help="Reidemeister-Schreier presentation")
    sp.add_argument("--simplify", type=int, default=1000, metavar="BUDGET")
    sp.set_defaults(func=_cmd_coset)

    sp = sub.add_parser("bundle", parents=[], help="tubular bundle operations")
    bsub = sp.add_subparsers(dest="bundle_command", required=True)
    be = bsub.add_parser("enum", parents=[common], help="enumerate bundles up to a shift height")
    be.add_argument("--vertex", required=True, help="vertex presentation")
    be.add_argument("--loop", required=True, help="attaching loop word in vertex generators")
    be.add_argument("--type", nargs=3, type=int, required=True, metavar=("D", "N", "M"))
    be.add_argument("--rho", action="append", required=True, metavar="WORD", help="edge word (repeat M times)")
    be.add_argument("--height", type=int, default=2)
    be.set_defaults(func=_cmd_bundle)
    bp = bsub.add_parser("present", parents=[common], help="presentation of a bundle JSON file")
    bp.add_argument("--bundle", required=True, metavar="FILE")
    bp.set_defaults(func=_cmd_bundle)
    bf = bsub.add_parser("fingerprint", parents=[common], help="fingerprint of a bundle JSON file")
    bf.add_argument("--bundle", required=True, metavar="FILE")
    bf.set_defaults(func=_cmd_bundle)

    sp = sub.add_parser("pipeline", parents=[], help="full reductions")
    psub = sp.add_subparsers(dest="pipeline_command", required=True)
    pg = psub.add_parser("grothendieck", parents=[common], help="profinite-pair reduction")
    pg.add_argument("presentation")
    pg.set_defaults(func=_cmd_pipeline, node_limit=DEFAULT_PIPELINE_NODE_LIMIT)
    pt = psub.add_parser("theorem-b", parents=[common], help="central-extension/bundle reduction")
    pt.add_argument("presentation")
    pt.add_argument("--height", type=int, default=2)
    pt.add_argument("--fingerprint-bound", type=int, default=60)
    pt.set_defaults(func=_cmd_pipeline, node_limit=DEFAULT_PIPELINE_NODE_LIMIT)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    # apply config-file defaults before the real parse; explicit flags win
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config", default=None)
    known, _ = probe.parse_known_args(argv)
    try:
        if known.config:
            parser.set_defaults(**_load_config(known.config))
        args = parser.parse_args(argv)
        return args.func(args)
    except (ParseError, NotPerfectError) as exc:
        print(f"input rejected: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except (PresentationError, CatalogBoundError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"input rejected: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except (CosetLimitExceeded, InconclusiveSearch, SchemeExhausted) as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except BrokenPipeError:
        return EXIT_INTERNAL
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
