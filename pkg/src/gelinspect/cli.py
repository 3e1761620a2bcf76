"""Command line front end.

Subcommands:

* ``inquire``: run the residue pipeline over images or directories and
  write per-image artifacts plus a batch summary.
* ``compare``: locate a template crop inside a search image and print
  the best-alignment PSNR as JSON.
* ``bench-generate``: write the seeded synthetic scenes and their
  definition files to a corpus directory.
* ``bench-sweep``: run the compression and threshold sweeps over the
  synthetic scenes and write the measurement table as JSON.

Exit codes: 0 on success, 1 when one or more inputs failed during a
batch, 2 for usage and parameter errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from gelinspect import __version__, bench
from gelinspect.bandcompare import template_match_psnr
from gelinspect.imageio import (
    SUPPORTED_EXTENSIONS,
    load_image,
    save_gray16,
    save_indicator,
    save_rgb8,
    write_json,
)
from gelinspect.pipeline import (
    DEFAULT_GAMMA,
    InquiryParams,
    normalize_residue,
    run_inquiry,
)
from gelinspect.solver import DEFAULT_LAMBDA

BATCH_SCHEMA_VERSION = 1

EMIT_CHOICES = ("background", "residue", "indicator", "overlay", "report")


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA,
                        help="smoothing weight (default %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gelinspect",
        description="Residue-based inspection of band images.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    inquire = sub.add_parser(
        "inquire", help="run the pipeline over images or directories")
    inquire.add_argument("inputs", nargs="+",
                         help="image files or directories (scanned flat)")
    _add_param_flags(inquire)
    inquire.add_argument("--gamma", type=float, default=DEFAULT_GAMMA,
                         help="indicator threshold (default %(default)s)")
    inquire.add_argument("--alpha", type=float, default=0.5,
                         help="overlay blend weight (default %(default)s)")
    inquire.add_argument("--kernel-size", type=int, default=3,
                         help="smoothing kernel side length (default %(default)s)")
    inquire.add_argument("--kernel-sigma", type=float, default=1.0,
                         help="smoothing kernel sigma (default %(default)s)")
    inquire.add_argument("--emit", action="append", choices=EMIT_CHOICES,
                         help="artifact kinds to write (repeatable; default all)")
    inquire.add_argument("--out-dir", type=Path, default=Path("inquiry_out"),
                         help="output directory (default %(default)s)")
    inquire.add_argument("--jobs", type=int, default=1,
                         help="parallel workers (default %(default)s)")
    inquire.set_defaults(func=_run_inquire)

    compare = sub.add_parser(
        "compare", help="PSNR of the best template alignment inside a search image")
    compare.add_argument("template", type=Path, help="template image (the crop)")
    compare.add_argument("search", type=Path, help="search image (same size or larger)")
    _add_param_flags(compare)
    compare.add_argument("--on-residue", action="store_true",
                         help="match normalized residues instead of raw pixels")
    compare.set_defaults(func=_run_compare)

    generate = sub.add_parser(
        "bench-generate", help="write the seeded synthetic scenes and definition files")
    generate.add_argument("--out-dir", type=Path, default=Path("bench_corpus"),
                          help="corpus directory (default %(default)s)")
    generate.add_argument("--seed", type=int, default=bench.DEFAULT_SEED,
                          help="noise seed (default %(default)s)")
    generate.set_defaults(func=_run_bench_generate)

    sweep = sub.add_parser(
        "bench-sweep", help="write the sweep measurement table as JSON")
    sweep.add_argument("--out", type=Path, default=Path("bench_sweep.json"),
                       help="output file (default %(default)s)")
    sweep.add_argument("--seed", type=int, default=bench.DEFAULT_SEED,
                       help="noise seed (default %(default)s)")
    _add_param_flags(sweep)
    sweep.add_argument("--gamma", type=float, default=bench.BENCH_GAMMA,
                       help="threshold for the quality sweeps (default %(default)s)")
    sweep.set_defaults(func=_run_bench_sweep)

    return parser


def collect_inputs(raw_inputs) -> list:
    """Expand files and flat directories into a sorted, deduplicated list."""
    found = {}
    for raw in raw_inputs:
        path = Path(raw)
        if path.is_dir():
            for child in sorted(path.iterdir()):
                if child.is_file() and child.suffix.lower() in SUPPORTED_EXTENSIONS:
                    found[str(child.resolve())] = child
        elif path.is_file():
            if path.suffix.lower() not in SUPPORTED_EXTENSIONS:
                raise ValueError(f"unsupported image extension: {path}")
            found[str(path.resolve())] = path
        else:
            raise ValueError(f"input not found: {path}")
    return sorted(found.values(), key=str)


def _process_one(path: Path, stem: str, out_dir: Path, params: InquiryParams,
                 emit) -> dict:
    image = load_image(path)
    result = run_inquiry(image, params)
    artifact_names = []
    if "background" in emit:
        name = f"{stem}.background.png"
        save_gray16(out_dir / name, result.background)
        artifact_names.append(name)
    if "residue" in emit:
        name = f"{stem}.residue.png"
        save_gray16(out_dir / name, normalize_residue(result.residue))
        artifact_names.append(name)
    if "indicator" in emit:
        name = f"{stem}.indicator.png"
        save_indicator(out_dir / name, result.indicator)
        artifact_names.append(name)
    if "overlay" in emit:
        name = f"{stem}.overlay.png"
        save_rgb8(out_dir / name, result.overlay)
        artifact_names.append(name)
    report_name = None
    if "report" in emit:
        report_name = f"{stem}.report.json"
        report = dataclasses.replace(result.report,
                                     artifact_paths=tuple(artifact_names))
        write_json(out_dir / report_name, report.to_ordered_dict())
    return {"input": str(path), "stem": stem, "report": report_name, "error": None}


def _run_inquire(args) -> int:
    params = InquiryParams(lam=args.lam, gamma=args.gamma, blend_alpha=args.alpha,
                           kernel_size=args.kernel_size,
                           kernel_sigma=args.kernel_sigma)
    if args.jobs < 1:
        raise ValueError("--jobs must be >= 1")
    emit = tuple(args.emit) if args.emit else EMIT_CHOICES
    inputs = collect_inputs(args.inputs)
    out_dir = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    # Assign output stems up front; a second file with the same stem
    # becomes an error row instead of silently clobbering the first.
    jobs, rows = [], []
    seen_stems = set()
    for path in inputs:
        if path.stem in seen_stems:
            rows.append({"input": str(path), "stem": path.stem, "report": None,
                         "error": "duplicate output stem"})
            continue
        seen_stems.add(path.stem)
        jobs.append((path, path.stem))

    def worker(item):
        path, stem = item
        try:
            return _process_one(path, stem, out_dir, params, emit)
        except (ValueError, OSError) as exc:
            return {"input": str(path), "stem": stem, "report": None,
                    "error": str(exc)}

    if jobs:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows.extend(pool.map(worker, jobs))

    rows.sort(key=lambda row: row["input"])
    summary = {
        "schema_version": BATCH_SCHEMA_VERSION,
        "params": params.to_ordered_dict(),
        "results": rows,
    }
    write_json(out_dir / "batch_summary.json", summary)

    failures = 0
    for row in rows:
        if row["error"] is None:
            print(f"ok {row['input']} -> {row['stem']}.*")
        else:
            failures += 1
            print(f"error {row['input']}: {row['error']}", file=sys.stderr)
    print(f"processed {len(rows) - failures}/{len(rows)} inputs -> {out_dir}")
    return 1 if failures else 0


def _run_compare(args) -> int:
    template = load_image(args.template)
    search = load_image(args.search)
    if args.on_residue:
        params = InquiryParams(lam=args.lam)
        template = normalize_residue(run_inquiry(template, params).residue)
        search = normalize_residue(run_inquiry(search, params).residue)
    match = template_match_psnr(template, search)
    print(json.dumps(match.to_ordered_dict(), indent=2))
    return 0


def _run_bench_generate(args) -> int:
    out_dir = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    scenes = {
        "unmodified": bench.generate_unmodified(seed=args.seed),
        "copy_paste": bench.build_copy_paste_image(seed=args.seed),
        "erasure": bench.build_erasure_image(seed=args.seed),
    }
    for name, image in scenes.items():
        save_gray16(out_dir / f"{name}.png", image)
    write_json(out_dir / "scene.json", bench.default_scene().to_json_dict())
    write_json(out_dir / "forgeries.json", {
        "seed": args.seed,
        "copy_paste": bench.copy_paste_op().to_json_dict(),
        "erase": bench.erase_op().to_json_dict(),
    })
    for name in sorted(scenes):
        print(f"wrote {out_dir / name}.png")
    print(f"wrote {out_dir / 'scene.json'}")
    print(f"wrote {out_dir / 'forgeries.json'}")
    return 0


def _run_bench_sweep(args) -> int:
    report = bench.benchmark_report(seed=args.seed, lam=args.lam, gamma=args.gamma)
    write_json(args.out, report)
    empties = sum(1 for row in report["rows"] if row["empty_zone"])
    print(f"wrote {args.out}: {len(report['rows'])} rows, {empties} empty zones")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
