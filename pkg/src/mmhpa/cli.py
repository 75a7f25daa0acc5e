"""Command-line interface: ``mmhpa {params,run,stream,bench,verify}``.

Exit codes: 0 success, 2 parameter error, 3 insufficient input,
4 I/O or file format error, 5 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import __version__
from .bench import ALGORITHMS, DEFAULT_RATIO, DEFAULT_SIZES, MIN_TRIALS, bench_compare
from .errors import InsufficientInputError, KeyFormatError, ParameterError, VerificationError
from .hashing import decode_seeds, encode_seeds, seed_digest
from .keybuf import read_key_file, write_key_file
from .manifest import read_manifest, sha256_file, write_manifest
from .mersenne import BIGINT_ENGINE, MUL_THRESHOLD_BITS
from .pipeline import (
    PaParams,
    derive_security_coefficient,
    pa_run,
    pa_stream,
    rng_seed_source,
    select_block_count,
    select_gamma,
)
from .rng import CounterRng, SystemRng

EXIT_OK = 0
EXIT_PARAMETER = 2
EXIT_INSUFFICIENT = 3
EXIT_IO = 4
EXIT_VERIFY = 5

log = logging.getLogger("mmhpa")


def _size(text: str) -> int:
    """Parse ``260000000``, ``2.6e8`` or ``2.6E8`` as an integer bit count."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value <= 0 or value != math.floor(value):
        raise argparse.ArgumentTypeError(f"not a positive integer: {text!r}")
    return int(value)


@dataclass
class RunConfig:
    command: str
    input: Optional[Path] = None
    output: Optional[Path] = None
    gamma: Optional[int] = None
    k: Optional[int] = None
    t: Optional[int] = None
    epsilon: float = 1e-10
    ratio: Optional[float] = None
    target_n: Optional[int] = None
    m: Optional[int] = None
    seed_file: Optional[Path] = None
    rng_seed: Optional[str] = None
    seeds_out: Optional[Path] = None
    manifest: Optional[Path] = None
    trials: int = MIN_TRIALS
    reuse_seeds: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.rng_seed is not None:
            text = self.rng_seed.lower().removeprefix("0x")
            if len(text) != 64 or any(ch not in "0123456789abcdef" for ch in text):
                raise ParameterError("--rng-seed must be exactly 32 bytes of hex (64 digits)")
            self.rng_seed = text
        if self.seed_file is not None and self.rng_seed is not None:
            raise ParameterError("--seed-file and --rng-seed are mutually exclusive")
        if self.trials < MIN_TRIALS:
            raise ParameterError(f"--trials must be at least {MIN_TRIALS}")
        if self.workers < 1:
            raise ParameterError("--workers must be positive")

    @property
    def seed_source_kind(self) -> str:
        if self.seed_file is not None:
            return "file"
        return "counter-rng" if self.rng_seed is not None else "system-rng"


def resolve_params(cfg: RunConfig, input_bits: Optional[int] = None) -> PaParams:
    """Fill ``k``, ``gamma``, ``t`` from whatever the caller supplied."""
    k = cfg.k if cfg.k is not None else (select_block_count(cfg.ratio) if cfg.ratio is not None else None)
    if k is None:
        raise ParameterError("give --k or --ratio")
    gamma = cfg.gamma
    if gamma is None:
        target = cfg.target_n if cfg.target_n is not None else input_bits
        if target is None:
            raise ParameterError("give --gamma or --target-n")
        gamma = select_gamma(target, k)
    s = derive_security_coefficient(cfg.epsilon)
    n = k * gamma
    t = cfg.t
    if t is None:
        if cfg.ratio is None:
            raise ParameterError("give --t-bits or --ratio")
        t = n - math.floor(cfg.ratio * n) - s
    return PaParams.derive(gamma, k, t, cfg.epsilon, r=cfg.ratio, m=cfg.m)


# -- params ----------------------------------------------------------------

def cmd_params(cfg: RunConfig, out=print) -> int:
    if cfg.ratio is not None and not 0 < cfg.ratio < 1:
        raise ParameterError(f"--ratio must lie in (0, 1), got {cfg.ratio}")
    k = cfg.k if cfg.k is not None else (select_block_count(cfg.ratio) if cfg.ratio else None)
    if k is None:
        raise ParameterError("give --k or --ratio")
    gamma = cfg.gamma if cfg.gamma is not None else select_gamma(cfg.target_n or 0, k)
    s = derive_security_coefficient(cfg.epsilon)
    n = k * gamma
    if cfg.t is not None:
        t = cfg.t
    elif cfg.ratio is not None:
        t = n - math.floor(cfg.ratio * n) - s
    else:
        raise ParameterError("give --t-bits or --ratio")
    m = cfg.m if cfg.m is not None else n - t - s
    s_eff = n - t - m
    checks = [
        ("m > 0", m > 0),
        ("m = n - t - s", s_eff >= s),
        ("m + s <= gamma", m + s_eff <= gamma),
        ("2^(-s/2-1) <= epsilon", 2.0 ** (-s_eff / 2 - 1) <= cfg.epsilon),
    ]
    if cfg.ratio is not None:
        checks.append(("k <= floor(1/r)", k <= select_block_count(cfg.ratio)))
    if cfg.target_n is not None:
        checks.append(("n <= target_n", n <= cfg.target_n))
    for key, value in (("epsilon", cfg.epsilon), ("r", cfg.ratio), ("s", s_eff), ("k", k),
                       ("gamma", gamma), ("n", n), ("t", t), ("m", m)):
        out(f"{key} = {value}")
    for name, ok in checks:
        out(f"check {name}: {'ok' if ok else 'VIOLATED'}")
    failed = [name for name, ok in checks if not ok]
    if failed:
        raise ParameterError(f"violated: {', '.join(failed)}")
    return EXIT_OK


# -- run / stream ----------------------------------------------------------

def _load_seed_pairs(cfg: RunConfig):
    if cfg.seed_file is None:
        return None
    try:
        blob = cfg.seed_file.read_bytes()
    except OSError as exc:
        raise KeyFormatError(f"cannot read seed file: {exc}") from exc
    return decode_seeds(blob)


def _seed_source(cfg: RunConfig, params: PaParams):
    pairs = _load_seed_pairs(cfg)
    if pairs is not None:
        return iter(pairs)
    rng = CounterRng.from_hex(cfg.rng_seed) if cfg.rng_seed else SystemRng()
    return rng_seed_source(rng, params.gamma, params.k)


def _apply_manifest(cfg: RunConfig, path: Path) -> dict:
    entries = read_manifest(path)
    cfg.gamma = int(entries["gamma"])
    cfg.k = int(entries["k"])
    cfg.t = int(entries["t"])
    cfg.m = int(entries["m"])
    cfg.epsilon = float(entries["epsilon"])
    cfg.ratio = float(entries["r"]) if entries.get("r") else None
    cfg.reuse_seeds = entries.get("reuse_seeds") == "True"
    if cfg.input is None:
        cfg.input = Path(entries["input"])
    if entries.get("seed_file"):
        cfg.seed_file = Path(entries["seed_file"])
        cfg.rng_seed = None
        if sha256_file(cfg.seed_file) != entries.get("seed_file_sha256"):
            raise ParameterError("seed file digest does not match the manifest")
    if entries.get("input_sha256") and sha256_file(cfg.input) != entries["input_sha256"]:
        raise ParameterError("input digest does not match the manifest")
    return entries


def cmd_job(cfg: RunConfig, from_manifest: Optional[Path] = None, out=print) -> int:
    """Shared body of ``run`` (one job) and ``stream`` (all jobs)."""
    expected = _apply_manifest(cfg, from_manifest) if from_manifest else None
    if cfg.input is None or cfg.output is None:
        raise ParameterError("--in and --out are required")
    try:
        key = read_key_file(cfg.input)
    except OSError as exc:
        raise KeyFormatError(f"cannot read input: {exc}") from exc
    params = resolve_params(cfg, input_bits=key.length)
    source = _seed_source(cfg, params)

    if cfg.command == "run":
        g, h = next(source)
        start = time.perf_counter()
        res = pa_run(key, params, g, h, workers=cfg.workers)
        seconds = time.perf_counter() - start
        outputs, seeds = res.output, [(g, h)]
        consumed, rejected, jobs = res.consumed_bits, res.rejected_blocks, 1
        remainder = key.length - consumed
    else:
        res = pa_stream(key, params, source, reuse_seeds=cfg.reuse_seeds, workers=cfg.workers)
        outputs, seeds = res.output(), res.seeds
        consumed, rejected, jobs = res.consumed_bits, res.rejected_blocks, res.jobs
        remainder, seconds = res.remainder_bits, res.hash_seconds
        if not jobs:
            raise InsufficientInputError(f"input of {key.length} bits holds no complete job of n={params.n}")

    try:
        write_key_file(cfg.output, outputs)
        seed_path = cfg.seed_file
        if seed_path is None:
            seed_path = cfg.seeds_out or cfg.output.with_name(cfg.output.name + ".seeds")
            unique = seeds[:1] if cfg.reuse_seeds else seeds
            seed_path.write_bytes(encode_seeds(unique))
        manifest_path = cfg.manifest or cfg.output.with_name(cfg.output.name + ".manifest")
        entries = {
            "command": cfg.command,
            "mmhpa_version": __version__,
            "input": cfg.input.resolve(),
            "input_sha256": sha256_file(cfg.input),
            "input_bits": key.length,
            "output": cfg.output.resolve(),
            "output_sha256": sha256_file(cfg.output),
            "output_bits": outputs.length,
            **{k: ("" if v is None else v) for k, v in params.as_dict().items()},
            "seed_source": cfg.seed_source_kind,
            "rng_seed": cfg.rng_seed or "",
            "seed_file": Path(seed_path).resolve(),
            "seed_file_sha256": sha256_file(seed_path),
            "seed_digest": seed_digest(seeds[:1] if cfg.reuse_seeds else seeds),
            "reuse_seeds": cfg.reuse_seeds,
            "jobs": jobs,
            "consumed_bits": consumed,
            "rejected_blocks": rejected,
            "remainder_bits": remainder,
            "hash_seconds": f"{seconds:.6f}",
            "throughput_bps": f"{consumed / seconds:.1f}" if seconds > 0 else "nan",
            "mul_threshold_bits": MUL_THRESHOLD_BITS,
            "bigint_engine": BIGINT_ENGINE,
        }
        write_manifest(manifest_path, entries)
    except OSError as exc:
        raise KeyFormatError(f"cannot write results: {exc}") from exc

    out(f"m = {params.m}")
    out(f"output_bits = {outputs.length}")
    out(f"jobs = {jobs}")
    out(f"rejected_blocks = {rejected}")
    out(f"remainder_bits = {remainder}")
    out(f"throughput_bps = {entries['throughput_bps']}")
    if cfg.reuse_seeds:
        out("note = seeds reused across jobs (benchmarking only)")
    out(f"manifest = {manifest_path}")
    if expected is not None and entries["output_sha256"] != expected.get("output_sha256"):
        raise VerificationError("replayed output differs from the manifest's output digest")
    return EXIT_OK


# -- bench / verify ----------------------------------------------------------

def cmd_bench(cfg: RunConfig, sizes, algorithms, out_dir: Path, figure: bool = True, out=print) -> int:
    report = bench_compare(
        sizes, algorithms, ratio=cfg.ratio or DEFAULT_RATIO, trials=cfg.trials,
        reuse_seeds=cfg.reuse_seeds,
        rng_seed=bytes.fromhex(cfg.rng_seed) if cfg.rng_seed else bytes(32),
    )
    try:
        paths = report.write(out_dir, figure=figure)
    except OSError as exc:
        raise KeyFormatError(f"cannot write report: {exc}") from exc
    for r in report.records:
        if r.status == "ok":
            out(f"{r.algorithm:9s} n={r.n:<11d} median={r.median_seconds:.4f}s "
                f"throughput={r.throughput_bps / 1e6:.2f} Mbps")
        else:
            out(f"{r.algorithm:9s} n={r.n:<11d} {r.status}")
    for kind, path in paths.items():
        out(f"{kind} = {path}")
    return EXIT_OK


def cmd_verify(level: str, report_dir: Optional[Path] = None, out=print) -> int:
    from .verify import run_checks

    results, seconds = run_checks(level, echo=out)
    failed = [r for r in results if not r.passed]
    out(f"{level}: {len(results) - len(failed)}/{len(results)} passed in {seconds:.1f}s")
    if report_dir is not None:
        report_dir.mkdir(parents=True, exist_ok=True)
        (report_dir / f"verify-{level}.txt").write_text("\n".join(r.to_text() for r in results) + "\n")
        from .plotting import plot_oracles
        plot_oracles([r for r in results if r.config], report_dir / f"verify-{level}.png")
    return EXIT_VERIFY if failed else EXIT_OK


# -- argument parsing ------------------------------------------------------

def _add_params_args(p):
    p.add_argument("--gamma", type=int, help="Mersenne exponent (block size in bits)")
    p.add_argument("--k", type=int, help="number of blocks per job")
    p.add_argument("--epsilon", type=float, default=1e-10, help="security parameter (default 1e-10)")
    p.add_argument("--ratio", type=float, help="compression ratio r; sets k = floor(1/r) and t")
    p.add_argument("--target-n", type=_size, help="target input block size; picks gamma")
    p.add_argument("--t-bits", type=int, help="bits of the input known to the eavesdropper")
    p.add_argument("--m-bits", type=int, help="shorter output length than the maximum")


def _add_job_args(p, stream):
    _add_params_args(p)
    p.add_argument("--in", dest="input", type=Path, help="input key file (PAKY)")
    p.add_argument("--out", dest="output", type=Path, help="output key file (PAKY)")
    p.add_argument("--seed-file", type=Path, help="seed file to use instead of sampling")
    p.add_argument("--rng-seed", help="deterministic seed sampling from a 32-byte hex key")
    p.add_argument("--seeds-out", type=Path, help="where sampled seeds are written (default OUT.seeds)")
    p.add_argument("--manifest", type=Path, help="manifest path (default OUT.manifest)")
    p.add_argument("--from-manifest", type=Path, help="replay the run described by a manifest")
    p.add_argument("--workers", type=int, default=1, help="threads for block products / jobs")
    if stream:
        p.add_argument("--reuse-seeds", action="store_true", help="one seed pair for every job")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmhpa", description="MMH-MH privacy amplification")
    parser.add_argument("--version", action="version", version=f"mmhpa {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_params_args(sub.add_parser("params", help="derive and check parameters"))
    _add_job_args(sub.add_parser("run", help="hash one job from a key file"), stream=False)
    _add_job_args(sub.add_parser("stream", help="hash a key file as successive jobs"), stream=True)

    b = sub.add_parser("bench", help="throughput comparison across schemes")
    b.add_argument("--sizes", default=",".join(str(s) for s in DEFAULT_SIZES),
                   help="comma-separated target input sizes in bits")
    b.add_argument("--algorithms", default=",".join(ALGORITHMS), help=f"subset of {','.join(ALGORITHMS)}")
    b.add_argument("--trials", type=int, default=MIN_TRIALS)
    b.add_argument("--ratio", type=float, default=DEFAULT_RATIO)
    b.add_argument("--reuse-seeds", action="store_true")
    b.add_argument("--rng-seed")
    b.add_argument("--out-dir", type=Path, default=Path("bench-out"))
    b.add_argument("--no-figure", action="store_true")

    v = sub.add_parser("verify", help="self-test")
    level = v.add_mutually_exclusive_group()
    level.add_argument("--quick", dest="level", action="store_const", const="quick")
    level.add_argument("--full", dest="level", action="store_const", const="full")
    v.add_argument("--report-dir", type=Path)
    return parser


def _config(args) -> RunConfig:
    get = lambda name: getattr(args, name, None)  # noqa: E731
    return RunConfig(
        command=args.command, input=get("input"), output=get("output"), gamma=get("gamma"),
        k=get("k"), t=get("t_bits"), epsilon=get("epsilon") or 1e-10, ratio=get("ratio"),
        target_n=get("target_n"), m=get("m_bits"), seed_file=get("seed_file"),
        rng_seed=get("rng_seed"), seeds_out=get("seeds_out"), manifest=get("manifest"),
        trials=get("trials") or MIN_TRIALS, reuse_seeds=bool(get("reuse_seeds")),
        workers=get("workers") or 1,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "verify":
            return cmd_verify(args.level or "quick", args.report_dir)
        if args.command == "bench" and args.trials < MIN_TRIALS:
            raise ParameterError(f"--trials must be at least {MIN_TRIALS}, got {args.trials}")
        cfg = _config(args)
        if args.command == "params":
            return cmd_params(cfg)
        if args.command in ("run", "stream"):
            return cmd_job(cfg, from_manifest=args.from_manifest)
        sizes = [_size(s) for s in args.sizes.split(",") if s.strip()]
        algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
        return cmd_bench(cfg, sizes, algorithms, args.out_dir, figure=not args.no_figure)
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    except InsufficientInputError as exc:
        print(f"insufficient input: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except KeyFormatError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except argparse.ArgumentTypeError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER


if __name__ == "__main__":
    sys.exit(main())
