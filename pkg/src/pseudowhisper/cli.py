"""Batch command line: ``convert``, ``analyze`` and ``metrics``.

Exit codes: 0 success, 1 at least one batch entry failed, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import audio_io, metrics, pipeline, transform, vocoder
from .errors import ConfigError, ManifestParseError, PseudoWhisperError
from .rng import utterance_seed

log = logging.getLogger("pseudowhisper")

CONFIG_ENV = "PSEUDOWHISPER_CONFIG"
EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2
_SECTIONS = ("glottal", "maf", "vocoder")
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass(frozen=True)
class ManifestEntry:
    input_path: str
    output_path: str
    mode: str | None = None
    speed: float | None = None

    def __post_init__(self):
        if not self.input_path or not self.output_path:
            raise ValueError("input and output paths must be non-empty")
        if self.mode is not None and self.mode not in pipeline.MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.speed is not None and not (
                transform.MIN_FACTOR <= self.speed <= transform.MAX_FACTOR):
            raise ValueError(f"speed factor {self.speed} outside "
                             f"[{transform.MIN_FACTOR}, {transform.MAX_FACTOR}]")


def parse_manifest(text: str) -> list[ManifestEntry]:
    """TSV lines ``input<TAB>output[<TAB>mode[<TAB>factor]]``; ``#`` starts a comment."""
    entries = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = [f.strip() for f in line.split("\t")]
        if not 2 <= len(fields) <= 4:
            raise ManifestParseError(number, f"expected 2 to 4 tab-separated fields, got {len(fields)}")
        mode = fields[2] or None if len(fields) > 2 else None
        speed = None
        if len(fields) > 3 and fields[3]:
            try:
                speed = float(fields[3])
            except ValueError:
                raise ManifestParseError(number, f"bad speed factor {fields[3]!r}") from None
        try:
            entries.append(ManifestEntry(fields[0], fields[1], mode, speed))
        except ValueError as exc:
            raise ManifestParseError(number, str(exc)) from None
    return entries


def _coerce(raw: str, current, key: str):
    if isinstance(current, bool):
        low = raw.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    try:
        if isinstance(current, int):
            return int(raw, 0)
        if isinstance(current, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None
    return raw


def parse_config(text: str, base: pipeline.PipelineConfig = pipeline.PipelineConfig()
                 ) -> pipeline.PipelineConfig:
    """Apply ``key = value`` lines (dotted keys for sub-configs) on top of ``base``."""
    top, nested = {}, {s: {} for s in _SECTIONS}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {number}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        section, _, name = key.rpartition(".")
        target = getattr(base, section) if section in _SECTIONS else base if not section else None
        if target is None or name not in {f.name for f in dataclasses.fields(target)}:
            raise ConfigError(f"config line {number}: unknown key {key!r}")
        value = _coerce(raw, getattr(target, name), key)
        (nested[section] if section else top)[name] = value
    try:
        subs = {s: dataclasses.replace(getattr(base, s), **nested[s]) for s in _SECTIONS if nested[s]}
        return dataclasses.replace(base, **subs, **top)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | None, mode: str | None = None,
                seed: int | None = None) -> pipeline.PipelineConfig:
    """Config file (or $PSEUDOWHISPER_CONFIG) with command-line overrides on top."""
    path = path or os.environ.get(CONFIG_ENV)
    cfg = pipeline.PipelineConfig()
    if path:
        try:
            cfg = parse_config(Path(path).read_text(encoding="utf-8"), cfg)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    overrides = {k: v for k, v in (("mode", mode), ("seed", seed)) if v is not None}
    try:
        return dataclasses.replace(cfg, **overrides)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def convert_entry(entry: ManifestEntry, cfg: pipeline.PipelineConfig,
                  default_speed: float | None = None) -> dict:
    """Convert one file; never raises, failures land in the row's ``error`` field."""
    mode = entry.mode or cfg.mode
    speed = entry.speed if entry.speed is not None else default_speed
    seed = utterance_seed(cfg.seed, entry.input_path)
    row = {"input": entry.input_path, "output": entry.output_path, "mode": mode,
           "seed": seed, "speed": speed, "peak_rescale": None,
           "wall_time_s": None, "error": None}
    start = time.perf_counter()
    try:
        clip = audio_io.read_wav(entry.input_path)
        out = pipeline.convert(clip, cfg, mode=mode, seed=seed)
        if speed is not None and speed != 1.0:
            out = transform.speed_perturb(out, speed)
        Path(entry.output_path).parent.mkdir(parents=True, exist_ok=True)
        row["peak_rescale"] = audio_io.write_wav(out, entry.output_path)
    except (PseudoWhisperError, OSError, ValueError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    row["wall_time_s"] = round(time.perf_counter() - start, 6)
    return row


def run_batch(entries, cfg: pipeline.PipelineConfig, jobs: int = 1,
              default_speed: float | None = None) -> list[dict]:
    """Rows come back in manifest order whatever the worker count."""
    n = len(entries)
    if jobs <= 1 or n <= 1:
        return [convert_entry(e, cfg, default_speed) for e in entries]
    with ProcessPoolExecutor(max_workers=min(jobs, n)) as pool:
        return list(pool.map(convert_entry, entries, [cfg] * n, [default_speed] * n))


def _emit(rows, report: str | None):
    lines = "".join(json.dumps(r) + "\n" for r in rows)
    if report:
        Path(report).parent.mkdir(parents=True, exist_ok=True)
        Path(report).write_text(lines, encoding="utf-8")
    else:
        sys.stdout.write(lines)


def run_convert(args) -> int:
    cfg = load_config(args.config, args.mode, args.seed)
    if args.manifest:
        if args.input or args.output:
            raise ConfigError("--manifest cannot be combined with --in/--out")
        try:
            text = Path(args.manifest).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read manifest: {exc}") from None
        entries = parse_manifest(text)
    elif args.input and args.output:
        entries = [ManifestEntry(args.input, args.output)]
    else:
        raise ConfigError("convert needs --manifest or both --in and --out")
    if args.speed is not None:
        ManifestEntry("-", "-", speed=args.speed)  # range check
    jobs = args.jobs or os.cpu_count() or 1
    rows = run_batch(entries, cfg, jobs, args.speed)
    for row in rows:
        if row["error"]:
            log.error("%s: %s", row["input"], row["error"])
    _emit(rows, args.report)
    return EXIT_PARTIAL if any(r["error"] for r in rows) else EXIT_OK


def run_analyze(args) -> int:
    if not (args.input and args.output):
        raise ConfigError("analyze needs --in and --out")
    cfg = load_config(args.config)
    try:
        clip = audio_io.to_target_rate(audio_io.read_wav(args.input), cfg.vocoder.sample_rate_hz)
        vocoder.write_features(args.output, vocoder.analyze(clip, cfg.vocoder))
    except (PseudoWhisperError, OSError) as exc:
        log.error("%s: %s", args.input, exc)
        return EXIT_PARTIAL
    return EXIT_OK


def run_metrics(args) -> int:
    files = list(args.files)
    if args.input:
        files.insert(0, args.input)
    if args.lsd and len(files) != 2:
        raise ConfigError("--lsd needs exactly two files")
    if not 1 <= len(files) <= 2:
        raise ConfigError("metrics takes one or two files")
    cfg = load_config(args.config)
    try:
        clips = [audio_io.to_target_rate(audio_io.read_wav(f), cfg.vocoder.sample_rate_hz)
                 for f in files]
    except (PseudoWhisperError, OSError) as exc:
        raise ConfigError(f"cannot read input: {exc}") from None
    reference = clips[1] if len(clips) == 2 else None
    try:
        report = metrics.measure(clips[0], cfg.vocoder, reference=reference)
    except PseudoWhisperError as exc:
        log.error("%s: %s", files[0], exc)
        return EXIT_PARTIAL
    record = {"path": files[0], "mode": args.mode, **report.to_dict()}
    if reference is not None:
        record["reference"] = files[1]
    _emit([record], args.report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pseudowhisper", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"key = value file (fallback: ${CONFIG_ENV})")
    common.add_argument("--in", dest="input", help="input wav")
    common.add_argument("--report", help="write JSON lines here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    conv = sub.add_parser("convert", parents=[common], help="convert one file or a manifest")
    conv.add_argument("--out", dest="output")
    conv.add_argument("--mode", choices=pipeline.MODES)
    conv.add_argument("--manifest", help="TSV: input, output[, mode[, speed]]")
    conv.add_argument("--seed", type=_u64)
    conv.add_argument("--jobs", type=_positive_int, help="worker processes (default: CPU count)")
    conv.add_argument("--speed", type=float, help="speed-perturbation factor in [0.5, 2]")
    conv.set_defaults(func=run_convert)

    ana = sub.add_parser("analyze", parents=[common], help="dump PWF1 vocoder features")
    ana.add_argument("--out", dest="output")
    ana.set_defaults(func=run_analyze)

    met = sub.add_parser("metrics", parents=[common], help="acoustic metrics as JSON lines")
    met.add_argument("files", nargs="*")
    met.add_argument("--lsd", action="store_true", help="also report LSD against the second file")
    met.add_argument("--mode", help="label copied into the record")
    met.set_defaults(func=run_metrics)
    return parser


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ManifestParseError, ValueError) as exc:
        print(f"pseudowhisper: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
