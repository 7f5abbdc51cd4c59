"""Metric table for every conversion mode on a few synthetic vowels.

    python3 scripts/compare_modes.py --count 5
"""
import argparse
import time

import numpy as np

from pseudowhisper import metrics, pipeline, synthetic
from pseudowhisper.errors import NoPeakFound
from pseudowhisper.vocoder import analyze


def width(clip):
    feats = analyze(clip)
    try:
        return metrics.formant_width(np.mean(feats.sp, axis=0), feats.bin_width_hz)
    except NoPeakFound:
        return float("nan")


def row(name, clip, ref_width):
    f0 = analyze(clip).f0
    w = width(clip)
    return (f"{name:10s} {metrics.periodicity(clip):6.3f} {np.mean(f0 > 0):7.2f} "
            f"{metrics.band_energy_ratio(clip):8.1f} {metrics.spectral_tilt(clip):7.1f} "
            f"{w:8.0f} {w / ref_width:6.2f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    vowels = [synthetic.synthetic_vowel(120.0, duration_s=1.0)]
    vowels += [synthetic.random_vowel(rng, 1.0, upper_formants=True) for _ in range(args.count)]
    cfg = pipeline.PipelineConfig()
    for v in vowels:
        print(f"\nF0 {v.f0_hz:.0f} Hz, formants {[round(f) for f in v.formants_hz]}")
        print(f"{'mode':10s} {'period':>6s} {'voiced':>7s} {'hi/lo dB':>8s} {'tilt':>7s} "
              f"{'width Hz':>8s} {'x in':>6s}")
        ref = width(v.clip)
        print(row("input", v.clip, ref))
        for mode in pipeline.MODES:
            t0 = time.perf_counter()
            out = pipeline.convert(v.clip, cfg, mode)
            elapsed = time.perf_counter() - t0
            print(row(mode, out, ref), f"  {elapsed:.2f}s")


if __name__ == "__main__":
    main()
