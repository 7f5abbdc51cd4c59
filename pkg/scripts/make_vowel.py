"""Write synthetic vowels (and a noise clip) as 16-bit wavs for trying the CLI."""
import argparse
from pathlib import Path

import numpy as np

from pseudowhisper import synthetic
from pseudowhisper.audio_io import write_wav


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--count", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--duration", type=float, default=1.0)
    args = ap.parse_args()

    args.out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    write_wav(synthetic.synthetic_vowel(120.0, duration_s=args.duration).clip,
              args.out_dir / "vowel_a.wav")
    for i in range(args.count):
        v = synthetic.random_vowel(rng, args.duration, upper_formants=True)
        name = f"vowel_{i:02d}_f0_{v.f0_hz:.0f}.wav"
        write_wav(v.clip, args.out_dir / name)
        print(name, "formants", [round(f) for f in v.formants_hz[:3]])
    write_wav(synthetic.white_noise(args.duration, seed=args.seed), args.out_dir / "noise.wav")


if __name__ == "__main__":
    main()
