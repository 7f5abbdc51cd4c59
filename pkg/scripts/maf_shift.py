"""Peak shift and widening caused by MAF on single resonances.

Sweeps the resonance frequency, with and without the lip-radiation factor
|1 - d z^-1|^2 that survives glottal cancellation.
"""
import numpy as np

from pseudowhisper import metrics, transform

FS, BIN = 16000, 15.625
FREQS = np.arange(513) * BIN


def resonance(freq, bw, lip=0.0):
    z = np.exp(-2j * np.pi * FREQS / FS)
    r = np.exp(-np.pi * bw / FS)
    a = 1 - 2 * r * np.cos(2 * np.pi * freq / FS) * z + r * r * z * z
    return np.abs(1 - lip * z) ** 2 / np.abs(a) ** 2


def main():
    print(f"{'F Hz':>6s} {'lip':>5s} {'shift Hz':>9s} {'width x':>8s}")
    for freq in (250.0, 300.0, 400.0, 600.0, 1000.0):
        for lip in (0.0, 0.99):
            sp = resonance(freq, 100.0, lip)
            out = transform.smooth_envelope_maf(sp[None], BIN)[0]
            shift = (np.argmax(out) - np.argmax(sp)) * BIN
            ratio = metrics.formant_width(out, BIN) / metrics.formant_width(sp, BIN)
            print(f"{freq:6.0f} {lip:5.2f} {shift:+9.1f} {ratio:8.2f}")


if __name__ == "__main__":
    main()
