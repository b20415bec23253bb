"""Translation stability of scattering features on digit images.

For each region size r, prints the mean relative L2 change of the feature
vector under a 1-pixel circular shift divided by the same statistic on raw
pixels, for horizontal and vertical shifts and for S1-only and full features.
Uses the first 50 USPS training digits, or scikit-learn's 8x8 digits
upsampled to 16x16 when USPS is absent (``--source sklearn`` forces that).

    python scripts/translation_stats.py [--n 50] [--source usps|sklearn]
"""

import argparse

import numpy as np

from mdscat import config, pipeline
from mdscat.errors import DataError
from mdscat.pyramid import resample
from mdscat.scattering import ScatterConfig, scatter_layer1, scatter_transform


def digits(n, source):
    if source in ("auto", "usps"):
        try:
            return pipeline.load_data(config.reference_config("usps"))["train"].samples[:n], "usps"
        except DataError:
            if source == "usps":
                raise
    from sklearn.datasets import load_digits
    return np.clip(resample(load_digits().images[:n] / 16.0, (16, 16)), 0.0, 1.0), "sklearn-digits"


def rel(a, b):
    a, b = a.reshape(len(a), -1), b.reshape(len(b), -1)
    return float((np.linalg.norm(a - b, axis=1) / np.linalg.norm(a, axis=1)).mean())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--source", choices=("auto", "usps", "sklearn"), default="auto")
    args = ap.parse_args(argv)
    imgs, source = digits(args.n, args.source)
    print(f"{len(imgs)} images from {source}; ratios are feature change / pixel change")
    print(f"{'r':>2} {'shift':>10} {'S1 only':>8} {'all':>8}")
    for r in (1, 2, 4):
        cfg = ScatterConfig(J=3, region=(r, r), log_enabled=False)
        full = scatter_transform(imgs, cfg).values
        s1 = np.concatenate([s.reshape(len(imgs), -1) for s in scatter_layer1(imgs, cfg)[2]], axis=1)
        for axis, name in ((2, "horizontal"), (1, "vertical")):
            moved = np.roll(imgs, 1, axis=axis)
            raw = rel(imgs, moved)
            s1m = np.concatenate([s.reshape(len(imgs), -1) for s in scatter_layer1(moved, cfg)[2]], axis=1)
            print(f"{r:>2} {name:>10} {rel(s1, s1m) / raw:8.3f} "
                  f"{rel(full, scatter_transform(moved, cfg).values) / raw:8.3f}")


if __name__ == "__main__":
    main()
