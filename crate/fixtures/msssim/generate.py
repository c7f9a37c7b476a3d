"""Regenerates the MS-SSIM fixture clips and reference scores.

Scores come from tf.image.ssim_multiscale (default power factors, 11x11
Gaussian window with sigma 1.5, k1=0.01, k2=0.03). Frame sizes are multiples
of 16 so every 2x2 pooling step is exact.
"""
import json
import pathlib

import numpy as np
import tensorflow as tf

HERE = pathlib.Path(__file__).parent
W, H = 192, 176


def write_y4m(path, frames, bit_depth):
    h, w = frames[0].shape
    cw, ch = (w + 1) // 2, (h + 1) // 2
    colour = "C420p10" if bit_depth == 10 else "C420jpeg"
    mid = 1 << (bit_depth - 1)
    dtype = "<u2" if bit_depth == 10 else "u1"
    with open(path, "wb") as f:
        f.write(f"YUV4MPEG2 W{w} H{h} F60:1 Ip A1:1 {colour}\n".encode())
        for y in frames:
            f.write(b"FRAME\n")
            f.write(y.astype(dtype).tobytes())
            f.write(np.full((2, ch, cw), mid, dtype=dtype).tobytes())


def scene(rng, peak):
    yy, xx = np.mgrid[0:H, 0:W].astype(np.float64)
    base = 0.5 + 0.25 * np.sin(xx / 9.0) * np.cos(yy / 13.0) + 0.15 * np.sin((xx + 2 * yy) / 23.0)
    base += rng.normal(0.0, 0.05, size=(H, W))
    return np.clip(np.round(base * peak), 0, peak)


def box_blur(img):
    p = np.pad(img, 1, mode="edge")
    acc = sum(p[dy:dy + H, dx:dx + W] for dy in range(3) for dx in range(3))
    return np.round(acc / 9.0)


def ms_ssim(a, b, peak):
    x = tf.constant(a[None, :, :, None], dtype=tf.float32)
    y = tf.constant(b[None, :, :, None], dtype=tf.float32)
    return float(tf.image.ssim_multiscale(x, y, max_val=float(peak)).numpy()[0])


def main():
    rng = np.random.default_rng(20240611)
    cases = {}
    for depth in (8, 10):
        peak = (1 << depth) - 1
        ref = [scene(rng, peak) for _ in range(2)]
        noisy = [np.clip(np.round(r + rng.normal(0.0, 0.04 * peak, size=r.shape)), 0, peak) for r in ref]
        blurred = [box_blur(r) for r in ref]
        write_y4m(HERE / f"ref_{depth}bit.y4m", ref, depth)
        for name, dist in (("noise", noisy), ("blur", blurred)):
            write_y4m(HERE / f"{name}_{depth}bit.y4m", dist, depth)
            cases[f"{name}_{depth}bit"] = {
                "reference": f"ref_{depth}bit.y4m",
                "distorted": f"{name}_{depth}bit.y4m",
                "per_frame": [ms_ssim(r, d, peak) for r, d in zip(ref, dist)],
            }
    (HERE / "expected.json").write_text(json.dumps(cases, indent=2) + "\n")


if __name__ == "__main__":
    main()
