#!/usr/bin/env python3
"""Smoke test for the phodar Python bindings.

Builds nothing itself: run `cargo build --release -p phodar-python`
first, then `python3 python/smoke_test.py`. The script stages the
cdylib as an importable module, drives the main operations end to end
and checks a handful of known values.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def stage_module() -> None:
    candidates = [
        REPO / "target" / "release" / "libphodar.so",
        REPO / "target" / "debug" / "libphodar.so",
        REPO / "target" / "release" / "libphodar.dylib",
    ]
    lib = next((p for p in candidates if p.exists()), None)
    if lib is None:
        sys.exit("build the bindings first: cargo build --release -p phodar-python")
    stage = Path(tempfile.mkdtemp(prefix="phodar_py_"))
    suffix = ".so" if lib.suffix != ".dylib" else ".so"
    shutil.copy2(lib, stage / f"phodar{suffix}")
    sys.path.insert(0, str(stage))


def approx(a: float, b: float, rel: float = 1e-6) -> bool:
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300)


def main() -> None:
    stage_module()
    import phodar

    checks = 0

    def check(ok: bool, what: str) -> None:
        nonlocal checks
        if not ok:
            sys.exit(f"FAIL: {what}")
        checks += 1
        print(f"  ok: {what}")

    print(f"phodar {phodar.__version__}")

    # frequency <-> range mapping
    chirp = phodar.Chirp(
        f_start_hz=10.5e9, chirp_rate_hz_per_s=2e13, period_s=1e-4, amplitude_v=0.318
    )
    check(approx(chirp.bandwidth_hz, 2e9), "bandwidth 2 GHz")
    check(approx(chirp.center_frequency_hz, 11.5e9), "center 11.5 GHz")
    check(
        approx(phodar.frequency_to_range(145e3, chirp), 1.08674766025, 1e-9),
        "145 kHz -> 1.0867 m",
    )
    check(
        approx(phodar.dechirp_frequency(6e-9, chirp), 120e3, 1e-12),
        "6 ns -> 120 kHz",
    )

    # resolution formulas
    rr, rc = phodar.resolutions(
        2e9, phodar.SPEED_OF_LIGHT / 11.5e9, 2.0, 2 * math.pi / 24.56
    )
    check(abs(rr - 0.075) < 1e-4, "range resolution 7.5 cm")
    check(abs(rc - 0.0255) < 1e-4, "cross-range resolution 2.55 cm")

    # Bessel values
    check(approx(phodar.bessel_j1(0.2), 0.0995008326392360, 1e-12), "J1(0.2)")

    # scene geometry; depth is measured on the echo-free link, matching
    # the reference measurement (an echo skirt inside the leakage band
    # would floor the perfect-match depth otherwise)
    scene = phodar.Scene(1.55, 24.56, 6e-9, 0.2 * 5.0 / math.pi)
    bare_link = phodar.Link(chirp, scene)
    scene.add_target(0.45, 0.0, 0.05)
    check(
        approx(scene.echo_delay(0, 0.0), 2 * 1.10 / phodar.SPEED_OF_LIGHT, 1e-9),
        "nearest-point echo delay",
    )

    # de-chirped trace and spectrum: leakage tone at 120 kHz
    link = phodar.Link(chirp, scene)
    traces = link.synth_traces(phodar.Mismatch.disabled(), n_periods=1)
    check(len(traces) == 1 and len(traces[0]) == 400, "one 400-sample period")
    freqs, power = phodar.trace_spectrum(traces[0], 4e6)
    f_peak, _ = phodar.peak_in_band(freqs, power, 50e3, 2e6)
    check(abs(f_peak - 120e3) <= 10e3, f"leakage peak at {f_peak/1e3:.0f} kHz")

    # cancellation depth: 0.9292 amplitude ratio -> ~23 dB
    depth = bare_link.cancellation_depth(phodar.Mismatch(amplitude_ratio=0.9292))
    check(abs(depth - 23.0) <= 0.5, f"depth {depth:.2f} dB at ratio 0.9292")
    perfect = bare_link.cancellation_depth(phodar.Mismatch())
    check(perfect >= 60.0, f"perfect match depth {perfect:.0f} dB")

    # automatic matching from a detuned start
    ratio, delay, matched_depth, iters, converged = bare_link.auto_match(
        phodar.Mismatch(amplitude_ratio=0.95, delay_error_s=5e-12),
        0.8, 1.2, -50e-12, 50e-12,
    )
    check(converged and matched_depth >= 40.0, f"auto-match depth {matched_depth:.1f} dB")
    check(abs(ratio - 1.0) <= 5e-3 and abs(delay) <= 2e-12, "matched near (1.0, 0.0)")

    # small image: the echo appears at its range
    mag, n_range, n_cross, range_axis, cross_axis = link.form_image(
        phodar.Mismatch(), n_periods=64, highpass_cutoff_hz=140e3
    )
    check(n_range == 201 and n_cross == 64, "image dimensions")
    peak_cell = max(range(len(mag)), key=lambda i: mag[i])
    peak_range = range_axis[peak_cell // n_cross]
    check(abs(peak_range - 1.10) <= 0.075, f"image peak at {peak_range:.3f} m")

    print(f"all {checks} checks passed")


if __name__ == "__main__":
    main()
