#!/usr/bin/env python3
"""Smoke test for the leafwise_py extension module.

Build the module first:

    cargo build --release -p leafwise-py

then run this script from anywhere inside the repository:

    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path


def load_module():
    repo = Path(__file__).resolve().parent.parent
    candidates = [
        repo / "target" / "release" / "libleafwise_py.so",
        repo / "target" / "debug" / "libleafwise_py.so",
        repo / "target" / "release" / "leafwise_py.dll",
        repo / "target" / "debug" / "leafwise_py.dll",
        repo / "target" / "release" / "libleafwise_py.dylib",
        repo / "target" / "debug" / "libleafwise_py.dylib",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("no built extension found; run `cargo build --release -p leafwise-py` first")
    tmp = Path(tempfile.mkdtemp(prefix="leafwise_py_"))
    suffix = ".pyd" if built.suffix == ".dll" else ".so"
    shutil.copy(built, tmp / f"leafwise_py{suffix}")
    sys.path.insert(0, str(tmp))
    import leafwise_py

    return leafwise_py


def approx(a, b, tol):
    assert abs(a - b) < tol, f"{a} vs {b} (tol {tol})"


def main():
    lw = load_module()

    # smooth step: endpoints exact, midpoint symmetric, derivative positive
    assert lw.step(-1.0) == (0.0, 0.0)
    assert lw.step(2.0) == (1.0, 0.0)
    v, dv = lw.step(0.5)
    approx(v, 0.5, 1e-15)
    assert dv > 0.0

    # nil constants: dζ normalization and Euler classes
    approx(lw.nil_connection_constant(-3), 3.0 / (2.0 * math.pi), 1e-15)
    for c1 in (-3, -9, -2, -1):
        approx(lw.euler_class_integral(c1, 256), float(c1), 1e-8)

    # Liouville contraction is exact
    assert lw.liouville_residual(200, 7) < 1e-12

    # link sampling and the Newton retraction
    poly = lw.Polynomial("E6")
    assert poly.degree == 3 and poly.link_euler_class == -3
    pts = poly.sample_link(25, 7)
    assert len(pts) == 25
    for z in pts:
        fr, fi = poly.evaluate(z)
        assert math.hypot(fr, fi) < 1e-12
        approx(sum(c * c for c in z), 1.0, 1e-12)
    on_fiber = poly.project_to_fiber([1.3, 0.2, -0.4, 0.8, 0.3, -0.9], (1.0, 0.0))
    fr, fi = poly.evaluate(on_fiber)
    approx(fr, 1.0, 1e-11)
    approx(fi, 0.0, 1e-11)

    # Hopf action preserves the radius and the fiber at the monodromy angle
    moved = poly.hopf(2.0 * math.pi / 3.0, on_fiber)
    fr, fi = poly.evaluate(moved)
    approx(fr, 1.0, 1e-10)
    approx(fi, 0.0, 1e-10)

    # regularity floor on the tube band, all three polynomials
    for name in ("E6", "E7", "E8"):
        mn, ok = lw.Polynomial(name).regularity_min((0.01, 0.1), 400, 7, 1e-4)
        assert ok and mn > 1e-4, (name, mn)

    # certified cutoffs: 5% margin and the tail value 2λμ
    cut = lw.Cutoffs(0.05, [0.0, 1.0, 2.0, 3.0])
    approx(cut.lambda_certified / cut.scan_max_sharp, 1.05, 1e-9)
    assert cut.scan_max_classical < cut.scan_max_sharp
    k, kp = cut.k(0.5)
    approx(k, math.exp(0.5), 1e-12)
    approx(kp, math.exp(0.5), 1e-12)
    assert cut.k(3.5) == (0.0, 0.0)
    approx(cut.volume_coefficient(5.0), 2.0 * cut.lambda_certified * 0.05, 1e-9)

    # turbulization: frozen radius inside r0, exponential decay outside r2
    r, theta = lw.turbulization_flow([0.01, 0.02, 0.035, 0.05], 0.005, 0.0, 2.0)
    approx(r, 0.005, 1e-13)
    approx(theta, 2.0, 1e-9)

    # a single suite check end to end through the bindings
    all_passed, checks, report = lw.run_suite("polynomial = E6\nseed = 7\n", only="gluing")
    assert all_passed and checks["endperiodic.gluing"][0]
    assert "passed = true" in report

    print("smoke test OK")


if __name__ == "__main__":
    main()
