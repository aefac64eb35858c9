"""Smoke test for the Python bindings.

Build and install first:
    pip install --no-build-isolation ./crates/lozenge-py
"""
from fractions import Fraction

import lozenge_py as lz


def main():
    assert lz.count(1, 2, [1]) == 2
    assert lz.count(2, 3, [1, 3], q="5/3") == lz.count(2, 3, [1, 3], q="10/6")

    probs = lz.distribution(2, 3, q="2/3")
    assert sum(p for _, p in probs) == 1
    assert all(isinstance(p, Fraction) for _, p in probs)

    grid = lz.density("uniform", grid=3, **{"lambda": 1.0})
    z, rho = grid[1]
    assert z == 1.0 and abs(rho - 2 / 3) < 1e-12

    hist = lz.sample_histogram(20, 20, 400_000, seed=1)
    mass = sum(h for _, h in hist) * (hist[1][0] - hist[0][0])
    assert abs(mass - 1) < 1e-9

    pts = lz.arctic(2.0, 1.0, points=16)
    assert len(pts) == 16

    sol = lz.solve_gap(1.0, forbidden=[(0.0, 0.2), (1.6, 2.0)])
    assert sol["converged"] and len(sol["bands"]) == 1

    try:
        lz.density("two-corner", **{"lambda": 1.0, "nu": 0.3, "theta": 0.9})
    except ValueError as e:
        assert "theta - nu" in str(e)
    else:
        raise AssertionError("expected ValueError")

    checks = lz.verify()
    failed = [c[0] for c in checks if not c[1]]
    assert not failed, failed
    print(f"smoke test ok: {len(checks)} checks passed")


if __name__ == "__main__":
    main()
