"""Smoke test for the pentaheat extension module.

Uses an installed `pentaheat` if present, otherwise loads the shared library
from target/release (build it with
`cargo build -p pentaheat-py --features extension-module --release`).
"""

import importlib.machinery
import importlib.util
import pathlib
import sys
from fractions import Fraction


def load():
    try:
        import pentaheat

        return pentaheat
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parents[3]
    for name in ("libpentaheat.so", "libpentaheat.dylib", "pentaheat.dll"):
        lib = root / "target" / "release" / name
        if lib.exists():
            loader = importlib.machinery.ExtensionFileLoader("pentaheat", str(lib))
            spec = importlib.util.spec_from_loader("pentaheat", loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit("pentaheat extension not found; build it first")


def main():
    ph = load()

    p = ph.Poly("x^2*y^2 - 1")
    q = ph.Poly("x*y - 1")
    assert p.exact_divide(q) == ph.Poly("x*y + 1")
    assert (q ** 3).vanishing_order(q) == 3
    assert p.bidegree() == (2, 2)
    assert p.eval(Fraction(1, 2), 4) == 3
    try:
        q.exact_divide(ph.Poly("x + y"))
        raise AssertionError("inexact division must raise")
    except ValueError:
        pass

    h = ph.HeatMap()
    assert h.numerator_bidegrees()[0] == (3, 4)
    assert h.is_reflection_symmetric()
    x, y = h(Fraction(-3), Fraction(-5, 2))
    assert isinstance(x, Fraction) and isinstance(y, Fraction)

    assert ph.pullback_matrix() == ph.reference_matrix()
    assert ph.characteristic_polynomial() == [-4, -15, -20, -10, 0, 1]
    assert ph.spectral_radius() == 4
    assert ph.degree_growth(2) == [(1, (3, 4), (3, 4), (3, 4)), (2, (13, 12), (13, 12), (25, 24))]
    assert ph.topological_degree(2, 3) == 6

    pent = ph.Polygon([(0, 0), (4, 0), (5, 3), (2, 5), (-1, 3)])
    assert pent.is_convex() and len(pent) == 5
    stepped = pent.heat_step()
    assert len(stepped.vertices()) == 5
    assert len(pent.normalize()) == 3
    assert pent.converge() < 200
    assert ph.Polygon.random_convex(7).is_convex()

    data, counts = ph.render(32, 24, 100)
    assert data.startswith(b"P6\n32 24\n255\n")
    assert sum(counts) == 32 * 24

    cert = ph.verify(growth_n=1, samples=2)
    assert cert["overall"] == "pass", cert["failed_check"]
    assert cert["summary"]["lambda1"] == "4"
    assert cert["summary"]["lambda2"] == "6"
    assert len(cert["content_hash"]) == 64

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
