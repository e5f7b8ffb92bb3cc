"""Smoke test for the funktomo Python extension.

Build and install first, e.g. ``maturin develop -m crates/py/Cargo.toml --release``.
"""

import math

import funktomo


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    ball = funktomo.StarBody.ball(4)
    assert ball.dim == 4 and ball.family == "ball"
    close(ball.volume(), math.pi**2 / 2, 1e-10)
    close(funktomo.funk_transform(ball, [0.0, 0.0, 0.0, 1.0], power=0), 4 * math.pi, 1e-10)

    lam = funktomo.funk_multipliers(4, 4)
    close(lam[2], -4 * math.pi / 3, 1e-8)

    value, err, low = funktomo.lemma1_inverse(ball, [0.5, 0.5, 0.5, 0.5])
    close(value, 1 / (4 * math.pi), 1e-6)

    cube = funktomo.StarBody.from_spec('family = "cube"\ndim = 4\n')
    # kinked radial function: quadrature converges only algebraically
    close(funktomo.central_section_volume(cube, [0.0, 0.0, 0.0, 1.0], level=256), 8.0, 1e-3)
    z, area = funktomo.section_profile(cube, [0.0, 0.0, 0.0, 1.0], half_points=4)
    assert len(z) == len(area) == 9

    verdict = funktomo.is_intersection_body(ball, grid=64)
    assert verdict["verdict"] == "yes", verdict
    cyl = funktomo.StarBody.cylinder(5)
    assert funktomo.is_intersection_body(cyl)["verdict"] == "no"

    report = funktomo.bp_check(ball.scaled(0.9), ball, samples=40)
    assert report["verdict"] == "consistent", report

    rows = funktomo.slicing_table("cube", [9, 10])
    assert rows[1]["ratio"] > rows[1]["ball_ratio"]
    ratio = funktomo.minmax_ratio(ball, grid=32)["ratio"]
    close(ratio, 0.790431, 1e-4)

    conc = funktomo.bm_concavity_check(funktomo.StarBody.ellipsoid([1.0, 0.8, 1.2, 0.9]), [0.0, 0.6, 0.0, 0.8])
    assert conc["concave"]

    try:
        funktomo.StarBody.from_spec('family = "ball"\ndim = 4\nradus = 1\n')
    except ValueError as e:
        assert "radus" in str(e)
    else:
        raise AssertionError("unknown key accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
