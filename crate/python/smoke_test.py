"""Smoke test for the pyhmga extension module.

Build and install first:
    maturin develop --release -m crates/python/Cargo.toml
then run
    python python/smoke_test.py
"""

import json
import math

import pyhmga


def main():
    assert "linear-2d" in pyhmga.benchmark_names()
    assert abs(pyhmga.probability_of_failure(3.0) - 1.3498980316300946e-3) < 1e-12

    cfg = pyhmga.RunConfig("linear-2d", seed=4)
    report = pyhmga.run(cfg)
    assert abs(report.beta_hl - 3.0) < 0.02, report
    assert abs(math.hypot(*report.mpp_standard) - report.beta_hl) < 1e-9
    assert json.loads(report.to_json())["seed"] == 4
    assert report.history_csv().startswith("generation,")

    again = pyhmga.run(pyhmga.RunConfig.from_json(cfg.to_json()))
    assert again.to_json() == report.to_json()

    sphere = pyhmga.run(pyhmga.RunConfig('{"benchmark": "sphere", "center": [0, 4, 0], "radius": 1}'))
    assert abs(sphere.beta_hl - 3.0) < 0.02

    out = pyhmga.repair_ray("linear-2d", [0.6, 0.8])
    assert (out.status, out.mode) == ("total", "strong")
    weak = pyhmga.repair_ray("linear-2d", [0.6, 0.8], alpha=0.95, beta_ref=5.0)
    assert weak.mode == "weak"
    assert out.trace_csv().startswith("k,beta,g")

    beta, direction = pyhmga.brute_force_mpp("parabolic", resolution=1024)
    assert abs(beta - 5.0) < 1e-6 and abs(direction[1] - 1.0) < 1e-9
    hl = pyhmga.hlrf("sphere-2d")
    assert hl is not None and abs(hl[0] - 3.0) < 1e-4
    assert pyhmga.known_beta("linear-5d") == 3.0

    try:
        pyhmga.run(pyhmga.RunConfig.from_json('{"problem": "linear-2d", "beta_min": 9}'))
    except ValueError as e:
        assert "beta_min" in str(e)
    else:
        raise AssertionError("invalid config accepted")

    far = pyhmga.RunConfig('{"benchmark": "linear", "alpha": [1, 0], "beta": 40}')
    far.max_generations = 60
    try:
        pyhmga.run(far)
    except pyhmga.SurfaceNotFoundError:
        pass
    else:
        raise AssertionError("unreachable surface reported a result")

    print("pyhmga smoke test passed:", report)


if __name__ == "__main__":
    main()
