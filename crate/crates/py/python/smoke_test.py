"""Smoke test for the compiled module.

    cd crates/py && maturin develop --release && python python/smoke_test.py
"""

import math

import hardy_cert_py as hc


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def main():
    want = math.sqrt((3 + math.sqrt(5)) / 4)
    for method in ("eigen", "power", "eta"):
        r = hc.norm("constant", 2.0, 2, method=method, tol=1e-14)
        close(r["norm"], want, 1e-9)

    big = hc.norm("constant", 2.0, 10_000)
    assert 1.8 <= big["norm"] < 2.0, big["norm"]

    assert hc.weights("power:1", 4) == [1.0, 2.0, 3.0, 4.0]
    assert hc.ratios([1.0, 1.0, 1.0], 3) == [1.0, 2.0, 3.0]

    c = hc.condition("cor14", "power:0.5", n=10_000, p=2.0, l=1 / 1.5)
    assert c["holds"], c["verdict_text"]
    bad = hc.condition("cor14", n=10, p=1.01, l=0.5)
    assert not bad["holds"] and bad["verdict_text"].startswith("violated-at(1")

    t = hc.eta_trace("constant", 2.0, 4.0 * 1.000001, 200, l=1.0)
    assert t["escaped_at"] is None and t["first_violation"] is None

    e = hc.carleman("power:0.5", 200, restarts=4, seed=1)
    assert 1.5 < e["lower_bound_e"] <= math.exp(2 / 3)

    s = hc.tridiag_spectrum(1.0, 2.0, 32)
    assert s["max_deviation"] < 1e-9

    ls = hc.ls_counterexample(0.6)
    assert ls["fails"]

    ok, text = hc.run_config("command = norm\nN = 100\np = 2\n", format="csv")
    assert ok and text.startswith("command,")

    try:
        hc.weights("power:-1.5", 3)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid weights accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
