"""Quick end-to-end check of the Python bindings.

    pip install --no-build-isolation -e crates/py
    python python/smoke_test.py
"""

import math

import freefisher as ff


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    qc = ff.Measure("quartercircle(4)")
    root = qc.sqrt()
    assert qc.exact_moments(3) == ["1", "1", "2", "5"]
    assert close(root.moment(2), qc.moment(1))
    assert close(root.square().moment(3), 5.0)

    assert close(ff.fisher(root), 1.0)
    assert close(ff.bound("T11", qc), 2.0)
    assert close(ff.bound("T13", qc, d=2), 16.0)
    assert close(ff.fisher(ff.Measure("uniform(0,1)")), ff.KAPPA)
    semi = ff.Measure("semicircle(2)")
    assert close(ff.entropy(semi), 0.5 + 0.5 * math.log(2 * math.pi), 1e-8)
    assert close(ff.log_energy(semi), -0.25, 1e-8)

    assert ff.star_moment("a a* a a*") == "2"
    assert ff.star_moment("a a a* a*") == "1"
    assert ff.star_moment("a a") == "0"
    try:
        ff.star_moment("a b")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown letter accepted")

    report = ff.verify("lemma39", degree=6, nu=qc)
    assert report["passed"] and report["max_violation"] == 0.0

    trial = ff.rdiagonal_trial(qc, 256, seed=1)
    assert trial["ks"] < 0.05
    spec = ff.block_embedding_spectrum(qc, 32, seed=1)
    assert len(spec) == 64 and close(sum(spec), 0.0, 1e-12)
    assert ff.trial_seeds(5, 3) == ff.trial_seeds(5, 3)

    try:
        ff.block_embedding_spectrum(qc, 100000)
    except MemoryError:
        pass
    else:
        raise AssertionError("resource guard did not fire")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
