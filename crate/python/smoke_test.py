#!/usr/bin/env python3
"""Smoke test for the mte_py extension module.

Builds nothing itself: expects `cargo build -p mte-py --release` to have
produced target/release/libmte_py.so, which is staged under an importable
name in a temporary directory.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def stage_module() -> None:
    candidates = [
        ROOT / "target" / "release" / "libmte_py.so",
        ROOT / "target" / "release" / "libmte_py.dylib",
        ROOT / "target" / "debug" / "libmte_py.so",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p mte-py --release")
    stage = Path(tempfile.mkdtemp(prefix="mte_py_"))
    shutil.copy(built, stage / "mte_py.so")
    sys.path.insert(0, str(stage))


def main() -> None:
    stage_module()
    import mte_py

    # omega coding
    assert mte_py.omega_encode(1) == "0"
    assert mte_py.omega_encode(4) == "101000"
    assert mte_py.omega_decode("1010001111") == (4, 6)
    assert mte_py.omega_len(16) == 11
    assert mte_py.omega_len(10**6) == 31
    big = 2**4096 + 12345
    bits = mte_py.omega_encode(big)
    assert mte_py.omega_decode(bits) == (big, len(bits))
    assert abs(mte_py.kraft_partial_sum(3) - 0.75) < 1e-15
    assert mte_py.near_additivity_defect(16, 16) == -6
    assert mte_py.compressing_defect(3, 4) == -1
    assert mte_py.is_prime(2**89 - 1)
    assert not mte_py.is_prime(2**67 - 1)

    # prior
    prior = mte_py.PrimePrior(2.0, 10)
    assert abs(prior.mass(2) - 32 / 65) < 1e-12
    assert prior.mass(4) == 0.0
    assert abs(prior.tail_mass(4) - 1 / 65) < 1e-12
    m = prior.moments()
    assert abs(m["mean_log2_p"] - 1.3120) < 5e-4
    assert abs(m["mean_len_p"] - 3.0462) < 5e-4
    draws = prior.sample(10_000, seed=7)
    assert draws == prior.sample(10_000, seed=7)
    assert set(draws) <= {2, 3, 5, 7}
    assert abs(prior.gap_tail(10.0, 35.0) - 1 / 65) < 1e-12

    # simulation
    rows = mte_py.simulate(prior, steps=1000, seed=1, thin=100)
    assert rows[-1][0] == 1000
    assert rows[-1][2] > 0
    gaps = mte_py.gap_samples(prior, x=10.0, n=1000, seed=2)
    assert set(gaps) <= {10.0, 20.0, 40.0, 60.0}

    # machines
    primes, masses = mte_py.ptm_law(0.45, 0.45, 0.1, 100)
    assert abs(sum(masses) - 1) < 1e-12 and masses[0] == masses[1]
    samples = mte_py.ptm_sample(0.45, 0.45, 0.1, 50, seed=3)
    assert all(mte_py.is_prime(p) for p in samples)

    # analysis
    idx = mte_py.hill_estimator([1.0, 2.0, 4.0, 8.0, 16.0], 4)
    assert abs(idx - 1 / (2.5 * math.log(2))) < 1e-12
    assert abs(mte_py.kl_divergence([0.5, 0.5], [0.75, 0.25]) - 0.14384) < 1e-4
    a, _c, residual = mte_py.fit_scaled([2, 3, 4, 5, 6, 7, 16, 17, 300])
    assert a < math.log(2) and residual >= 0
    al = mte_py.gibbs_alignment([(5, 1.0)])
    assert al == {"alignment": 6.0, "entropy": 0.0, "mean_len": 6.0}
    al = mte_py.gibbs_alignment([(2, 0.5), (3, 0.5)])
    assert abs(al["mean_len"] - (al["entropy"] + al["alignment"])) < 1e-12

    print("smoke test passed")


if __name__ == "__main__":
    main()
