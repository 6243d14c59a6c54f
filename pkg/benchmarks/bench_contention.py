"""Contention kernel benchmark: numba-compiled loops vs the numpy fallback.

    python3 benchmarks/bench_contention.py [--periods 200] [--repeat 3]

Both kernels run the same saturated SA_MAX workload from the same seed; the
script checks that their per-period results are identical before timing.
"""

import argparse
import time

from fairsim import kernels
from fairsim.mac import BASELINES, ContentionConfig, ContentionState, contend_period
from fairsim.radio import LinkState
from fairsim.scenario import SimConfig, VehicleState

CFG = SimConfig()
RATES = (29e6, 58e6, 87e6, 116e6, 173e6, 231e6, 260e6, 289e6)


def workload(n_flows):
    n_u = n_flows // 2
    states = [VehicleState(f"v{i:03d}", 0.0, (0.0, 0.0), 5.0, i < n_u, i >= n_u) for i in range(n_flows)]
    links = {s.vehicle_id: LinkState(3.0, 0.0, 0.0, RATES[i % len(RATES)], True) for i, s in enumerate(states)}
    return states, links


def simulate(kernel, n_flows, periods, mpdu_bits):
    kernels.contend = kernel
    states, links = workload(n_flows)
    ccfg = ContentionConfig(mpdu_bits=mpdu_bits)
    policy = BASELINES["SA_MAX"]
    state = ContentionState(policy, ccfg, CFG, seed=1)
    return [contend_period(states, links, policy, ccfg, CFG, state=state, saturated=True) for _ in range(periods)]


def best_time(kernel, n_flows, periods, mpdu_bits, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        simulate(kernel, n_flows, periods, mpdu_bits)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--periods", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--flows", type=int, nargs="+", default=[2, 8, 20, 40])
    args = ap.parse_args()
    if kernels.contend_numba is None:
        raise SystemExit("numba is not installed; nothing to compare")

    original = kernels.contend
    # compile outside the timed region
    simulate(kernels.contend_numba, 2, 1, 12000.0)
    print(f"{'flows':>5} {'mpdu':>6} {'numpy s':>9} {'numba s':>9} {'speedup':>8}  identical")
    try:
        for mpdu in (12000.0, 0.0):
            for n in args.flows:
                same = simulate(kernels.contend_numba, n, 20, mpdu) == simulate(kernels.contend_numpy, n, 20, mpdu)
                t_np = best_time(kernels.contend_numpy, n, args.periods, mpdu, args.repeat)
                t_nb = best_time(kernels.contend_numba, n, args.periods, mpdu, args.repeat)
                print(f"{n:5d} {int(mpdu):6d} {t_np:9.3f} {t_nb:9.3f} {t_np / t_nb:7.1f}x  {same}")
    finally:
        kernels.contend = original


if __name__ == "__main__":
    main()
