#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the numpy fallback.

Times the three scan kernels on realistic workloads plus one end-to-end
decode per backend.  Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from stclab import kernels
from stclab.algebra import golden_code, perfect_code_4x4
from stclab.alphabet import make_qam
from stclab.channel import sample_channel, sample_symbols, transmit, trial_rng
from stclab.decoders import recursive_decode, sphere_decode
from stclab.simharness import sigma2_for_snr_db


def median_time(fn, repeats):
    times = []
    fn()  # warmup
    for _ in range(repeats):
        tic = time.perf_counter()
        fn()
        times.append(time.perf_counter() - tic)
    return float(np.median(times))


def kernel_workloads(rng):
    """(name, backend -> callable) pairs; inputs fixed across backends."""
    qam4 = make_qam(4)
    qam16 = make_qam(16)
    golden = golden_code()
    perfect4 = perfect_code_4x4()

    from stclab.channel import equivalent_channels

    h2 = sample_channel(2, rng)
    g2 = np.hstack(equivalent_channels(golden, h2))
    y2 = g2 @ rng.standard_normal(4) + 0.3 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))

    h4 = sample_channel(4, rng)
    eqs4 = equivalent_channels(perfect4, h4)
    y4 = sum(eqs4[i] @ sample_symbols(qam4, 4, rng)[i] for i in range(4))
    gr = np.hstack(eqs4[1:])
    gram = gr.conj().T @ gr
    w = np.linalg.solve(gram, gr.conj().T)

    q2, r2 = np.linalg.qr(g2)
    z2 = q2.conj().T @ y2

    work = []
    work.append(("ml_scan golden 4-QAM (256 cands)", lambda be: be.ml_scan(y2, g2, qam4.points)))
    work.append(("ml_scan golden 16-QAM (65536 cands)", lambda be: be.ml_scan(y2, g2, qam16.points)))
    work.append(
        ("zf_scan perfect4 step (256 cands)", lambda be: be.zf_scan(y4, eqs4[0], w, gr, qam4.points))
    )
    work.append(
        ("sphere_scan golden natural", lambda be: be.sphere_scan(r2, z2, qam4.points, None, True))
    )
    work.append(
        ("sphere_scan golden closest-first", lambda be: be.sphere_scan(r2, z2, qam4.points, None, False))
    )
    return work


def decode_workloads():
    qam4 = make_qam(4)
    golden = golden_code()
    perfect4 = perfect_code_4x4()
    out = []
    for spec, label in ((golden, "golden"), (perfect4, "perfect4")):
        rng = trial_rng(42, spec.n)
        h = sample_channel(spec.n, rng)
        s = sample_symbols(qam4, spec.n, rng)
        tx = transmit(spec, s, h, sigma2_for_snr_db(spec, qam4, 12.0), rng)
        eqs = tx.context.equivalents
        out.append(
            (
                f"recursive_decode {label} 4-QAM",
                lambda name, y=tx.y, e=eqs: recursive_decode(y, e, qam4, backend=name),
            )
        )
    rng = trial_rng(43)
    h = sample_channel(2, rng)
    s = sample_symbols(qam4, 2, rng)
    tx = transmit(golden, s, h, sigma2_for_snr_db(golden, qam4, 6.0), rng)
    g = np.hstack(tx.context.equivalents)
    out.append(
        (
            "sphere_decode golden 4-QAM",
            lambda name, y=tx.y, gg=g: sphere_decode(y, gg, qam4, backend=name),
        )
    )
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=30)
    args = parser.parse_args()

    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled backend not built; timing the python backend only")
    rng = np.random.default_rng(7)

    rows = []
    for name, call in kernel_workloads(rng):
        timings = {}
        for b in backends:
            be = kernels.get_backend(b)
            timings[b] = median_time(lambda: call(be), args.repeats)
        rows.append((name, timings))
    for name, call in decode_workloads():
        timings = {b: median_time(lambda: call(b), args.repeats) for b in backends}
        rows.append((name, timings))

    width = max(len(r[0]) for r in rows)
    header = f"{'workload':<{width}}  {'python':>12}"
    if "compiled" in backends:
        header += f"  {'compiled':>12}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, timings in rows:
        line = f"{name:<{width}}  {timings['python'] * 1e3:>10.3f}ms"
        if "compiled" in timings:
            speedup = timings["python"] / timings["compiled"]
            line += f"  {timings['compiled'] * 1e3:>10.3f}ms  {speedup:>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
