"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints best-of-N wall time per call and the speed-up for the period
product (N x N chain of scalings and products) and the batched 2x2 Bloch
propagator, plus one full converged spectrum with each backend.
"""

import argparse
import timeit

import numpy as np

from floquet_pt import _kernels
from floquet_pt._kernels import _fallback


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    compiled = _kernels.compiled
    if compiled is None:
        print("compiled kernels not built; only the fallback is available")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':<34}{'numpy [ms]':>12}{'cython [ms]':>13}{'speed-up':>10}")
    for n, steps in ((8, 4096), (20, 4096), (60, 1792), (120, 896)):
        mats = np.ascontiguousarray(np.stack([np.linalg.qr(rng.normal(size=(n, n)) + 0j)[0]
                                              for _ in range(4)]))
        idx = rng.integers(0, 4, size=steps).astype(np.intp)
        kicks = np.exp(1j * rng.normal(size=(steps + 1, n)))
        y = np.eye(n, dtype=np.complex128)
        t_py = best(lambda: _fallback.chain_apply(mats, idx, kicks, y), args.repeat)
        t_c = best(lambda: compiled.chain_apply(mats, idx, kicks, y), args.repeat)
        print(f"{f'period product N={n}, {steps} steps':<34}{1e3 * t_py:>12.2f}{1e3 * t_c:>13.2f}"
              f"{t_py / t_c:>10.2f}")
    for n_k, steps in ((128, 1792), (512, 3584)):
        beta = rng.normal(size=(steps, n_k)) + 1j * rng.normal(size=(steps, n_k))
        h = rng.random(steps) * 1e-2
        t_py = best(lambda: _fallback.bloch_product(beta, h), args.repeat)
        t_c = best(lambda: compiled.bloch_product(beta, h), args.repeat)
        print(f"{f'bloch product n_k={n_k}, {steps} steps':<34}{1e3 * t_py:>12.2f}{1e3 * t_c:>13.2f}"
              f"{t_py / t_c:>10.2f}")

    from floquet_pt.floquet import converged_spectrum
    from floquet_pt.lattice import make_model

    model = make_model(n_sites=60, amplitude=40.0, omega=20.0, m0=2, gamma=0.5)
    timings = {}
    for name, impl in (("numpy", _fallback), ("cython", compiled)):
        _kernels._impl = impl
        timings[name] = best(lambda: converged_spectrum(model), 2)
    _kernels._impl = compiled
    print(f"{'converged spectrum N=60':<34}{1e3 * timings['numpy']:>12.1f}"
          f"{1e3 * timings['cython']:>13.1f}{timings['numpy'] / timings['cython']:>10.2f}")


if __name__ == "__main__":
    main()
