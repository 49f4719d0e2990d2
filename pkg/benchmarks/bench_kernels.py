"""Compare the numba and numpy likelihood kernels, alone and inside a full fit.

    python benchmarks/bench_kernels.py [--repeat 50] [--sizes 20x50,100x500]

Run with FAIRIRT_DISABLE_NUMBA=1 to confirm the fallback path works without
numba; both kernels stay importable either way because the numba version
degrades to plain Python loops (very slow, so use small sizes then).
"""
import argparse
import time

import numpy as np

from fairirt import backend_name, kernels
from fairirt.fit import FitConfig, fit_beta_irt
from fairirt.simulate import SimulationSpec, simulate


def best_of(func, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        func()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kernel(n, m, repeat):
    rng = np.random.default_rng(0)
    x = rng.uniform(0.01, 0.99, (n, m))
    u, v, a = rng.normal(size=n), rng.normal(size=m), rng.uniform(-2, 2, m)
    kernels.loss_and_grad_numba(x, u, v, a)  # compile / load cache
    t_nb = best_of(lambda: kernels.loss_and_grad_numba(x, u, v, a), repeat)
    t_np = best_of(lambda: kernels.loss_and_grad_numpy(x, u, v, a), repeat)
    diff = abs(kernels.loss_and_grad_numba(x, u, v, a)[0] - kernels.loss_and_grad_numpy(x, u, v, a)[0])
    return t_nb, t_np, diff


def bench_fit(epochs):
    _, matrix = simulate(SimulationSpec(seed=0))
    cfg = FitConfig(epochs=epochs)
    out = {}
    saved = kernels.loss_and_grad, kernels.loss_only
    try:
        for name, lg, lo in (("numba", kernels.loss_and_grad_numba, kernels.loss_only_numba),
                             ("numpy", kernels.loss_and_grad_numpy, kernels.loss_only_numpy)):
            kernels.loss_and_grad, kernels.loss_only = lg, lo
            t0 = time.perf_counter()
            rep = fit_beta_irt(matrix, cfg)
            out[name] = (time.perf_counter() - t0, rep.final_loss)
    finally:
        kernels.loss_and_grad, kernels.loss_only = saved
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--sizes", default="20x50,100x500,400x2000")
    ap.add_argument("--epochs", type=int, default=3000)
    args = ap.parse_args()

    print(f"selected backend: {backend_name()}")
    print(f"{'size':>10} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8} {'|dloss|':>9}")
    for size in args.sizes.split(","):
        n, m = (int(s) for s in size.split("x"))
        t_nb, t_np, diff = bench_kernel(n, m, args.repeat)
        print(f"{size:>10} {t_nb * 1e3:10.3f} {t_np * 1e3:10.3f} {t_np / t_nb:8.1f} {diff:9.1e}")

    res = bench_fit(args.epochs)
    print(f"\nfull fit, 20x50, {args.epochs} epochs")
    for name, (sec, loss) in res.items():
        print(f"  {name:6s} {sec:7.2f} s   final loss {loss!r}")


if __name__ == "__main__":
    main()
