import os
import sys
import time

current_dir = os.getcwd()
parent_dir = os.path.abspath(os.path.join(current_dir, ".."))
sys.path.append(parent_dir)

import martspec


def main(n: int):
    """
    Time one Lindeberg swap decomposition between two Gaussian vectors of
    order n, and report its terms against the third-order bound.
    """
    rng = martspec.field.RngStream(0, n)
    k_n = martspec.field.num_positions(n)
    x = rng.standard_normal(k_n)
    z = rng.standard_normal(k_n)
    start = time.perf_counter()
    report = martspec.diagnostics.swap_decomposition(x, z, 1j, a=2)
    elapsed = time.perf_counter() - start
    print(f"n = {n}, k_n = {k_n}, {elapsed:.2f} s")
    print(f"|s(X) - s(Z)| = {abs(report.difference):.3e}")
    print(f"|R1| = {abs(report.R1):.3e}, |R2| = {abs(report.R2):.3e}")
    print(f"|R3| = {abs(report.R3):.3e} <= {report.bound_rhs:.3e}")
    if not report.within_bound:
        print("third-order bound violated")


if __name__ == "__main__":
    main(n=int(sys.argv[1]))
