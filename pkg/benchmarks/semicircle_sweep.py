import os
import sys
import time

from tqdm import tqdm

current_dir = os.getcwd()
parent_dir = os.path.abspath(os.path.join(current_dir, ".."))
sys.path.append(parent_dir)

import martspec

SIZES = [100, 200, 400, 800, 1600]
USE_ARCH = False


def main(seed: int):
    """
    Distance of the ESD of a Wigner-type matrix to the semicircle law as n
    doubles, with the time spent generating the field and diagonalizing.
    """
    law = martspec.semicircle()
    spec = martspec.field.ArchSpec()
    print(
        f"{'n':>6} {'levy':>10} {'kolmogorov':>12}"
        + f" {'field s':>8} {'eig s':>8}"
    )
    for n in tqdm(SIZES):
        rng = martspec.field.RngStream(seed, n)
        start = time.perf_counter()
        if USE_ARCH:
            field = martspec.field.gen_arch_field(n, spec, rng)
        else:
            field = martspec.field.gen_gaussian_field(n, rng=rng)
        field_time = time.perf_counter() - start
        start = time.perf_counter()
        F = martspec.esd(martspec.eigenvalues(martspec.build_wigner(field)))
        eig_time = time.perf_counter() - start
        levy = martspec.diagnostics.levy_distance(F, law)
        kolmogorov = martspec.diagnostics.kolmogorov_distance(F, law)
        tqdm.write(
            f"{n:>6} {levy:>10.5f} {kolmogorov:>12.5f}"
            + f" {field_time:>8.3f} {eig_time:>8.3f}"
        )


if __name__ == "__main__":
    main(seed=int(sys.argv[1]) if len(sys.argv) > 1 else 0)
