"""Empirical heat-semigroup estimates.

Fits the smoothing exponent of P_t on random fields of prescribed
regularity: the norm two derivatives up grows like t^(-theta), the
increment P_t f - f closes like t^(+theta), and the gradient costs one
derivative (a bounded constant, no time factor).
"""

import numpy as np

from besovpde import (
    TorusGrid,
    bernstein_check,
    dyadic_partition,
    dyadic_random_field,
    heat_increment_fit,
    schauder_fit,
)

grid = TorusGrid(d=1, n=256)
part = dyadic_partition(grid)
t_samples = np.geomspace(1e-3, 0.2, 16)


def sample_fields(gamma, count, tag):
    seeds = np.random.SeedSequence((2024, tag)).spawn(count)
    return [dyadic_random_field(grid, gamma, seed=s, part=part)
            for s in seeds]


print("smoothing fits (expected slope -theta):")
for gamma, theta in ((-0.3, 0.25), (0.2, 0.5)):
    rep = schauder_fit(gamma, theta, sample_fields(gamma, 32, int(10 * theta)),
                       t_samples, part)
    print(f"  gamma={gamma:+.1f}, theta={theta}: slope "
          f"{rep.fitted_exponent:+.3f}, envelope constant {rep.constant:.3f}")

print("\nincrement fits (expected slope +theta):")
for gamma, theta in ((0.2, 0.5), (0.0, 0.3)):
    rep = heat_increment_fit(gamma, theta,
                             sample_fields(gamma + 2 * theta, 16,
                                           100 + int(10 * theta)),
                             t_samples, part)
    print(f"  gamma={gamma:+.1f}, theta={theta}: slope "
          f"{rep.fitted_exponent:+.3f}")

print("\ngradient inequality (one derivative, no time factor):")
rep = bernstein_check(-0.3, sample_fields(0.7, 24, 200), part)
print(f"  envelope constant {rep.constant:.3f} over {rep.sample_count} fields")
