# Mean distance and quasi-inradius
#
# The mean distance averages the two-sided line distances over directions
# with a p-dependent normalisation. The quasi-inradius mu is sqrt(N) times its
# supremum and controls the spectral bounds.

import numpy as np

from hardylab import Ball, Interval, Rectangle, mean_distance, quasi_inradius

# In one dimension the mean distance is just the distance to the boundary.

iv = Interval(0.0, 1.0)
t = np.linspace(0.1, 0.9, 5)
print("interval d_M:", np.round([mean_distance(iv, [s]) for s in t], 6))
print("interval mu :", quasi_inradius(iv))

# At the centre of a ball every direction sees the same distance R, and the
# mean distance equals R / sqrt(N) for p = 2.

for n in (2, 3):
    ball = Ball(np.zeros(n), 1.0)
    print(f"ball N={n}: d_M(0)={mean_distance(ball, np.zeros(n)):.6f}  R/sqrt(N)={1 / np.sqrt(n):.6f}")

# For a rectangle the maximiser is the centre.

rect = Rectangle([0.0, 0.0], [2.0, 1.0])
mu, x = quasi_inradius(rect, return_point=True)
print(f"rectangle mu={mu:.6f} at {np.round(x, 4)}")
