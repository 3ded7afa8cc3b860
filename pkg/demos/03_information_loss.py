"""How much Fisher information the sample eigenvalues alone give up.

Keeping only the eigenvalues of the product-sum matrix (and discarding its
eigenvectors) costs a sample-size-free amount of information.  The closed
form below is cross-checked by assembling the same matrix from metric and
curvature components, and the first-order information carried by the
eigenvalues shows when the expansion stops being trustworthy.
"""

import numpy as np

import eigengeo as eg

lam = np.array([2.0, 1.0])
loss = eg.loss_first_order(lam)
print("leading information loss:\n", loss.B)

generic = eg.loss_contraction(lam)
print("curvature-contraction assembly agrees to:",
      np.abs(loss.B - generic.B).max())

# The loss grows without bound as eigenvalues approach each other.
print("\nloss diagonal as eigenvalues close in:")
for c in (0.5, 0.8, 0.95, 0.99):
    B = eg.loss_first_order([1.0, c]).B
    print(f"  c={c:4.2f}: B_00={B[0, 0]:10.2f}  B_11={B[1, 1]:10.2f}")

# Information carried by the eigenvalues: total minus loss, to first order.
print("\ninfo carried by the eigenvalues at n=100:\n",
      eg.info_carried_by_l(lam, 100))

# With close eigenvalues and a small sample the first-order approximation
# breaks down and the package warns instead of clamping.
import warnings

with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    eg.info_carried_by_l([1.0, 0.99], 10)
print("\nbreakdown warning raised:", bool(caught))
