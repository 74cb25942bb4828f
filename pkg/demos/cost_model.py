"""The query/gate cost model, standalone.

Sparse-access simulation of exp(-iHt) costs tau * log(tau/eps) /
loglog(tau/eps) queries with tau = s * t * max|H|.  The warped lift pays
an extra factor ~ pi/(2 eps) through the auxiliary mode diagonal, plus
the amplification ratio |u(0)|/|u(t)|; for the transport equation the
advection symbol already carries a 1/eps-scale max-norm, so lifting does
not change the order.
"""

import numpy as np

from schrodingerize import (
    TransportModel,
    assemble_eta_diagonal,
    gibbs_cost,
    ground_state_cost,
    hamsim_cost,
    make_grid,
    schrodingerisation_cost,
    transport_norm_parity,
)

report = hamsim_cost(s=2, t=1, max_norm=1, epsilon=0.01, m_h=4)
print("plain simulation at s=2, t=1, |H|max=1, eps=0.01, m_H=4:")
print(f"  tau = {report.tau}, queries = {report.queries:.4f}, gates = {report.gates:.1f}")

print("\nlifted run vs plain simulation (the extra 1/eps factor):")
for eps in (1e-2, 1e-3, 1e-4):
    lifted = schrodingerisation_cost(1.0, 2, 1, 1.0, eps, 4)
    plain = hamsim_cost(2, 1, 1.0, eps, 4)
    print(f"  eps = {eps:.0e}:  ratio = {lifted.queries / plain.queries:10.1f}"
          f"   (eps * ratio = {eps * lifted.queries / plain.queries:.3f})")

print("\nground-state preparation, s=1, |H|max=1, alpha0=1/sqrt(2), gap=1, eps=0.01:")
gs = ground_state_cost(1.0, 1.0, 1 / np.sqrt(2), 1.0, 0.01)
print(f"  leading factor 1/(alpha0*gap*eps) = {1 / (0.01 / np.sqrt(2)):.2f}, "
      f"queries ~ {gs.queries:.3e}")

print("\nGibbs state, 2-level at beta = 1:")
z = 1 + np.exp(-1.0)
gb = gibbs_cost(1.0, 1.0, beta=1.0, dim=2, partition_z=z, epsilon=0.01)
print(f"  sqrt(D/Z) = {gb.norm_ratio:.4f}, queries ~ {gb.queries:.3e}")

print("\ntransport max-norm parity under matched refinement (K = 8 fixed):")
k = 8
for j in (16, 32, 64):
    model = TransportModel.create(
        [make_grid(1.0, j)], [make_grid(1.0, k)], np.full((k, k), 1.0 / k)
    )
    d = assemble_eta_diagonal(make_grid(8.0, j))
    parity = transport_norm_parity(model, d)
    print(f"  J = N = {j:3d}:  |L|max = {parity['advection_max_norm']:7.2f}   "
          f"|sigma x D|max = {parity['scattering_max_norm']:.3f}   "
          f"ratio = {parity['ratio']:.1f}")
