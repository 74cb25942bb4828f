"""Ground-state preparation by dissipative relaxation.

Evolving exp(-H t) damps every eigenmode at its energy, so the ground
state survives longest; with a spectral gap the convergence is
exponential.  The evolution time for a target infidelity eps is
(1/gap) * ln(1/(eps |alpha0|^2)).
"""

import math

import numpy as np

from schrodingerize import estimate_t_final, prepare_ground_state

print("two-level reference: H = diag(0, 1), u0 = (1, 1)/sqrt(2), eps = 0.01")
t_final = estimate_t_final(gap=1.0, alpha0_sq=0.5, epsilon=0.01)
print(f"  predicted relaxation time = ln(200) = {t_final:.4f}")

report = prepare_ground_state(np.diag([0.0, 1.0]), np.array([1.0, 1.0]) / math.sqrt(2), 0.01)
closed_form = 1.0 / (1.0 + math.exp(-2.0 * report.t_final))
print(f"  pipeline fidelity to the ground state = {report.fidelity:.6f}")
print(f"  closed-form two-level fidelity        = {closed_form:.6f}")
print(f"  model cost: queries ~ {report.cost.queries:.3e}")

print("\nrandom 4x4 battery (gap floor 0.15):")
rng = np.random.default_rng(11)
for trial in range(4):
    q = np.linalg.qr(rng.standard_normal((4, 4)))[0]
    energies = np.sort(rng.uniform(0.0, 2.0, 4))
    energies[1] = energies[0] + max(energies[1] - energies[0], 0.15)
    h = q @ np.diag(energies) @ q.T
    u0 = q[:, 0] + 0.5 * rng.standard_normal(4)
    report = prepare_ground_state(h, u0, 0.01)
    print(
        f"  gap = {report.gap:5.3f}  |alpha0|^2 = {report.alpha0_sq:.3f} "
        f" t_final = {report.t_final:6.2f}  fidelity = {report.fidelity:.5f}"
    )
