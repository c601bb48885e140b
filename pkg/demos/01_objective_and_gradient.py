"""Walk through the predictive-information objective on a single state.

Starts from a random controller/predictor pair, prints the objective, then
runs plain gradient ascent on the controller weights for a fixed sensor
input and shows the objective climbing. The analytic gradient is compared
against finite differences on the way, so you can see the machinery agree
before trusting it inside a session.

Run:  python3 demos/01_objective_and_gradient.py
"""

import numpy as np

from pisphere import LearningConfig, NetworkPair, SensorVector
from pisphere.networks import (
    ControllerNet,
    PredictorNet,
    pi_gradients,
    pi_objective,
    update_step,
)


def finite_difference(pair, x, cfg, eps=1e-6):
    gC = np.zeros_like(pair.controller.C)
    for i in range(gC.shape[0]):
        for j in range(gC.shape[1]):
            d = np.zeros_like(gC)
            d[i, j] = eps
            up = NetworkPair(ControllerNet(pair.controller.C + d, pair.controller.h),
                             pair.predictor, 0)
            dn = NetworkPair(ControllerNet(pair.controller.C - d, pair.controller.h),
                             pair.predictor, 0)
            gC[i, j] = (pi_objective(up, x, cfg) - pi_objective(dn, x, cfg)) / (2 * eps)
    return gC


def main():
    rng = np.random.default_rng(0)
    pair = NetworkPair(
        ControllerNet(rng.normal(0, 0.8, (2, 5)), rng.normal(0, 0.8, 2)),
        PredictorNet(rng.normal(0, 0.8, (5, 2)), rng.normal(0, 0.8, 5)),
        0,
    )
    x = SensorVector(rng.uniform(-0.5, 0.5, 5))
    cfg = LearningConfig(eps_controller=0.3, eps_model=0.0)

    j0, gC, _ = pi_gradients(pair, x, cfg)
    num = finite_difference(pair, x, cfg)
    rel = np.linalg.norm(gC - num) / max(np.linalg.norm(num), 1e-12)
    print(f"initial objective J = {j0:.4f}")
    print(f"analytic vs finite-difference gradient: relative error {rel:.2e}")

    print("\ngradient ascent on a fixed input:")
    for step in range(8):
        j = pi_objective(pair, x, cfg)
        print(f"  step {step:2d}  J = {j:.4f}")
        pair, _ = update_step(pair, x, x, cfg)
    print(f"  step  8  J = {pi_objective(pair, x, cfg):.4f}")
    print("\nthe objective is the log-volume of the motor-to-sensor loop "
          "Jacobian; pushing it up makes the robot amplify its own "
          "sensorimotor variability.")


if __name__ == "__main__":
    main()
