"""Walk through the model knot solution: profiles, the boundary limit and a residual check."""
import numpy as np

from nks import model as mdl
from nks import reduced_kw as rkw
from nks.lie import X, conjugate


def main():
    for w in (0, 1, 2, 3):
        p = mdl.ModelParams(w)
        print(f"weight {w}")
        for psi in (0.0, 0.6, 1.2, np.pi / 2 - 1e-6):
            f = mdl.eval_model(p, 1.0, psi, 0.0)  # rho = 1
            print(f"  psi={psi:.6f}  a={f.a_theta:+.6f}  b={f.b:+.6e}  |c|={abs(f.c):.6e}")
        print(f"  limit of -a at the boundary: {mdl.a_psi_limit_equator(p):g}")

        theta, y = 0.8, 1e-6
        rho, psi = np.hypot(0.5, y), np.arctan2(0.5, y)
        _, _, varphi = mdl.polar_matrices(p, rho, psi, theta)
        h = mdl.nahm_gauge_h(p, theta)
        dev = np.abs(y * conjugate(h, varphi) - X).max()
        print(f"  |y * h varphi h^-1 - X| at y = 1e-6: {dev:.2e}")

    norms, scale = rkw.model_residual_norms(mdl.ModelParams(2), 64, theta_windows=1)
    print("weight 2 residual sup norms on the 64-cell annulus (X, Y, Z, mu):")
    print("  " + "  ".join(f"{v:.2e}" for v in norms) + f"   field scale {scale:.1f}")


if __name__ == "__main__":
    main()
