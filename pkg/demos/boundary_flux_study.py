"""Hemisphere fluxes of the boundary terms around the knot, with calibrated controls."""
from nks import model as mdl
from nks import weitzenbock as wz


def show(label, res, expected=None):
    fluxes = "  ".join(f"{f:+.3e}" for f in res.fluxes)
    tail = "" if expected is None else f"  expected power {expected:+g}"
    print(f"{label:<28} {fluxes}   power {res.exponent:+.4f}{tail}   vanishes={res.vanishes}")


def main():
    p = mdl.ModelParams(2)
    print("radii:", "  ".join(f"{r:.4f}" for r in wz.boundary_term_scaling(wz.model_fields_fn(p)).radii))
    show("model", wz.boundary_term_scaling(wz.model_fields_fn(p)))
    alpha = wz.exceptional_alpha_mode(p, 0, amplitude=0.3)
    show("model + alpha mode t=0", wz.boundary_term_scaling(wz.model_fields_fn(p, alpha)))
    for lam in (0.5, -0.5, -1.5):
        ctl = wz.synthetic_control_mode(lam, 0.3)
        show(f"model + control {lam:+g}", wz.boundary_term_scaling(wz.model_fields_fn(p, ctl)),
             wz.control_exponent(lam))

    fn = wz.model_fields_fn(p, wz.synthetic_control_mode(-1.5, 0.3))
    center, radius = (0.5, 0.2, 0.8), 0.3
    print(f"\nflux through a sphere off the boundary: {wz.sphere_flux(fn, center, radius):+.10f}")
    print(f"ball integral of vv - I'':              {wz.ball_integral(fn, center, radius):+.10f}")


if __name__ == "__main__":
    main()
