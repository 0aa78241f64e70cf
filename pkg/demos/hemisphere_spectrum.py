"""Smallest hemisphere eigenvalue per weight and the exponents it controls."""
from nks import model as mdl
from nks import spectral as sp


def main():
    print("weight  gamma0      mode     type I roots          decay     windows (d-, d+, e-, e+)")
    for w in range(0, 9):
        scan = sp.gamma0(mdl.ModelParams(w))
        roots = sp.type_roots([scan.gamma0], "I")
        windows = sp.weight_windows(scan.gamma0)
        print(f"{w:>5}   {scan.gamma0:.6f}  {scan.argmin[0]}{scan.argmin[1]:+d}   "
              f"{roots[0]:+.4f} {roots[1]:+.4f}    {sp.decay_exponent(scan.gamma0):+.4f}   "
              + " ".join(f"{x:+.3f}" for x in windows))
    print("\ndiagonal modes, gamma0 - 2 against weight:")
    for w in (2, 4, 8, 16, 32):
        g = sp.diagonal_gamma0(mdl.ModelParams(w))
        print(f"  {w:>3}: {g - 2:.6f}   (times weight: {(g - 2) * w:.4f})")


if __name__ == "__main__":
    main()
