"""Hardy constants over a grid of s p- values for a few Young functions."""

from orlicz_hardy.hardy import compute_constants
from orlicz_hardy.young import YoungFunction

FUNCS = [YoungFunction.power(1.5), YoungFunction.power(2), YoungFunction.power(3),
         YoungFunction.log_perturbed(1, 2, 1)]
TARGETS = [1.01, 1.05, 1.2, 1.5, 2.0]

if __name__ == "__main__":
    print(f"{'G':<32} {'s':>7} {'c_H':>12} {'C_H':>12} {'thm':>9} {'cor':>9}")
    for F in FUNCS:
        for t in TARGETS:
            s = t / F.p_minus
            if not s < 1:
                continue
            k = compute_constants(F, s)
            print(f"{F.label:<32} {s:7.4f} {k.c_H:12.5g} {k.C_H:12.5g} "
                  f"{k.norm_const_thm:9.4g} {k.norm_const_cor:9.4g}")
