"""Lambda_alpha and lambda_alpha across alpha for a non-homogeneous G.

For a pure power the quotient does not depend on alpha; for the log-perturbed
family it does.  Prints one row per alpha with the comparability band.

    python3 scripts/eigen_alpha_trend.py [--n 32] [--s 0.75]
"""

import argparse

from orlicz_hardy.eigen import DiscreteSpace, check_lower_bounds, minimize_quotient
from orlicz_hardy.young import YoungFunction


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--s", type=float, default=0.75)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.01, 0.1, 1.0, 10.0, 100.0])
    ap.add_argument("--restarts", type=int, default=3)
    ap.add_argument("--weighted", action="store_true")
    args = ap.parse_args()

    space = DiscreteSpace(1.0, 2.0, args.n)
    print("G,alpha,Lambda_alpha,lambda_alpha,lambda/Lambda,hardy_bound,all_bounds_hold")
    for F in (YoungFunction.power(2), YoungFunction.log_perturbed(1, 2, 1)):
        for alpha in args.alphas:
            sol = minimize_quotient(space, F, args.s, alpha, restarts=args.restarts,
                                    weighted=args.weighted)
            checks = check_lower_bounds(sol, F)
            print(f"{F.label},{alpha:g},{sol.Lambda_alpha:.8g},{sol.lambda_alpha:.8g},"
                  f"{sol.lambda_alpha / sol.Lambda_alpha:.6f},{checks[0].lhs:.6g},"
                  f"{all(c.passed for c in checks)}")


if __name__ == "__main__":
    main()
