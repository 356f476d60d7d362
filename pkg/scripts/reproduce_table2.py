"""Solve the n=150, m=35 mask LP and compare the optimum with the published 0.05374227.

Either formulation can be run with the embedded solver. With --highs the
model goes through an MPS export and is solved by HiGHS instead.
"""

import argparse
import json
import logging
import os
import tempfile
import time

from ffopt.lp_solver import SolverConfig, solve, verify_mask_solution, write_mps
from ffopt.mask_lp import MaskProblem, build_model

PUBLISHED = {"onestep": 0.05374227, "twostep": 0.05374233}


def solve_with_highs(model):
    import highspy

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "model.mps")
        write_mps(model, path)
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.readModel(path)
        h.run()
        return h.modelStatusToString(h.getModelStatus()), h.getInfo().objective_function_value


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=150)
    ap.add_argument("--m", type=int, default=35)
    ap.add_argument("--formulation", nargs="+", choices=("onestep", "twostep"), default=["onestep", "twostep"])
    ap.add_argument("--highs", action="store_true", help="solve the MPS export with HiGHS")
    ap.add_argument("--verbose", action="store_true")
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    p = MaskProblem(args.n, args.m)
    results = {}
    for form in args.formulation:
        model = build_model(p, form)
        t0 = time.perf_counter()
        if args.highs:
            status, obj = solve_with_highs(model)
            entry = {"status": status, "objective": obj}
        else:
            sol = solve(model, SolverConfig(verbose=args.verbose))
            entry = {"status": sol.status, "objective": sol.primal_objective, "iterations": sol.iterations}
            if sol.status == "optimal":
                entry["report"] = verify_mask_solution(p, sol).as_dict()
        entry["seconds"] = time.perf_counter() - t0
        entry["published"] = PUBLISHED.get(form) if (args.n, args.m) == (150, 35) else None
        results[form] = entry
        print(f"{form}: {entry['status']} objective {entry['objective']:.8f} "
              f"published {entry['published']} ({entry['seconds']:.0f}s)")
    os.makedirs(args.out, exist_ok=True)
    tag = "highs" if args.highs else "embedded"
    with open(os.path.join(args.out, f"table2_n{args.n}_{tag}.json"), "w") as fh:
        json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
