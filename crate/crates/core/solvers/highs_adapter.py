#!/usr/bin/env python3
"""Solve an LP-format MILP with HiGHS and write the solution file.

Usage: highs_adapter.py MODEL.lp SOLUTION [--time-limit S] [--format json|pairs]

The solution file carries the HiGHS model status, the objective and one value
per column. In "json" format it is {"status", "objective", "values": {name: v}};
in "pairs" format the first two lines are "status <text>" and
"objective <value>", followed by "<name> <value>" lines.

After a MIP solve the integer columns are rounded, fixed, and the remaining
LP is re-solved so that continuous values are consistent with exactly
integral binaries rather than with binaries that are only integral up to the
solver's tolerance (which big-M rows would otherwise amplify).
"""

import argparse
import json
import math
import sys

import highspy


def polish(h, values, integrality):
    """Re-solves the LP with integer columns fixed; returns the new values or None."""
    lp = h.getLp()
    fixed = highspy.Highs()
    fixed.setOptionValue("output_flag", False)
    fixed.setOptionValue("primal_feasibility_tolerance", 1e-10)
    fixed.passModel(lp)
    for j, kind in enumerate(integrality):
        if kind != highspy.HighsVarType.kContinuous:
            v = float(round(values[j]))
            fixed.changeColIntegrality(j, highspy.HighsVarType.kContinuous)
            fixed.changeColBounds(j, v, v)
    fixed.run()
    if fixed.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        return None
    return list(fixed.getSolution().col_value), fixed.getInfo().objective_function_value


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("lp")
    ap.add_argument("sol")
    ap.add_argument("--time-limit", type=float, default=math.inf)
    ap.add_argument("--format", choices=["json", "pairs"], default="json")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", args.threads)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 0.0)
    h.setOptionValue("mip_feasibility_tolerance", 1e-9)
    h.setOptionValue("primal_feasibility_tolerance", 1e-9)
    if math.isfinite(args.time_limit):
        h.setOptionValue("time_limit", max(args.time_limit, 1e-6))
    if h.readModel(args.lp) != highspy.HighsStatus.kOk:
        print(f"cannot read {args.lp}", file=sys.stderr)
        return 1
    h.run()

    status = h.modelStatusToString(h.getModelStatus())
    info = h.getInfo()
    lp = h.getLp()
    names = [lp.col_names_[j] for j in range(lp.num_col_)]
    values = None
    objective = None
    if info.primal_solution_status == 2:  # feasible
        values = list(h.getSolution().col_value)
        objective = info.objective_function_value
        polished = polish(h, values, list(lp.integrality_) or [])
        if polished is not None and polished[1] <= objective + 1e-9 * max(1.0, abs(objective)):
            values, objective = polished

    if args.format == "json":
        doc = {"status": status, "objective": objective}
        doc["values"] = {} if values is None else dict(zip(names, values))
        with open(args.sol, "w") as f:
            json.dump(doc, f)
    else:
        with open(args.sol, "w") as f:
            f.write(f"status {status}\n")
            f.write(f"objective {'none' if objective is None else repr(objective)}\n")
            for name, v in zip(names, values or []):
                f.write(f"{name} {v!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
