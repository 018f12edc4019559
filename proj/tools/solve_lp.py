#!/usr/bin/env python3
"""Mixed-integer solver CLI over LP-format model files.

Usage: solve_lp.py [--engine glpk|highs] MODEL.lp SOLUTION.sol

Reads a model in the CPLEX LP text format (Minimize / Subject To / Bounds /
Generals / Binaries sections), solves it with the selected open solver
engine and writes a solution file in the generic dialect:

    status optimal
    objective 26
    <variable> <value>        # nonzero variables only

Engines: glpk (GLPK via cvxopt, the default) and highs (HiGHS via scipy).
The METROCOVER_TIME_LIMIT environment variable, when set, bounds the solve
in seconds. Exit code 0 means a solution file was written (the status line
carries the outcome, including "infeasible"); nonzero means the solver
itself failed.
"""

import argparse
import os
import re
import sys

NAME_RE = re.compile(r"^[A-Za-z.%_][A-Za-z0-9.%_]*$")


class LpParseError(Exception):
    pass


def tokenize(text):
    # strip LP comments (backslash to end of line), then split; relational
    # operators and +/- are their own tokens, names keep ':' attached
    lines = []
    for line in text.splitlines():
        if "\\" in line:
            line = line[: line.index("\\")]
        lines.append(line)
    text = "\n".join(lines)
    text = text.replace("<=", " <= ").replace(">=", " >= ")
    tokens = []
    for raw in text.split():
        if raw in ("<", ">"):
            tokens.append(raw + "=")
        else:
            tokens.append(raw)
    return tokens


class Model:
    def __init__(self):
        self.sense = "min"
        self.objective = {}  # var -> coef
        self.constraints = []  # (name, {var: coef}, sense, rhs)
        self.lower = {}
        self.upper = {}
        self.integer = set()
        self.binary = set()
        self.order = []
        self._seen = set()

    def touch(self, name):
        if name not in self._seen:
            self._seen.add(name)
            self.order.append(name)


SECTION_STARTERS = {
    "minimize": "objective",
    "minimise": "objective",
    "min": "objective",
    "maximize": "objective-max",
    "maximise": "objective-max",
    "max": "objective-max",
    "subject": "constraints",
    "st": "constraints",
    "s.t.": "constraints",
    "bounds": "bounds",
    "bound": "bounds",
    "generals": "integers",
    "general": "integers",
    "integers": "integers",
    "integer": "integers",
    "binaries": "binaries",
    "binary": "binaries",
    "bin": "binaries",
    "end": "end",
}


def is_number(tok):
    try:
        float(tok)
        return True
    except ValueError:
        return False


def parse_lp(text):
    tokens = tokenize(text)
    model = Model()
    i = 0
    section = None

    def section_of(tok, nxt):
        low = tok.lower()
        if low in ("subject", "such") and nxt and nxt.lower() == "to":
            return "constraints", 2
        if low in SECTION_STARTERS and low not in ("subject",):
            return SECTION_STARTERS[low], 1
        return None, 0

    # linear expression: [label:] [+|-] [coef] name ...
    def parse_expression(stop_at_sense):
        terms = {}
        sign = 1.0
        coef = None
        nonlocal i
        while i < len(tokens):
            tok = tokens[i]
            sec, _ = section_of(tok, tokens[i + 1] if i + 1 < len(tokens) else None)
            if sec is not None and coef is None:
                break
            if stop_at_sense and tok in ("<=", ">=", "="):
                break
            if tok == "+":
                sign, coef = 1.0, coef
                i += 1
                continue
            if tok == "-":
                sign = -sign
                i += 1
                continue
            if is_number(tok):
                coef = (coef if coef is not None else 1.0) * float(tok)
                i += 1
                continue
            if NAME_RE.match(tok):
                value = sign * (coef if coef is not None else 1.0)
                terms[tok] = terms.get(tok, 0.0) + value
                model.touch(tok)
                sign, coef = 1.0, None
                i += 1
                continue
            raise LpParseError(f"unexpected token in expression: {tok!r}")
        return terms

    while i < len(tokens):
        tok = tokens[i]
        nxt = tokens[i + 1] if i + 1 < len(tokens) else None
        sec, eat = section_of(tok, nxt)
        if sec is not None:
            if sec == "end":
                break
            section = sec
            i += eat
            continue
        if section in ("objective", "objective-max"):
            if tok.endswith(":"):
                i += 1
                continue
            model.sense = "max" if section == "objective-max" else "min"
            model.objective = parse_expression(stop_at_sense=False)
        elif section == "constraints":
            name = f"c{len(model.constraints)}"
            if tok.endswith(":"):
                name = tok[:-1]
                i += 1
            terms = parse_expression(stop_at_sense=True)
            if i >= len(tokens) or tokens[i] not in ("<=", ">=", "="):
                raise LpParseError(f"constraint {name} has no relational operator")
            sense = tokens[i]
            i += 1
            if i >= len(tokens) or not is_number(tokens[i]):
                raise LpParseError(f"constraint {name} has no numeric right-hand side")
            rhs = float(tokens[i])
            i += 1
            model.constraints.append((name, terms, sense, rhs))
        elif section == "bounds":
            # forms: x <= u | x >= l | l <= x <= u | x = v | x free
            if nxt and nxt.lower() == "free" and NAME_RE.match(tok):
                model.lower[tok] = -INF
                model.touch(tok)
                i += 2
                continue
            if is_number(tok):
                lo = float(tok)
                if nxt != "<=":
                    raise LpParseError("malformed bound")
                name = tokens[i + 2]
                model.touch(name)
                model.lower[name] = lo
                i += 3
                if i + 1 < len(tokens) and tokens[i] == "<=" and is_number(tokens[i + 1]):
                    model.upper[name] = float(tokens[i + 1])
                    i += 2
                continue
            if not NAME_RE.match(tok):
                raise LpParseError(f"unexpected token in bounds: {tok!r}")
            model.touch(tok)
            if nxt in ("<=", ">=", "="):
                value = tokens[i + 2]
                if not is_number(value):
                    raise LpParseError(f"malformed bound for {tok}")
                v = float(value)
                if nxt == "<=":
                    model.upper[tok] = v
                elif nxt == ">=":
                    model.lower[tok] = v
                else:
                    model.lower[tok] = model.upper[tok] = v
                i += 3
                continue
            raise LpParseError(f"malformed bound near {tok!r}")
        elif section == "integers":
            if not NAME_RE.match(tok):
                raise LpParseError(f"unexpected token in Generals: {tok!r}")
            model.integer.add(tok)
            model.touch(tok)
            i += 1
        elif section == "binaries":
            if not NAME_RE.match(tok):
                raise LpParseError(f"unexpected token in Binaries: {tok!r}")
            model.binary.add(tok)
            model.touch(tok)
            i += 1
        else:
            raise LpParseError(f"token outside any section: {tok!r}")
    return model


INF = float("inf")


def variable_bounds(model, name):
    lo = model.lower.get(name, 0.0)
    hi = model.upper.get(name, INF)
    if name in model.binary:
        lo = max(lo, 0.0)
        hi = min(hi, 1.0)
    return lo, hi


def time_limit():
    raw = os.environ.get("METROCOVER_TIME_LIMIT", "")
    try:
        v = float(raw)
        return v if v > 0 else None
    except ValueError:
        return None


def solve_glpk(model):
    from cvxopt import matrix, spmatrix
    from cvxopt import glpk

    names = model.order
    index = {n: j for j, n in enumerate(names)}
    n = len(names)

    c = [0.0] * n
    for name, coef in model.objective.items():
        c[index[name]] = coef if model.sense == "min" else -coef

    gi, gj, gv, h = [], [], [], []
    ai, aj, av, b = [], [], [], []

    def add_ineq(terms, rhs):  # terms <= rhs
        row = len(h)
        for name, coef in terms:
            gi.append(row)
            gj.append(index[name])
            gv.append(coef)
        h.append(rhs)

    for name, terms, sense, rhs in model.constraints:
        items = list(terms.items())
        if sense == "<=":
            add_ineq(items, rhs)
        elif sense == ">=":
            add_ineq([(nm, -cf) for nm, cf in items], -rhs)
        else:
            row = len(b)
            for nm, cf in items:
                ai.append(row)
                aj.append(index[nm])
                av.append(cf)
            b.append(rhs)

    for j, name in enumerate(names):
        lo, hi = variable_bounds(model, name)
        if lo != -INF:
            add_ineq([(name, -1.0)], -lo)
        if hi != INF:
            add_ineq([(name, 1.0)], hi)

    G = spmatrix(gv, gi, gj, (len(h), n), "d")
    A = spmatrix(av, ai, aj, (len(b), n), "d")
    hm = matrix(h, (len(h), 1), "d") if h else matrix(0.0, (0, 1))
    bm = matrix(b, (len(b), 1), "d") if b else matrix(0.0, (0, 1))

    options = {"msg_lev": "GLP_MSG_OFF"}
    limit = time_limit()
    if limit is not None:
        options["tm_lim"] = max(1, int(limit * 1000))

    # this cvxopt build aborts on the B= argument, so binaries are modelled
    # as bounded integers
    integers = {index[nm] for nm in (model.integer | model.binary)}
    status, x = glpk.ilp(matrix(c, (n, 1), "d"), G, hm, A, bm, integers, set(),
                         options=options)

    if status == "optimal":
        out_status = "optimal"
    elif status in ("feasible", "undefined"):
        out_status = "feasible" if x is not None else "solver_error"
    elif "infeasible" in status:
        out_status = "infeasible"
    elif status == "unknown":
        out_status = "timeout" if limit is not None else "solver_error"
    else:
        out_status = "solver_error"
    values = None if x is None else {names[j]: x[j] for j in range(n)}
    return out_status, values


def solve_highs(model):
    import numpy as np
    from scipy import sparse
    from scipy.optimize import Bounds, LinearConstraint, milp

    names = model.order
    index = {n: j for j, n in enumerate(names)}
    n = len(names)

    c = np.zeros(n)
    for name, coef in model.objective.items():
        c[index[name]] = coef if model.sense == "min" else -coef

    rows, cols, vals, lo_row, hi_row = [], [], [], [], []
    for r, (name, terms, sense, rhs) in enumerate(model.constraints):
        for nm, cf in terms.items():
            rows.append(r)
            cols.append(index[nm])
            vals.append(cf)
        if sense == "<=":
            lo_row.append(-np.inf)
            hi_row.append(rhs)
        elif sense == ">=":
            lo_row.append(rhs)
            hi_row.append(np.inf)
        else:
            lo_row.append(rhs)
            hi_row.append(rhs)

    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    for j, name in enumerate(names):
        lo[j], hi[j] = variable_bounds(model, name)

    integrality = np.zeros(n)
    for nm in model.integer | model.binary:
        integrality[index[nm]] = 1

    options = {"presolve": True}
    limit = time_limit()
    if limit is not None:
        options["time_limit"] = limit

    a = sparse.csc_matrix((vals, (rows, cols)), shape=(len(model.constraints), n))
    res = milp(c, constraints=LinearConstraint(a, np.array(lo_row), np.array(hi_row)),
               integrality=integrality, bounds=Bounds(lo, hi), options=options)

    if res.status == 0:
        out_status = "optimal"
    elif res.status == 1:
        out_status = "timeout" if res.x is None else "feasible"
    elif res.status == 2:
        out_status = "infeasible"
    else:
        out_status = "solver_error"
    values = None if res.x is None else {names[j]: float(res.x[j]) for j in range(n)}
    return out_status, values


def format_value(v):
    r = round(v)
    if abs(v - r) < 1e-9:
        return str(int(r))
    return repr(v)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("model")
    ap.add_argument("solution")
    ap.add_argument("--engine", choices=("glpk", "highs"), default="glpk")
    args = ap.parse_args()

    with open(args.model, "r", encoding="utf-8") as f:
        model = parse_lp(f.read())

    if args.engine == "glpk":
        status, values = solve_glpk(model)
    else:
        status, values = solve_highs(model)

    lines = [f"status {status}"]
    if values is not None and status in ("optimal", "feasible"):
        sign = 1.0 if model.sense == "min" else -1.0
        objective = sign * sum(coef * values.get(name, 0.0)
                               for name, coef in model.objective.items())
        lines.append(f"objective {format_value(objective)}")
        for name in model.order:
            v = values.get(name, 0.0)
            if abs(v) > 1e-9:
                lines.append(f"{name} {format_value(v)}")

    with open(args.solution, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    return 0


if __name__ == "__main__":
    try:
        sys.exit(main())
    except LpParseError as e:
        print(f"LP parse error: {e}", file=sys.stderr)
        sys.exit(2)
