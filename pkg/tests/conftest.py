import itertools
import random

import pytest

from bnnbdd.bdd import BddManager
from bnnbdd.model import InputSample


def random_formula(rng, nvars, depth=4):
    """Random expression tree as nested tuples."""
    if depth == 0 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.05:
            return ("const", rng.random() < 0.5)
        return ("var", rng.randrange(nvars))
    op = rng.choice(["and", "or", "xor", "xnor", "not", "ite"])
    if op == "not":
        return ("not", random_formula(rng, nvars, depth - 1))
    if op == "ite":
        return ("ite",) + tuple(random_formula(rng, nvars, depth - 1) for _ in range(3))
    return (op, random_formula(rng, nvars, depth - 1), random_formula(rng, nvars, depth - 1))


def formula_eval(f, x):
    tag = f[0]
    if tag == "const":
        return f[1]
    if tag == "var":
        return bool(x[f[1]])
    if tag == "not":
        return not formula_eval(f[1], x)
    if tag == "ite":
        return formula_eval(f[2], x) if formula_eval(f[1], x) else formula_eval(f[3], x)
    a, b = formula_eval(f[1], x), formula_eval(f[2], x)
    return {"and": a and b, "or": a or b, "xor": a != b, "xnor": a == b}[tag]


def formula_bdd(mgr, f):
    tag = f[0]
    if tag == "const":
        return mgr.mk_const(f[1])
    if tag == "var":
        return mgr.mk_var(f[1])
    if tag == "not":
        return ~formula_bdd(mgr, f[1])
    if tag == "ite":
        return mgr.ite(*(formula_bdd(mgr, g) for g in f[1:]))
    return mgr.apply(tag, formula_bdd(mgr, f[1]), formula_bdd(mgr, f[2]))


def truth_table(f, nvars):
    return tuple(formula_eval(f, x) for x in itertools.product((0, 1), repeat=nvars))


def all_points(n):
    return list(itertools.product((0, 1), repeat=n))


def random_sample(rng, n):
    return InputSample(tuple(rng.randint(0, 1) for _ in range(n)))


@pytest.fixture
def mgr8():
    return BddManager(8)


# ----------------------------------------------------------------------
# acceptance reporting

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            _CRITERIA[item.nodeid] = {"id": mark.args[0], "title": mark.args[1],
                                      "status": "NOT RUN", "detail": ""}


def pytest_runtest_logreport(report):
    entry = _CRITERIA.get(report.nodeid)
    if entry is None:
        return
    failed = report.failed
    if report.when == "call" or failed:
        entry["status"] = "FAIL" if failed else "PASS"
        detail = dict(report.user_properties).get("detail")
        if detail:
            entry["detail"] = detail


def pytest_terminal_summary(terminalreporter):
    ran = [e for e in _CRITERIA.values() if e["status"] != "NOT RUN"]
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for e in sorted(ran, key=lambda e: int(e["id"][2:])):
        extra = f" ({e['detail']})" if e["detail"] else ""
        terminalreporter.write_line(f"{e['id']} {e['status']}: {e['title']}{extra}")
