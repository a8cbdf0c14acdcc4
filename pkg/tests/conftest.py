import pytest

from review_pricing import ExPostDistribution, ProblemInstance


def make_instance(theta, q, T=1000, kind="bernoulli"):
    if kind == "bernoulli":
        dists = tuple(ExPostDistribution.bernoulli(t) for t in theta)
    else:
        dists = tuple(ExPostDistribution.point(t) for t in theta)
    return ProblemInstance(theta=tuple(theta), q=tuple(q), value_dists=dists, horizon_T=T)


@pytest.fixture
def three_types():
    return make_instance([0.3, 0.6, 0.9], [0.2, 0.3, 0.5])


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
