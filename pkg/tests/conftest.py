import pytest

from aoiviol.dists import Deterministic, Erlang, Exponential, ShiftedExponential
from aoiviol.sample_path import Discipline, SystemSpec, simulate

SE_MEAN1 = ShiftedExponential.with_mean(0.11, 1.0)


@pytest.fixture(scope="session")
def mm_path():
    """M/M/1/1, lambda = mu = 1, 10^5 peaks."""
    return simulate(SystemSpec(Discipline.GG11, Exponential(1.0), Exponential(1.0)), 100_000, seed=101)


@pytest.fixture(scope="session")
def dd_path():
    """D/D/1/1 with Z = 1, X = 0.4."""
    return simulate(SystemSpec(Discipline.GG11, Deterministic(0.4), Deterministic(1.0)), 1000, seed=0)


@pytest.fixture(scope="session")
def paths():
    """A small zoo of paths covering every discipline and law family."""
    specs = {
        "mm11": SystemSpec(Discipline.GG11, Exponential(1.0), Exponential(0.8)),
        "dse11": SystemSpec(Discipline.GG11, SE_MEAN1, Deterministic(0.5)),
        "erd11": SystemSpec(Discipline.GG11, Deterministic(1.0), Erlang(2, 1.2)),
        "mm12": SystemSpec(Discipline.GG12STAR, Exponential(1.0), Exponential(1.5)),
        "dse12": SystemSpec(Discipline.GG12STAR, SE_MEAN1, Deterministic(0.7)),
        "erd12": SystemSpec(Discipline.GG12STAR, Deterministic(1.0), Erlang(2, 2.0)),
        "zw": SystemSpec(Discipline.ZERO_WAIT, Exponential(1.0)),
    }
    return {k: simulate(s, 20_000, seed=i, record_events=True) for i, (k, s) in enumerate(specs.items())}


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion; printed in the run summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
