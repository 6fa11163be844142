import pytest

from excitasim import (
    ComplexAdmittance,
    FuzzyPIConfig,
    GeneratorParams,
    LineParams,
    TunerConfig,
    admittances_from_line_and_load,
    compare_adaptive,
    paper_scenario,
)

_RESULTS_KEY = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def params():
    return GeneratorParams()


@pytest.fixture(scope="session")
def net():
    return admittances_from_line_and_load(LineParams().admittance(), ComplexAdmittance())


@pytest.fixture(scope="session")
def open_net():
    return admittances_from_line_and_load(ComplexAdmittance(), ComplexAdmittance())


@pytest.fixture(scope="session")
def paper_comparison(params, net):
    """Adaptive and fixed-c runs of the 80 s study case (shared, ~6 s)."""
    return compare_adaptive(paper_scenario(), params, net, FuzzyPIConfig(), TunerConfig())


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion for the terminal summary."""
    results = request.config.stash.setdefault(_RESULTS_KEY, [])

    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        results.append((number, title, bool(ok), detail))
        assert ok, f"criterion {number} ({title}) failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS_KEY, [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(results, key=lambda r: r[0]):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title}: {detail}")
