from pathlib import Path

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from agcolor.graph import build_graph, random_sparse

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def graphs(draw, max_n=24, max_delta=6, min_delta=1):
    """Small bounded-degree graphs from the deterministic generators."""
    n = draw(st.integers(2, max_n))
    delta = draw(st.integers(min_delta, max(min_delta, min(max_delta, n - 1))))
    seed = draw(st.integers(0, 10_000))
    kind = draw(st.sampled_from(["random-capped", "sparse", "path", "cycle"]))
    if kind == "sparse":
        return random_sparse(n, delta, seed, density=draw(st.floats(0.2, 1.0)))
    if kind in ("path", "cycle"):
        return build_graph(kind, n, max(delta, 2) if n > 2 else 1, seed)
    return build_graph(kind, n, delta, seed)


# one line per acceptance criterion, shown in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
