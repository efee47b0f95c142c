from functools import lru_cache

import pytest

from fsdim.measures import Alphabet, ProbMeasure
from fsdim.seqgen import GenSpec, generate

BINARY = Alphabet.default(2)
TERNARY = Alphabet.default(3)

UNIFORM2 = ProbMeasure.uniform(2)
SKEW = ProbMeasure.of(["3/4", "1/4"])
UNIFORM3 = ProbMeasure.uniform(3)
TRI = ProbMeasure.of(["1/2", "1/4", "1/4"])

SUITE_MEASURES = {"uniform2": UNIFORM2, "skew": SKEW, "uniform3": UNIFORM3, "tri": TRI}


@lru_cache(maxsize=None)
def sample(name: str, n: int, seed: int = 20240611):
    return generate(GenSpec(SUITE_MEASURES[name], n, seed))


@pytest.fixture
def measure_file(tmp_path):
    def write(measure, name="m.json"):
        import json
        path = tmp_path / name
        path.write_text(json.dumps(measure.to_dict()))
        return str(path)
    return write


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
