import json
from pathlib import Path

import pytest

from cgramap.model import CgraArch, Dfg, parse_dfg

DATA = Path(__file__).resolve().parent.parent / "data"

# edge list chosen so that ASAP/ALAP reproduce the reference running-example tables
RUNNING_EDGES = [(1, 10), (2, 9), (3, 5), (4, 7), (5, 6), (6, 8), (7, 8), (8, 9), (10, 11)]


@pytest.fixture
def running() -> Dfg:
    return parse_dfg((DATA / "running_example.dfg.json").read_text())


@pytest.fixture
def mesh2() -> CgraArch:
    return CgraArch(2, 2)


@pytest.fixture
def write_json(tmp_path):
    def write(name, obj):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)

    return write
