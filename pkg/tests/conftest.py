import copy
import json
from pathlib import Path

import pytest

from hap_link.scenario import load_scenario
from hap_link.tables import TABLE_DIR_ENV, load_tables, packaged_table_dir

TABLE1_PATH = packaged_table_dir() / "table1.json"
TABLE1 = json.loads(TABLE1_PATH.read_text(encoding="utf-8"))

SUB_SATELLITE = {"latitudeDeg": 0.04, "longitudeDeg": -4.95, "altitudeM": 20000.0}


@pytest.fixture(autouse=True)
def _no_table_dir_override(monkeypatch):
    monkeypatch.delenv(TABLE_DIR_ENV, raising=False)
    monkeypatch.setattr("hap_link.tables.load_dotenv", lambda *a, **kw: False)


@pytest.fixture(scope="session")
def tables():
    return load_tables()


@pytest.fixture
def table1_data():
    return copy.deepcopy(TABLE1)


@pytest.fixture
def table1():
    return load_scenario(json.dumps(TABLE1))


@pytest.fixture
def short_hop_data():
    """Reference link, HAP flying roughly 6.7 km north from the sub-satellite point."""
    data = copy.deepcopy(TABLE1)
    data["hap"]["pois"] = [
        {**SUB_SATELLITE, "label": "start"},
        {**SUB_SATELLITE, "latitudeDeg": 0.1, "label": "end"},
    ]
    return data


def write_scenario(directory: Path, data: dict, name: str = "scenario.json") -> Path:
    path = directory / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return path
