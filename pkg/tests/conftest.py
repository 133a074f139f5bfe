import json
from pathlib import Path

import pytest

from glshrink.families import make_family

DATA_DIR = Path(__file__).resolve().parent / "data"

# One representative instance per registered family name; the same roster
# is used by the golden-data generator.
FAMILY_ROSTER = [
    ("horseshoe", {}),
    ("strawderman-berger", {}),
    ("tpbn", {"a_shape": 0.6, "b_shape": 1.0}),
    ("neg", {"shape": 0.5, "scale": 1.0}),
    ("inverse-gamma", {"shape": 0.5, "scale": 1.0}),
    ("half-t", {"nu": 1.5}),
    ("gdp", {"alpha": 1.0, "eta": 1.0}),
]


@pytest.fixture(scope="session")
def horseshoe():
    return make_family("horseshoe")


@pytest.fixture(scope="session", params=FAMILY_ROSTER, ids=lambda fk: fk[0])
def roster_family(request):
    name, kwargs = request.param
    return make_family(name, **kwargs)


def load_data(name: str):
    path = DATA_DIR / name
    if not path.is_file():
        pytest.skip(f"golden data {name} missing; run python tests/make_golden.py")
    return json.loads(path.read_text())


@pytest.fixture(scope="session")
def frozen_values():
    return load_data("frozen_values.json")


@pytest.fixture(scope="session")
def kappa_oracle():
    return load_data("kappa_oracle.json")


@pytest.fixture(scope="session")
def slack_calibration():
    return load_data("slack_calibration.json")
