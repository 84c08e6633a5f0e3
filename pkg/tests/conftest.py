import json
from pathlib import Path

import numpy as np
import pytest

from sharpbound.linalg import HermitianMatrix
from sharpbound.maps import haar_unitary

ROOT = Path(__file__).resolve().parent.parent
SCHEMA_PATH = ROOT / "docs" / "report_schema.json"


def random_pd(n, rng, lo=0.5, hi=4.0):
    lam = rng.uniform(lo, hi, size=n)
    U = haar_unitary(n, rng)
    return HermitianMatrix((U * lam) @ U.conj().T)


def random_hermitian(n, rng):
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (X + X.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def schema():
    return json.loads(SCHEMA_PATH.read_text())


def validate(schema, obj, definition):
    import jsonschema

    sub = {"$ref": f"#/$defs/{definition}", "$defs": schema["$defs"]}
    jsonschema.validate(obj, sub)


# Acceptance criteria register one line each here; printed at the end of the run.
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=str):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
