from pathlib import Path

import pytest

import tscert

MODEL_PATH = Path(__file__).resolve().parent.parent / "models" / "ex1.json"


@pytest.fixture(scope="session")
def bundle():
    return tscert.load_bundle(MODEL_PATH)


@pytest.fixture(scope="session")
def model(bundle):
    return bundle.model


@pytest.fixture(scope="session")
def spec(bundle):
    return bundle.memberships


@pytest.fixture(scope="session")
def jac(bundle):
    return bundle.jacobian


def solve_certificate(model, method, lam, jac=None):
    """Solve one condition and wrap the result as a certificate."""
    problem = tscert.build_condition(model, method, lam, jac)
    outcome = tscert.solve_feasibility(problem)
    assert outcome.feasible, f"{method.label()} at lambda={lam} did not certify"
    return tscert.Certificate(method, lam, min(outcome.margins), outcome.assignment)


@pytest.fixture(scope="session")
def quad_cert(model):
    return solve_certificate(model, tscert.Method("quadratic"), 3.0)


@pytest.fixture(scope="session")
def slack_cert(model, jac):
    return solve_certificate(model, tscert.Method("augmented-slack"), 3.0, jac)
