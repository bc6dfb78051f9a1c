import pytest

from seamsim import apply_delta, parse_delta, parse_model

# The worked example model: a car-insurance slice with two components
# joined by a local connection and a shared database.
CAR_INSURANCE_MODEL = """\
component "Car Insurance" {
  useCase "Create Car Contract"
  serviceCandidate createCarContract [
    transactionBehavior = REQUIRED
  ]
  entityType CarContract
}
component "Contracts" {
  serviceCandidate createContract
}
local "Car Insurance" -> "Contracts"
dataStore "Shared Database" {
  entityType CarContract
}
"""

# The matching scenario: split the contracts component out over a remote
# connection with 10 units of overhead and no transaction propagation.
SPLIT_CONTRACTS_SCENARIO = """\
component "Contracts" {
  serviceCandidate createContract [
    transactionBehavior = REQUIRED
  ]
}
remote "Car Insurance" -> "Contracts" [
  overhead = 10
]
"""


@pytest.fixture(scope="session")
def car_model():
    result = parse_model(CAR_INSURANCE_MODEL)
    assert result.ok, [str(d) for d in result.diagnostics]
    return result.value


@pytest.fixture(scope="session")
def split_delta():
    result = parse_delta(SPLIT_CONTRACTS_SCENARIO)
    assert result.ok, [str(d) for d in result.diagnostics]
    return result.value


@pytest.fixture(scope="session")
def merged_model(car_model, split_delta):
    return apply_delta(car_model, split_delta)
