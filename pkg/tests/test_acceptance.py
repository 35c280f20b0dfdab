import pytest

from gravodiff import acceptance


@pytest.mark.parametrize(
    "name", [name for name, _ in acceptance.CRITERIA], ids=lambda n: n
)
def test_acceptance_criterion(name):
    result = acceptance.run_criterion(name)
    assert result.passed, f"{name}: {result.detail}"
