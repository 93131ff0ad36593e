import pytest

from cyclecalc.groebner import set_audit


@pytest.fixture(scope="session", autouse=True)
def _record_groebner_bases():
    """Record every reduced basis the suite computes for the post-hoc audit."""
    set_audit(True)
    yield
