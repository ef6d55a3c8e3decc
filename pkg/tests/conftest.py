import pytest
from structlog.testing import capture_logs

from src.core.config import Environment, fixture_path, settings
from src.core.log import setup_logging
from src.ir import MachineConfig, UndefPolicy, ensure_ssa, parse_ir


@pytest.fixture(scope="session", autouse=True)
def quiet_logging():
    setup_logging(settings.model_copy(update={"environment": Environment.TESTING}))
    yield


def load_fixture(name: str):
    path = fixture_path(name)
    return parse_ir(path.read_text(), source=str(path))


@pytest.fixture
def paper_program():
    """The loop example before SSA construction."""
    return load_fixture("paper_example.mir")


@pytest.fixture
def paper_ssa():
    """The loop example in hand-written SSA form."""
    return ensure_ssa(load_fixture("paper_example_ssa.mir"))


@pytest.fixture
def paper_final():
    return load_fixture("paper_example_final.mir")


@pytest.fixture
def diamond_program():
    return load_fixture("diamond.mir")


@pytest.fixture
def memory_program():
    return load_fixture("memory.mir")


@pytest.fixture
def machine4():
    return MachineConfig(bit_width=4, undef_policy=UndefPolicy.fixed(0))


@pytest.fixture
def machine8():
    return MachineConfig(bit_width=8, undef_policy=UndefPolicy.fixed(0))


@pytest.fixture
def log_events():
    """Structured events emitted while the test runs."""
    with capture_logs() as events:
        yield events
