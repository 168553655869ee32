import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coprime_opa import ElementPattern  # noqa: E402


@pytest.fixture
def paper_element():
    return ElementPattern.gaussian(23.0, 16.3, 7.4)
