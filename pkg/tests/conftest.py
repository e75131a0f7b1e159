import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from _utils import demo_graph, demo_table


@pytest.fixture(scope="session")
def demo():
    """The four-region worked example: (table, graph)."""
    return demo_table(), demo_graph()
