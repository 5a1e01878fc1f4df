def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "known_published_gap: cells implemented as specified but not reproducible "
        "from the published algorithm description; expected to fail honestly",
    )
