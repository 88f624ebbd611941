def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: full-size acceptance criteria (slow)")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[cid].line())
