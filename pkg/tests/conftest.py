import pytest

# criterion id -> (title, passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict = {}

CRITERIA = {
    "1": "arcsine law histogram",
    "2a": "noise model PDF: total variation distance",
    "2b": "noise model PDF: min-entropy agreement",
    "3": "quantum min-entropy, closed form vs brute force",
    "4": "XOR extractor vs naive reference",
    "5": "Toeplitz extractor vs GF(2) oracle",
    "6": "autocorrelation of extracted output",
    "7": "statistical battery, N=100 x 1e6 bits",
    "8": "test fidelity on worked examples",
    "9": "rate accounting",
    "10": "throughput",
}


@pytest.fixture
def record():
    def _record(cid, passed, detail):
        ACCEPTANCE[cid] = (CRITERIA[cid], bool(passed), detail)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid, title in CRITERIA.items():
        if cid in ACCEPTANCE:
            _, ok, detail = ACCEPTANCE[cid]
            tr.write_line(f"[{'PASS' if ok else 'FAIL'}] {cid:>3}  {title}: {detail}")
        else:
            tr.write_line(f"[----] {cid:>3}  {title}: not run")
