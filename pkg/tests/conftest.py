import random

from hypothesis import strategies as st

from reserved_seats.model import ADVANTAGED, DISADVANTAGED, Instance


def random_instance(rng: random.Random, max_students=8, max_schools=4, max_quota=3, universal=None):
    """Small market with random groups, partial lists, quotas and reserves.

    Half the markets share one priority order unless ``universal`` is given.
    """
    n = rng.randint(1, max_students)
    m = rng.randint(1, max_schools)
    groups = [rng.choice([ADVANTAGED, DISADVANTAGED]) for _ in range(n)]
    prefs = [rng.sample(range(m), rng.randint(0, m)) for _ in range(n)]
    quotas = [rng.randint(0, max_quota) for _ in range(m)]
    if universal is None:
        universal = rng.random() < 0.5
    if universal:
        priority = rng.sample(range(n), n)
    else:
        priority = [rng.sample(range(n), n) for _ in range(m)]
    q_r = [rng.randint(0, q) for q in quotas]
    return Instance.build(groups, prefs, quotas, priority), q_r


@st.composite
def markets(draw, max_students=6, max_schools=3, max_quota=3):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_instance(random.Random(seed), max_students, max_schools, max_quota)


# (criterion, passed, detail) rows filled by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE, key=lambda r: int(r[0].split()[0])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {name}: {detail}")
