import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from groupstage.standings import (
    PointsSystem,
    QualRule,
    QualStatus,
    TeamLine,
    apply_hypothetical,
    compute_table,
    qual_status,
)
from oracles import status_oracle

GIJON_RESULTS = [
    ("Algeria", "West Germany", 2, 1),
    ("Austria", "Chile", 1, 0),
    ("West Germany", "Chile", 4, 1),
    ("Austria", "Algeria", 2, 0),
    ("Algeria", "Chile", 3, 2),
]


def test_gijon_table_before_last_game():
    table = compute_table(GIJON_RESULTS, PointsSystem(2, 1))
    got = {l.team: (l.points, l.goal_diff, l.played) for l in table}
    assert got == {
        "Austria": (4, 3, 2),
        "Algeria": (4, 0, 3),
        "West Germany": (2, 2, 2),
        "Chile": (0, -5, 3),
    }
    assert [l.team for l in table] == ["Austria", "Algeria", "West Germany", "Chile"]


@pytest.mark.parametrize("d, wg, au", [
    (-2, QualStatus.NONE, QualStatus.CLEAN),
    (0, QualStatus.NONE, QualStatus.CLEAN),
    (1, QualStatus.CLEAN, QualStatus.CLEAN),
    (2, QualStatus.CLEAN, QualStatus.CLEAN),
    (3, QualStatus.CLEAN, QualStatus.SHARED),
    (4, QualStatus.CLEAN, QualStatus.NONE),
])
def test_gijon_outcomes(d, wg, au):
    ps = PointsSystem(2, 1)
    table = apply_hypothetical(compute_table(GIJON_RESULTS, ps), ("West Germany", "Austria"), d, ps)
    assert qual_status(table, "West Germany", QualRule(2)) == wg
    assert qual_status(table, "Austria", QualRule(2)) == au


def test_compute_table_rejects_bad_fixtures():
    ps = PointsSystem()
    with pytest.raises(ValueError, match="cannot play itself"):
        compute_table([("A", "A", 1, 0)], ps)
    with pytest.raises(ValueError, match="duplicate fixture"):
        compute_table([("A", "B", 1, 0), ("B", "A", 0, 0)], ps)


def test_points_system_validation():
    with pytest.raises(ValueError):
        PointsSystem(1, 1)
    with pytest.raises(ValueError):
        PointsSystem(3, 1, 1)
    assert PointsSystem.parse("3,2") == PointsSystem(3, 2)


fixtures = st.lists(
    st.tuples(st.sampled_from("ABCDE"), st.sampled_from("ABCDE"), st.integers(0, 6), st.integers(0, 6)),
    max_size=10,
).map(lambda rs: list({frozenset(r[:2]): r for r in rs if r[0] != r[1]}.values()))


@given(fixtures, st.sampled_from([PointsSystem(3, 1), PointsSystem(2, 1), PointsSystem(3, 2)]))
def test_conservation(results, ps):
    table = compute_table(results, ps)
    assert sum(l.goal_diff for l in table) == 0
    assert sum(l.played for l in table) == 2 * len(results)
    draws = sum(1 for r in results if r[2] == r[3])
    assert sum(l.points for l in table) == ps.win_pts * (len(results) - draws) + 2 * ps.draw_pts * draws
    keys = [l.key for l in table]
    assert keys == sorted(keys, reverse=True)


def random_table(rng, n=4):
    return tuple(TeamLine(f"T{k}", rng.randint(0, 7), rng.randint(-3, 3), 2) for k in range(n))


def random_pool(rng, size=11):
    return tuple((rng.randint(2, 5), rng.randint(-2, 2)) for _ in range(size))


def test_status_matches_oracle_on_random_tables():
    rng = random.Random(7)
    for _ in range(1000):
        table = random_table(rng)
        team = rng.choice(table).team
        q = rng.choice([1, 2, 3])
        assert qual_status(table, team, QualRule(q)) == status_oracle(table, team, q)


def test_status_with_pool_matches_oracle():
    rng = random.Random(8)
    for _ in range(500):
        table = tuple(TeamLine(f"T{k}", rng.randint(2, 5), rng.randint(-2, 2), 2) for k in range(4))
        team = rng.choice(table).team
        pool = random_pool(rng)
        slots = rng.choice([4, 8])
        got = qual_status(table, team, QualRule(2, pool, slots))
        assert got == status_oracle(table, team, 2, pool, slots)


def test_pool_clean_with_seven_better_thirds():
    # alone in third place, seven thirds strictly better, three worse: slot 8 is ours
    table = (TeamLine("A", 9, 5), TeamLine("B", 6, 2), TeamLine("C", 4, 0), TeamLine("D", 0, -7))
    pool = ((6, 3),) * 7 + ((3, -1),) * 4
    assert qual_status(table, "C", QualRule(2, pool, 8)) == QualStatus.CLEAN
    # an eighth better third pushes us out
    pool = ((6, 3),) * 8 + ((3, -1),) * 3
    assert qual_status(table, "C", QualRule(2, pool, 8)) == QualStatus.NONE
    # tied with the eighth: qualification hinges on an unresolved tie
    pool = ((6, 3),) * 7 + ((4, 0),) + ((3, -1),) * 3
    assert qual_status(table, "C", QualRule(2, pool, 8)) == QualStatus.SHARED


def test_status_order():
    assert QualStatus.NONE < QualStatus.SHARED < QualStatus.CLEAN


def test_unknown_team():
    with pytest.raises(KeyError):
        qual_status((TeamLine("A"),), "B", QualRule())
