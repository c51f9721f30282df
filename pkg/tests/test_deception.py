import io
import random
from collections import Counter

from hypothesis import given
from hypothesis import strategies as st

from conftest import make_event
from ctf_attribution.deception import (
    Role, annotate, summarize, write_fig1_csv, write_fig2_csv, write_summary_csv,
)

from oracles import brute_force_roles

R = Role


def four_events():
    return [make_event("A", "X", 1, "h"), make_event("A", "X", 2, "h"),
            make_event("B", "X", 3, "h"), make_event("B", "X", 4, "h")]


def test_four_event_example():
    roles = [ann.role for _, ann in annotate(four_events())]
    assert roles == [R.ORIGINAL, R.NON_DECEPTIVE_DUPLICATE, R.DECEPTIVE_FIRST, R.DECEPTIVE_DUPLICATE]
    assert all(ann.initiator == "A" and ann.group_key == ("X", "68" + "0" * 30) for _, ann in annotate(four_events()))


def test_four_event_summary():
    row = summarize(annotate(four_events())).targets["X"]
    assert (row.unique_payloads, row.unique_deceptive_payloads, row.total_attacks,
            row.nondeceptive_duplicates, row.deceptive_duplicates) == (1, 1, 4, 1, 1)
    assert row.unique_attacker_payloads == 2


def test_groups_are_scoped_per_target():
    events = [make_event("A", "X", 1, "h"), make_event("B", "Y", 0, "h"), make_event("B", "X", 2, "h")]
    roles = [ann.role for _, ann in annotate(events)]
    assert roles == [R.ORIGINAL, R.ORIGINAL, R.DECEPTIVE_FIRST]


def test_ties_go_to_smaller_team_name():
    events = [make_event("B", "X", 5, "h"), make_event("A", "X", 5, "h")]
    roles = [ann.role for _, ann in annotate(events)]
    assert roles == [R.DECEPTIVE_FIRST, R.ORIGINAL]


def test_input_order_preserved_and_empty():
    assert annotate([]) == []
    events = list(reversed(four_events()))
    assert [ev for ev, _ in annotate(events)] == events


def test_csv_writers():
    summary = summarize(annotate(four_events() + [make_event("C", "Y", 0, "g")]))
    for writer, header in [(write_fig1_csv, "to_team,unique_payloads"),
                           (write_fig2_csv, "to_team,total_attacks"),
                           (write_summary_csv, "to_team,unique_payloads")]:
        out = io.StringIO()
        writer(summary, out)
        lines = out.getvalue().splitlines()
        assert lines[0].startswith(header)
        assert [line.split(",")[0] for line in lines[1:]] == ["X", "Y"]
    totals = summary.totals()
    assert totals.total_attacks == 5 and totals.unique_payloads == 2


event_lists = st.lists(
    st.builds(lambda f, to, t, h: make_event(f, to, t, h),
              st.sampled_from("ABCD"), st.sampled_from(["X", "Y"]), st.integers(0, 6), st.sampled_from("hgk")),
    max_size=25,
).map(lambda evs: [e for e in evs if e.from_team != e.to_team])


@given(event_lists)
def test_matches_brute_force(events):
    assert [ann.role for _, ann in annotate(events)] == brute_force_roles(events)


@given(event_lists, st.randoms(use_true_random=False))
def test_role_counts_permutation_invariant(events, rnd):
    shuffled = list(events)
    rnd.shuffle(shuffled)
    count = lambda evs: Counter((ev.from_team, ev.to_team, ev.time, ev.payload_hash, ann.role)  # noqa: E731
                                 for ev, ann in annotate(evs))
    assert count(events) == count(shuffled)


@given(event_lists)
def test_group_invariants(events):
    by_group = {}
    for ev, ann in annotate(events):
        by_group.setdefault(ann.group_key, []).append((ev, ann))
        assert (ann.role in (R.ORIGINAL, R.NON_DECEPTIVE_DUPLICATE)) == (ev.from_team == ann.initiator)
        assert ann.role.deceptive == (ev.from_team != ann.initiator)
    for members in by_group.values():
        roles = Counter(ann.role for _, ann in members)
        teams = {ev.from_team for ev, _ in members}
        assert roles[R.ORIGINAL] == 1
        assert roles[R.DECEPTIVE_FIRST] == len(teams) - 1


def test_large_random_corpus_against_oracle():
    rnd = random.Random(11)
    events = [make_event(rnd.choice("ABCDEF"), "Z", rnd.randint(0, 50), str(rnd.randint(0, 30)))
              for _ in range(600)]
    assert [ann.role for _, ann in annotate(events)] == brute_force_roles(events)
