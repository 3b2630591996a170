import random

from hypothesis import given, settings, strategies as st

from drsax.modelcheck import SequentGen, find_countermodel, find_countermodel_guided, search_countermodel
from drsax.parser import parse_assertion, parse_program
from drsax.prover import ProverConfig, Status, entails
from drsax.syntax import Is, Top, Var

from conftest import CORPUS

ADD = parse_program((CORPUS / "pos" / "add.sax").read_text())
AXIOMS = ADD.signature().axioms


def A(text, scope=("x", "y", "z", "a", "u", "x'", "f")):
    return parse_assertion(text, ADD, scope)


def test_tag_disjointness():
    assert entails([Is("true", Var("x")), Is("false", Var("x"))], A("ff")).valid


def test_plus_axioms():
    v = entails([], A("plus(succ.zero.u, y) == succ.y"), AXIOMS)
    assert v.status is Status.VALID


def test_uninterpreted_is_unknown():
    assert entails([], A("is zero(plus(a, a))")).status is Status.UNKNOWN


def test_is_from_equation():
    assert entails([A("x == true.x'")], A("is true(x)")).valid


def test_refuted_without_quantifiers():
    v = entails([A("x == zero.u")], A("x == y"))
    assert v.status is Status.REFUTED and v.model


def test_universal_use_blocks_refutation():
    # with an axiom involved a failed search is only Unknown
    v = entails([], A("plus(x, y) == y"), AXIOMS)
    assert v.status is Status.UNKNOWN


def test_budget_is_respected():
    v = entails([], A("plus(succ.succ.succ.zero.u, y) == succ.succ.succ.y"), AXIOMS, ProverConfig(rounds=1))
    assert v.status is not Status.VALID
    v = entails([], A("plus(succ.succ.succ.zero.u, y) == succ.succ.succ.y"), AXIOMS, ProverConfig(rounds=6))
    assert v.valid


def test_implication_and_conjunction():
    assert entails([A("x == y /\\ y == z")], A("x == z")).valid
    assert entails([A("x == y => is zero(y)"), A("x == y")], A("is zero(x)")).valid
    assert entails([], A("x == y => y == x")).valid


def test_goal_universal_is_skolemized():
    assert entails([], A("forall w. w == w")).valid
    assert entails([], A("forall w. w == x")).status is not Status.VALID


# -- random ground sequents against a bounded finite-model oracle ----------

GEN = SequentGen()


def _sequents(n, seed):
    rng = random.Random(seed)
    return [GEN.sequent(rng) for _ in range(n)]


SEQUENTS = _sequents(1000, 0)


def test_soundness_against_finite_models():
    unsound = []
    for i, (hyps, goal) in enumerate(SEQUENTS):
        v = entails(hyps, goal)
        if v.status is Status.VALID:
            if find_countermodel(hyps, goal) is not None:
                unsound.append((i, "valid with a countermodel"))
        elif v.status is Status.REFUTED:
            cm, exhausted = search_countermodel(hyps, goal)
            if cm is None:
                unsound.append((i, "refuted without a countermodel" + ("" if exhausted else " (search capped)")))
    assert unsound == []


def test_valid_answers_survive_wider_search():
    for hyps, goal in SEQUENTS[:200]:
        if entails(hyps, goal).valid:
            cm, _ = find_countermodel_guided(hyps, goal, cap=2000)
            assert cm is None


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_monotonicity(seed, extra_seed):
    rng = random.Random(seed)
    hyps, goal = GEN.sequent(rng)
    if not entails(hyps, goal).valid:
        return
    more, _ = GEN.sequent(random.Random(extra_seed))
    bigger = (*hyps, *more)
    if entails(bigger, parse_assertion("ff")).valid:
        return  # weakening is only claimed for consistent hypotheses
    assert entails(bigger, goal).valid


def test_canonicalization_cache_is_sound():
    # alpha-renamed queries get the same verdict
    v1 = entails([A("x == succ.y")], A("is succ(x)"))
    v2 = entails([A("z == succ.a")], A("is succ(z)"))
    assert v1.status is v2.status is Status.VALID
