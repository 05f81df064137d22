import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from extremal_cem.encoding import ConstructionSpace, encode_construction
from extremal_cem.graph import (
    Graph,
    build_comet,
    build_t_nd,
    complete_graph,
    cycle_graph,
    edge_pairs,
    is_connected,
    matching_number,
    path_graph,
    star_graph,
)
from extremal_cem.linalg import DimensionTooLarge, permanent
from extremal_cem.matching import max_matching
from extremal_cem.rewards import (
    KNOWN_F312,
    PENALTY,
    PROBLEMS,
    avoids_312,
    avoids_312_bruteforce,
    circ_op,
    get_score_fn,
    lambda_mu_threshold,
    perm312_threshold,
    reward_collins,
    reward_cospectral_pair,
    reward_lambda_mu,
    reward_perm312,
    reward_proximity_dspec,
    star_op,
)
from extremal_cem.verify import aouch_graph, load_construction_matrices

from conftest import brualdi_cao, reflect


def random_matrix(rnd, n, density=0.5):
    return [[int(rnd.random() < density) for _ in range(n)] for _ in range(n)]


def random_avoiding(rnd, n):
    # add ones in random order, keeping only those that preserve avoidance
    m = [[0] * n for _ in range(n)]
    cells = [(i, j) for i in range(n) for j in range(n)]
    rnd.shuffle(cells)
    for i, j in cells[: rnd.randint(n, 3 * n)]:
        m[i][j] = 1
        if not avoids_312(m):
            m[i][j] = 0
    return m


def random_connected(rnd, n, p=0.35):
    while True:
        g = Graph(n, [e for e in edge_pairs(n) if rnd.random() < p])
        if is_connected(g):
            return g


class TestLambdaMu:
    def test_counterexample_beats_threshold(self):
        score = reward_lambda_mu(aouch_graph())
        assert score == pytest.approx(-(math.sqrt(10) + 2), abs=1e-9)
        assert score > lambda_mu_threshold(19)
        assert lambda_mu_threshold(19) == pytest.approx(-5.242640687, abs=1e-9)

    def test_small_cases(self):
        assert reward_lambda_mu(complete_graph(3)) == pytest.approx(-3)
        assert reward_lambda_mu(Graph(2, [])) == PENALTY
        assert reward_lambda_mu(path_graph(2)) == PENALTY
        assert reward_lambda_mu(Graph(4, [(0, 1), (2, 3)]), penalty=-1.0) == -1.0

    def test_relabel_invariant(self):
        rnd = random.Random(1)
        for _ in range(20):
            g = random_connected(rnd, rnd.randint(3, 10))
            perm = list(range(g.n))
            rnd.shuffle(perm)
            assert reward_lambda_mu(g) == pytest.approx(reward_lambda_mu(g.relabel(perm)), abs=1e-9)

    def test_deleting_non_matching_edges_never_hurts(self):
        rnd = random.Random(2)
        for _ in range(40):
            g = random_connected(rnd, rnd.randint(3, 10), 0.45)
            mate = max_matching(g.n, g.adj)
            matched = {(min(v, mate[v]), max(v, mate[v])) for v in range(g.n) if mate[v] >= 0}
            base = reward_lambda_mu(g)
            for e in g.sorted_edges():
                if e in matched:
                    continue
                h = g.remove_edges([e])
                if is_connected(h):
                    assert reward_lambda_mu(h) >= base - 1e-9


class TestProximityDspec:
    def test_comet_boundary(self):
        assert reward_proximity_dspec(build_comet(13, 190)) > 0
        assert reward_proximity_dspec(build_comet(13, 100)) < 0

    def test_small_and_degenerate(self):
        assert reward_proximity_dspec(cycle_graph(5)) < 0
        assert reward_proximity_dspec(complete_graph(5)) == PENALTY
        assert reward_proximity_dspec(path_graph(3)) == PENALTY
        assert reward_proximity_dspec(Graph(5, [(0, 1)])) == PENALTY


class TestCollins:
    def test_tnd_value(self):
        assert reward_collins(build_t_nd(16, 4)) == pytest.approx(11 / 85)
        code = encode_construction(ConstructionSpace.prufer_tree(16), build_t_nd(16, 4))
        assert reward_collins(code) == pytest.approx(11 / 85)

    def test_star_and_nonnegative(self):
        assert reward_collins(star_graph(4)) >= 0
        rnd = random.Random(0)
        for _ in range(30):
            n = rnd.randint(3, 12)
            assert reward_collins([rnd.randrange(n) for _ in range(n - 2)]) >= 0

    def test_too_small_is_penalised(self):
        assert reward_collins([]) == PENALTY


class TestPerm312:
    def test_examples(self):
        assert reward_perm312(np.eye(3, dtype=int)) == 1
        assert reward_perm312(brualdi_cao(5)) == 12
        pattern = [[0, 0, 1], [1, 0, 0], [0, 1, 0]]
        assert reward_perm312(pattern) == PENALTY
        with pytest.raises(DimensionTooLarge):
            reward_perm312(np.eye(14, dtype=int))

    def test_thresholds(self):
        assert perm312_threshold(5) == 15.5
        assert len(KNOWN_F312) == 13

    def test_avoidance_basics(self):
        assert not avoids_312(np.ones((3, 3), dtype=int))
        assert avoids_312(np.eye(9, dtype=int))
        assert avoids_312(brualdi_cao(8))

    def test_avoidance_matches_bruteforce(self):
        rnd = random.Random(7)
        for _ in range(500):
            n = rnd.randint(1, 5)
            m = random_matrix(rnd, n, rnd.choice([0.3, 0.5, 0.7]))
            assert avoids_312(m) == avoids_312_bruteforce(m)

    @given(st.integers(1, 6).flatmap(lambda n: st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=n, max_size=n)))
    def test_avoiders_have_few_ones(self, m):
        n = len(m)
        if n >= 2 and avoids_312(m):
            assert sum(map(sum, m)) <= 4 * n - 4

    def test_bregman_minc(self):
        rnd = random.Random(3)
        for _ in range(60):
            n = rnd.randint(2, 10)
            m = random_avoiding(rnd, n)
            bound = math.prod(math.factorial(r) ** (1 / r) for r in map(sum, m) if r)
            assert permanent(m) <= bound + 1e-9


class TestOperations:
    def test_small_cases(self):
        assert star_op([[1]], [[1]]) == [[1, 1], [1, 1]]
        assert permanent(star_op([[1]], [[1]])) == 2

    def test_figure_identities(self):
        a = load_construction_matrices()
        one = [[1]]
        assert circ_op(one, a[2]) == a[3]
        assert circ_op(one, reflect(a[3])) == a[4]
        assert star_op(a[3], a[3]) == a[6]

    def test_reflection_swaps_operations(self):
        rnd = random.Random(11)
        for _ in range(100):
            a = random_matrix(rnd, rnd.randint(1, 5))
            b = random_matrix(rnd, rnd.randint(1, 5))
            assert reflect(circ_op(a, b)) == star_op(reflect(b), reflect(a))

    def test_closure_and_superadditivity(self):
        rnd = random.Random(5)
        for _ in range(100):
            a = random_avoiding(rnd, rnd.randint(1, 5))
            b = random_avoiding(rnd, rnd.randint(1, 5))
            for op in (star_op, circ_op):
                c = op(a, b)
                assert avoids_312(c)
                assert permanent(c) >= permanent(a) * permanent(b)


class TestCospectral:
    def test_identical_pair_is_penalised_twice(self):
        assert reward_cospectral_pair((cycle_graph(6), cycle_graph(6))) == 2 * PENALTY

    def test_distinct_pair_is_finite(self):
        score = reward_cospectral_pair((cycle_graph(6), path_graph(6)))
        assert PENALTY < score < 0

    def test_disconnected(self):
        assert reward_cospectral_pair((cycle_graph(4), Graph(4, [(0, 1)]))) == PENALTY


class TestRegistry:
    @pytest.mark.parametrize("name", PROBLEMS)
    def test_every_problem_scores_a_word(self, name):
        fn = get_score_fn(name, 6)
        word = [1] * fn.space.word_len if fn.space.alphabet_size == 2 else [0] * fn.space.word_len
        from extremal_cem.encoding import decode

        value = fn(decode(fn.space, word))
        assert math.isfinite(value)

    def test_thresholds_and_refutation(self):
        fn = get_score_fn("lambda-mu", 19)
        assert fn.refutes(fn(aouch_graph()))
        assert not get_score_fn("collins", 8).refutes(1.0)
        assert get_score_fn("proximity-dspec", 10).threshold == 0.0
        assert get_score_fn("lambda-mu", 19, threshold=-6.0).threshold == -6.0

    def test_unknown_and_oversized(self):
        with pytest.raises(KeyError):
            get_score_fn("antichain", 5)
        with pytest.raises(DimensionTooLarge):
            get_score_fn("perm312", 14)

    def test_score_fn_never_raises(self):
        fn = get_score_fn("perm312", 3)
        assert fn([[2, 0, 0], [0, 1, 0], [0, 0, 1]]) == PENALTY
