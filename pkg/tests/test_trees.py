import pytest

from gibq.errors import CapacityError
from gibq.trees import (
    TERMINAL,
    count_trees,
    enumerate_trees,
    fuss_catalan,
    generation,
    node_count,
    terminal_count,
    verify_count_bound,
)

CATALAN = [1, 1, 2, 5, 14, 42, 132, 429, 1430]


def test_binary_counts_are_catalan():
    table = count_trees(2, 8)
    assert list(table.counts) == CATALAN


@pytest.mark.parametrize("k", [2, 3, 4])
def test_first_two_generations_single(k):
    table = count_trees(k, 1)
    assert table[0] == 1
    assert table[1] == 1


def test_ternary_generation_two():
    assert count_trees(3, 2)[2] == 3


@pytest.mark.parametrize("k", [2, 3])
def test_counts_match_closed_form(k):
    table = count_trees(k, 8)
    for j in range(9):
        assert table[j] == fuss_catalan(k, j)


def test_counts_arbitrary_precision():
    # Fuss-Catalan at k=3, j=40 overflows 64-bit integers
    value = count_trees(3, 40)[40]
    assert value == fuss_catalan(3, 40)
    assert value > 2**64


def test_enumerate_base_cases():
    assert enumerate_trees(2, 0) == [TERMINAL]
    assert len(enumerate_trees(3, 1)) == 1
    assert enumerate_trees(3, 1)[0] == (TERMINAL, TERMINAL, TERMINAL)


def test_enumerate_generation_two_binary():
    trees = enumerate_trees(2, 2)
    assert len(trees) == 2
    inner = (TERMINAL, TERMINAL)
    assert ((inner, TERMINAL) in trees) and ((TERMINAL, inner) in trees)


@pytest.mark.parametrize("k,j", [(2, 5), (3, 4), (4, 3)])
def test_enumeration_cardinality_and_identities(k, j):
    trees = enumerate_trees(k, j)
    assert len(trees) == fuss_catalan(k, j)
    assert len(set(trees)) == len(trees)  # distinct ordered structures
    for tree in trees:
        assert generation(tree) == j
        assert node_count(tree) == k * j + 1
        assert terminal_count(tree) == (k - 1) * j + 1


def test_exhaustive_cross_check_small_binary():
    # independent oracle: count_trees vs explicit enumeration for j <= 5
    table = count_trees(2, 5)
    for j in range(6):
        assert table[j] == len(enumerate_trees(2, j))


def test_enumeration_guard():
    with pytest.raises(CapacityError):
        enumerate_trees(2, 20)


def test_count_bound_holds():
    c0, holds = verify_count_bound(2, 10)
    assert all(holds)
    table = count_trees(2, 10)
    for j in range(1, 11):
        assert table[j] * (1 + j) ** 2 <= c0**j * (1 + 1e-9)


def test_count_bound_first_generation_forces_four():
    c0, _ = verify_count_bound(2, 10)
    assert c0 >= 4.0  # j=1: count 1 times (1+1)^2 <= C0


def test_generation_zero_trivial():
    c0, holds = verify_count_bound(2, 0)
    assert holds[0]


def test_regroup_by_root_children_matches_recursion():
    # composition partition: trees of generation 3 split by child generations
    from collections import Counter

    from gibq.trees import compositions

    trees = enumerate_trees(2, 3)
    split = Counter()
    for tree in trees:
        split[tuple(generation(ch) for ch in tree)] += 1
    table = count_trees(2, 3)
    for comp in compositions(2, 2):
        assert split[comp] == table[comp[0]] * table[comp[1]]
