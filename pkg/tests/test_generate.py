import random

import pytest

from dissem.errors import GenerationFailed
from dissem.generate import corpus_rng, generate_corpus, random_instance
from dissem.network import is_feasible, solvability_index


def test_corpus_deterministic():
    a = generate_corpus(4, 4, 2, 10, seed=7)
    b = generate_corpus(4, 4, 2, 10, seed=7)
    assert a == b


def test_corpus_seed_sensitivity():
    a = generate_corpus(4, 4, 2, 10, seed=7)
    b = generate_corpus(4, 4, 2, 10, seed=8)
    assert a != b


def test_generated_horizon_exact():
    for d in (2, 3):
        for inst in generate_corpus(4, 4, d, 15, seed=3):
            assert solvability_index(inst.net) == d


def test_generated_instances_feasible_and_covering():
    for inst in generate_corpus(4, 4, 2, 15, seed=5):
        assert is_feasible(inst.net, inst.possess, inst.request)
        assert inst.covers_all_symbols()
        # every symbol held somewhere, someone misses something
        assert set().union(*inst.possess) == set(range(inst.n))
        assert any(inst.request[v] for v in range(inst.k))


def test_unreachable_diameter_rejected():
    rng = random.Random(1)
    with pytest.raises(GenerationFailed):
        random_instance(3, 3, 5, rng)
    with pytest.raises(GenerationFailed):
        random_instance(1, 3, 1, rng)


def test_corpus_rng_streams_are_stable():
    assert corpus_rng(1, 4, 4, 2, 0).random() == corpus_rng(1, 4, 4, 2, 0).random()
    assert corpus_rng(1, 4, 4, 2, 0).random() != corpus_rng(1, 4, 4, 2, 1).random()
