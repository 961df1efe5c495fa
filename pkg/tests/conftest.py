import os

# Keep BLAS single-threaded so repeated runs reduce in a fixed order.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

import numpy as np
import pytest

from persuasim.corpus import Corpus, synth_corpus
from persuasim.game_core import GameConfig, Hotel, ScoredReview


def make_hotel(scores, hotel_id="h0"):
    """Hotel fixture with one review per score; texts encode the index."""
    reviews = tuple(
        ScoredReview(
            positive_text=f"positive review {i} of {hotel_id}",
            negative_text=f"negative review {i} of {hotel_id}",
            score=float(s),
        )
        for i, s in enumerate(scores)
    )
    return Hotel(hotel_id=hotel_id, reviews=reviews)


def random_hotel(rng, n_reviews=7, hotel_id=None):
    hotel_id = hotel_id or f"h{rng.integers(1_000_000)}"
    scores = np.round(rng.uniform(1.0, 10.0, size=n_reviews), 1)
    return make_hotel(scores, hotel_id=hotel_id)


@pytest.fixture
def config():
    return GameConfig()


@pytest.fixture(scope="session")
def small_corpus() -> Corpus:
    return synth_corpus(40, np.random.default_rng(123))
