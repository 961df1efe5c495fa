"""Review-text -> score-distribution oracle.

A review maps to a probability mass over ten integer score buckets, where
bucket k covers scores in [k, k+1).  The production backend asks a chat
model to rate the review on a 1-100 scale and reads the mass it puts on
each numeral; the offline stub backend builds a distribution around the
review's true score and exists so that every downstream consumer can run
deterministically without a model.
"""

from __future__ import annotations

import hashlib
import math
import os
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from .game_core import Hotel, ScoredReview

N_BUCKETS = 10
_MASS_TOLERANCE = 1e-9

SCORE_PROMPT_TEMPLATE = (
    "Rank the value of the hotel as presented by the review, from 1 to 100, "
    "with 80 being the minimum score for a hotel you would like to stay in.\n"
    "Positive: {positive}\n"
    "Negative: {negative}\n"
    "Answer only with your value!"
)


@dataclass(frozen=True)
class ScoreDistribution:
    """Probability mass over buckets 1..10; bucket k covers [k, k+1)."""

    mass: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.mass) != N_BUCKETS:
            raise ValueError(f"need {N_BUCKETS} bucket masses, got {len(self.mass)}")
        if any(m < 0 for m in self.mass):
            raise ValueError("bucket masses must be non-negative")
        total = sum(self.mass)
        if abs(total - 1.0) > _MASS_TOLERANCE:
            raise ValueError(f"bucket masses sum to {total}, expected 1")

    @classmethod
    def point_mass(cls, bucket: int) -> "ScoreDistribution":
        if not 1 <= bucket <= N_BUCKETS:
            raise ValueError(f"bucket {bucket} outside 1..{N_BUCKETS}")
        return cls(tuple(1.0 if k == bucket else 0.0 for k in range(1, N_BUCKETS + 1)))

    @classmethod
    def from_numeral_masses(cls, masses: Mapping[int, float]) -> "ScoreDistribution":
        """Aggregate mass on 1-100 numerals into the ten score buckets.

        Numeral n lands in bucket n // 10 (so 80-89 -> bucket 8 and 100 ->
        bucket 10); numerals below 10 are clamped into bucket 1.  The
        result is renormalized over the numeral mass supplied.
        """
        buckets = [0.0] * N_BUCKETS
        total = 0.0
        for numeral, m in masses.items():
            if not 1 <= numeral <= 100:
                raise ValueError(f"numeral {numeral} outside 1..100")
            if m < 0:
                raise ValueError("numeral mass must be non-negative")
            bucket = min(max(numeral // 10, 1), N_BUCKETS)
            buckets[bucket - 1] += m
            total += m
        if total <= 0:
            raise ValueError("no positive numeral mass to bucket")
        return cls(tuple(b / total for b in buckets))

    def expected_score(self) -> float:
        """Mean score under the bucket-midpoint convention."""
        return sum((k + 0.5) * m for k, m in zip(range(1, N_BUCKETS + 1), self.mass))

    def mass_at_or_above(self, tau: float) -> float:
        """P(score >= tau) with scores uniform within each bucket."""
        total = 0.0
        for k, m in zip(range(1, N_BUCKETS + 1), self.mass):
            overlap = (k + 1.0) - max(float(k), tau)
            total += m * min(max(overlap, 0.0), 1.0)
        return total

    def sample_score(self, rng: np.random.Generator) -> float:
        """Draw a score: pick a bucket by mass, then uniform within it."""
        u = rng.random()
        acc = 0.0
        bucket = N_BUCKETS
        for k, m in zip(range(1, N_BUCKETS + 1), self.mass):
            acc += m
            if u < acc:
                bucket = k
                break
        return bucket + rng.random()


def review_text_key(positive_text: str, negative_text: str) -> str:
    """Content hash identifying a review's text pair."""
    digest = hashlib.sha256()
    digest.update(positive_text.encode("utf-8"))
    digest.update(b"\x1f")
    digest.update(negative_text.encode("utf-8"))
    return digest.hexdigest()


def score_prompt(positive_text: str, negative_text: str) -> str:
    return SCORE_PROMPT_TEMPLATE.format(positive=positive_text, negative=negative_text)


class StubScoreBackend:
    """Deterministic offline backend centered at the review's true score.

    ``spread`` is the standard deviation (in buckets) of a discretized
    gaussian around the true score's bucket; spread 0 gives a point mass.
    Text-only lookups resolve scores through a corpus-derived table, which
    stands in for a model that reads the text perfectly.
    """

    name = "stub"

    def __init__(self, spread: float = 0.0, score_by_text: Optional[Mapping[str, float]] = None):
        if spread < 0:
            raise ValueError("spread must be >= 0")
        self.spread = spread
        self._score_by_text = dict(score_by_text or {})

    @classmethod
    def from_corpus(cls, hotels: Iterable[Hotel], spread: float = 0.0) -> "StubScoreBackend":
        table: dict[str, float] = {}
        for hotel in hotels:
            for review in hotel.reviews:
                table[review_text_key(review.positive_text, review.negative_text)] = review.score
        return cls(spread=spread, score_by_text=table)

    def distribution_for_score(self, score: float) -> ScoreDistribution:
        center = min(max(int(math.floor(score)), 1), N_BUCKETS)
        if self.spread == 0:
            return ScoreDistribution.point_mass(center)
        weights = [
            math.exp(-((k - center) ** 2) / (2.0 * self.spread**2))
            for k in range(1, N_BUCKETS + 1)
        ]
        total = sum(weights)
        return ScoreDistribution(tuple(w / total for w in weights))

    def distribution_for_review(self, review: ScoredReview) -> ScoreDistribution:
        return self.distribution_for_score(review.score)

    def distribution_for_text(self, positive_text: str, negative_text: str) -> ScoreDistribution:
        key = review_text_key(positive_text, negative_text)
        if key not in self._score_by_text:
            raise KeyError(
                "review text not in the stub backend's lookup table; build the "
                "backend with StubScoreBackend.from_corpus"
            )
        return self.distribution_for_score(self._score_by_text[key])


_NUMERAL_RE = re.compile(r"\d{1,3}")


class LlmScoreBackend:
    """Backend that rates reviews through a chat model.

    Uses the model's numeral-token distribution when the client exposes
    one (``numeral_logprobs``); otherwise falls back to ``n_samples``
    repeated single-value completions and the empirical distribution.
    """

    name = "llm"

    def __init__(self, client, n_samples: int = 64, use_logprobs: Optional[bool] = None):
        self.client = client
        self.n_samples = n_samples
        if use_logprobs is None:
            use_logprobs = hasattr(client, "numeral_logprobs")
        if use_logprobs and not hasattr(client, "numeral_logprobs"):
            raise ValueError(
                "client has no numeral-distribution access; construct the "
                "backend with use_logprobs=False to use the sampling fallback"
            )
        self.use_logprobs = use_logprobs

    def _parse_numeral(self, reply: str) -> Optional[int]:
        match = _NUMERAL_RE.search(reply)
        if match is None:
            return None
        value = int(match.group())
        return value if 1 <= value <= 100 else None

    def distribution_for_text(self, positive_text: str, negative_text: str) -> ScoreDistribution:
        prompt = score_prompt(positive_text, negative_text)
        if self.use_logprobs:
            masses = self.client.numeral_logprobs(prompt)
            return ScoreDistribution.from_numeral_masses(masses)
        counts: dict[int, float] = {}
        for i in range(self.n_samples):
            reply = self.client.complete(
                [{"role": "user", "content": prompt}], sample_tag=str(i)
            )
            numeral = self._parse_numeral(reply)
            if numeral is not None:
                counts[numeral] = counts.get(numeral, 0.0) + 1.0
        if not counts:
            raise RuntimeError("model produced no parseable 1-100 values")
        return ScoreDistribution.from_numeral_masses(counts)

    def distribution_for_review(self, review: ScoredReview) -> ScoreDistribution:
        return self.distribution_for_text(review.positive_text, review.negative_text)


CACHE_HEADER = "# persuasim score-distribution cache v1: review_sha256\tm1..m10"


class ScoreOracle:
    """Content-keyed cache in front of a backend, so each distinct review
    text is scored once per run.  Optionally persists to a columnar text
    file (one row per review hash, ten bucket masses)."""

    def __init__(self, backend, cache_path: Optional[str] = None):
        self.backend = backend
        self.cache_path = cache_path
        self._cache: dict[str, ScoreDistribution] = {}
        if cache_path and os.path.exists(cache_path):
            self._load(cache_path)

    def _load(self, path: str) -> None:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 1 + N_BUCKETS:
                    raise ValueError(f"malformed cache row: {line!r}")
                self._cache[parts[0]] = ScoreDistribution(
                    tuple(float(x) for x in parts[1:])
                )

    def save(self, path: Optional[str] = None) -> None:
        path = path or self.cache_path
        if path is None:
            raise ValueError("no cache path configured")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(CACHE_HEADER + "\n")
            for key in sorted(self._cache):
                masses = "\t".join(repr(m) for m in self._cache[key].mass)
                fh.write(f"{key}\t{masses}\n")

    def distribution_for_text(self, positive_text: str, negative_text: str) -> ScoreDistribution:
        key = review_text_key(positive_text, negative_text)
        if key not in self._cache:
            self._cache[key] = self.backend.distribution_for_text(
                positive_text, negative_text
            )
        return self._cache[key]

    def __len__(self) -> int:
        return len(self._cache)


def score_distribution(review: ScoredReview, backend) -> ScoreDistribution:
    """Distribution over score buckets for one review, via the backend."""
    return backend.distribution_for_review(review)


def expected_score(dist: ScoreDistribution) -> float:
    return dist.expected_score()


def build_oracle_table(
    hotels: Iterable[Hotel], backend, cache_path: Optional[str] = None
) -> dict[tuple[str, int], ScoreDistribution]:
    """Distributions for every (hotel_id, review_index) in the corpus.

    Deduplicates by review text, so the backend cost is one call per
    distinct review rather than per decision.
    """
    oracle = ScoreOracle(backend, cache_path=cache_path)
    table: dict[tuple[str, int], ScoreDistribution] = {}
    for hotel in hotels:
        for i, review in enumerate(hotel.reviews):
            table[(hotel.hotel_id, i)] = oracle.distribution_for_text(
                review.positive_text, review.negative_text
            )
    if cache_path:
        oracle.save()
    return table
