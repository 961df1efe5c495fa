"""Hotel/review corpus: TSV ingestion, validation, and synthetic generation.

File schema (UTF-8, tab-separated, header row): one row per review with
columns hotel_id, review_index, score, positive_text, negative_text.
Tabs, newlines, and backslashes inside texts are escaped as \\t, \\n, \\\\.
Unknown columns are ignored on load.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .game_core import GameDataError, Hotel, ScoredReview, hotel_quality

REQUIRED_COLUMNS = ("hotel_id", "review_index", "score", "positive_text", "negative_text")


class CorpusError(ValueError):
    """Corpus file violates the schema or a hotel invariant."""


@dataclass
class Corpus:
    hotels: list[Hotel]
    tau: float = 8.0

    def __len__(self) -> int:
        return len(self.hotels)

    def high_quality_fraction(self, tau: Optional[float] = None) -> float:
        tau = self.tau if tau is None else tau
        if not self.hotels:
            return 0.0
        return sum(hotel_quality(h, tau) for h in self.hotels) / len(self.hotels)

    def hotel_by_id(self, hotel_id: str) -> Hotel:
        for hotel in self.hotels:
            if hotel.hotel_id == hotel_id:
                return hotel
        raise KeyError(hotel_id)


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _unescape(text: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            if nxt == "t":
                out.append("\t")
                i += 2
                continue
            if nxt == "n":
                out.append("\n")
                i += 2
                continue
            if nxt == "\\":
                out.append("\\")
                i += 2
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def save_corpus(corpus: Corpus, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(REQUIRED_COLUMNS) + "\n")
        for hotel in corpus.hotels:
            for i, review in enumerate(hotel.reviews):
                fh.write(
                    "\t".join(
                        (
                            hotel.hotel_id,
                            str(i),
                            repr(review.score),
                            _escape(review.positive_text),
                            _escape(review.negative_text),
                        )
                    )
                    + "\n"
                )


def load_corpus(path: str, reviews_R: int = 7, tau: float = 8.0) -> Corpus:
    """Parse and validate a corpus file; raises :class:`CorpusError` with a
    row-level diagnostic on any schema or invariant violation."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if not header:
            raise CorpusError(f"{path}: empty file")
        columns = header.split("\t")
        try:
            col_idx = {name: columns.index(name) for name in REQUIRED_COLUMNS}
        except ValueError as exc:
            raise CorpusError(f"{path}: header missing required column: {exc}") from exc

        rows_by_hotel: dict[str, dict[int, ScoredReview]] = {}
        hotel_order: list[str] = []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) < len(columns):
                raise CorpusError(f"{path}:{lineno}: expected {len(columns)} columns")
            hotel_id = parts[col_idx["hotel_id"]]
            try:
                review_index = int(parts[col_idx["review_index"]])
                score = float(parts[col_idx["score"]])
            except ValueError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from exc
            try:
                review = ScoredReview(
                    positive_text=_unescape(parts[col_idx["positive_text"]]),
                    negative_text=_unescape(parts[col_idx["negative_text"]]),
                    score=score,
                )
            except GameDataError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from exc
            if hotel_id not in rows_by_hotel:
                rows_by_hotel[hotel_id] = {}
                hotel_order.append(hotel_id)
            if review_index in rows_by_hotel[hotel_id]:
                raise CorpusError(
                    f"{path}:{lineno}: duplicate review_index {review_index} "
                    f"for hotel {hotel_id!r}"
                )
            rows_by_hotel[hotel_id][review_index] = review

    hotels: list[Hotel] = []
    for hotel_id in hotel_order:
        reviews = rows_by_hotel[hotel_id]
        if len(reviews) != reviews_R:
            raise CorpusError(
                f"{path}: hotel {hotel_id!r} has {len(reviews)} reviews, "
                f"expected {reviews_R}"
            )
        if sorted(reviews) != list(range(reviews_R)):
            raise CorpusError(
                f"{path}: hotel {hotel_id!r} review indices are not 0..{reviews_R - 1}"
            )
        hotels.append(
            Hotel(hotel_id=hotel_id, reviews=tuple(reviews[i] for i in range(reviews_R)))
        )
    return Corpus(hotels=hotels, tau=tau)


# --- synthetic corpus ------------------------------------------------------

# The eight aspects personas care about; synthetic texts mention them so
# persona-conditioned agents have signal to react to.
ASPECTS = (
    "price",
    "facilities",
    "room",
    "location",
    "staff",
    "sanitary",
    "breakfast",
    "atmosphere",
)

_PRAISE = {
    "price": ["Great value for the money.", "Very fairly priced for what you get."],
    "facilities": ["The pool and gym were excellent.", "Fantastic spa and modern facilities."],
    "room": ["The room was spacious and spotless.", "Lovely, quiet room with a comfortable bed."],
    "location": ["Perfect location, steps from the center.", "Unbeatable location near everything."],
    "staff": ["Staff were warm and incredibly helpful.", "Reception went out of their way for us."],
    "sanitary": ["Everything was impeccably clean.", "Bathrooms were sparkling and fresh."],
    "breakfast": ["Breakfast was generous and delicious.", "Excellent breakfast with lots of choice."],
    "atmosphere": ["Charming building with a relaxed vibe.", "Beautiful lobby and a calm atmosphere."],
}

_COMPLAINT = {
    "price": ["Overpriced for what it offers.", "Hidden fees made it poor value."],
    "facilities": ["The gym was broken and the pool closed.", "Facilities were dated and tired."],
    "room": ["Our room was cramped and noisy.", "The bed was uncomfortable and the room musty."],
    "location": ["Far from anything worth seeing.", "The street outside was loud all night."],
    "staff": ["Staff were dismissive and slow.", "Reception was rude when we asked for help."],
    "sanitary": ["Found hair in the bathroom and dusty corners.", "The toilet smelled and the sheets were stained."],
    "breakfast": ["Breakfast was stale and repetitive.", "Coffee was cold and the buffet sparse."],
    "atmosphere": ["The whole place felt neglected.", "Dark corridors and a gloomy feel."],
}

_MILD_PRAISE = ["It was fine overall.", "Decent enough for a short stay.", "Nothing special, but acceptable."]
_MILD_COMPLAINT = ["A few small things could improve.", "Minor wear and tear here and there.", "Check-in took a little long."]
_FILLERS = [
    "Stayed one night.",
    "Stayed two nights.",
    "Stayed for a long weekend.",
    "Visited in the off season.",
    "Traveled with family.",
    "Traveled for work.",
    "Second visit here.",
    "Booked last minute.",
]


def _synth_review_texts(
    score: float, rng: np.random.Generator, seen: set[str]
) -> tuple[str, str]:
    """Templated texts whose tone tracks the score; unique corpus-wide."""
    aspect_pos, aspect_neg = (ASPECTS[i] for i in rng.choice(len(ASPECTS), size=2, replace=False))
    if score >= 8.0:
        pos = _PRAISE[aspect_pos][rng.integers(2)] + " " + _PRAISE[aspect_neg][rng.integers(2)]
        neg = _MILD_COMPLAINT[rng.integers(len(_MILD_COMPLAINT))]
    elif score >= 5.0:
        pos = _PRAISE[aspect_pos][rng.integers(2)]
        neg = _COMPLAINT[aspect_neg][rng.integers(2)]
    else:
        pos = _MILD_PRAISE[rng.integers(len(_MILD_PRAISE))]
        neg = _COMPLAINT[aspect_pos][rng.integers(2)] + " " + _COMPLAINT[aspect_neg][rng.integers(2)]
    base = (pos, neg)
    key = base[0] + "\x1f" + base[1]
    while key in seen:
        pos = pos + " " + _FILLERS[rng.integers(len(_FILLERS))]
        key = pos + "\x1f" + neg
    seen.add(key)
    return pos, neg


def _draw_scores(
    high: bool, reviews_R: int, tau: float, rng: np.random.Generator
) -> tuple[float, ...]:
    """Scores with realistic spread whose mean lands on the requested side
    of tau (rejection sampling; inclusive boundary counts as high)."""
    center, sd = (8.8, 1.3) if high else (6.6, 1.6)
    for _ in range(1000):
        raw = np.clip(rng.normal(center, sd, size=reviews_R), 1.0, 10.0)
        scores = tuple(round(float(s), 1) for s in raw)
        mean = sum(scores) / reviews_R
        if (mean >= tau) == high:
            return scores
    raise RuntimeError("could not draw scores on the requested side of tau")


def synth_corpus(
    n_hotels: int,
    rng: np.random.Generator,
    high_fraction: float = 0.5,
    reviews_R: int = 7,
    tau: float = 8.0,
) -> Corpus:
    """Deterministic synthetic corpus with the requested high-quality mix.

    Exactly round(n_hotels * high_fraction) hotels are high quality, so the
    realized fraction is always within 1/n of the target.
    """
    if n_hotels < 1:
        raise ValueError("n_hotels must be >= 1")
    n_high = int(round(n_hotels * high_fraction))
    flags = np.zeros(n_hotels, dtype=bool)
    flags[:n_high] = True
    rng.shuffle(flags)

    seen: set[str] = set()
    hotels: list[Hotel] = []
    width = max(4, len(str(n_hotels)))
    for i in range(n_hotels):
        scores = _draw_scores(bool(flags[i]), reviews_R, tau, rng)
        reviews = []
        for score in scores:
            pos, neg = _synth_review_texts(score, rng, seen)
            reviews.append(ScoredReview(positive_text=pos, negative_text=neg, score=score))
        hotels.append(Hotel(hotel_id=f"synth{i:0{width}d}", reviews=tuple(reviews)))
    return Corpus(hotels=hotels, tau=tau)
