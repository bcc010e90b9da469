"""
Topic catalog and the content distribution documents are drawn from
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from ..models import Document
from ..utils.error_handling import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_NUM_TOPICS = 20
DEFAULT_NUM_LOW_QUALITY = 14
DEFAULT_QUALITY_CLAMP = 3.4


@dataclass(frozen=True)
class TopicCatalog:
    """
    Per-topic mean quality with a shared standard deviation
    """
    num_topics: int
    mean_quality: Tuple[float, ...]
    quality_stddev: float = 1.0
    quality_clamp: float = DEFAULT_QUALITY_CLAMP
    doc_length: float = 4.0
    num_low_quality: Optional[int] = None

    def __post_init__(self) -> None:
        if self.num_topics < 1:
            raise ConfigError("num_topics must be at least 1", key="env.num_topics")
        if len(self.mean_quality) != self.num_topics:
            raise ConfigError(
                f"mean_quality has {len(self.mean_quality)} entries for {self.num_topics} topics",
                key="env.num_topics",
            )
        if self.quality_stddev < 0:
            raise ConfigError("quality_stddev must be nonnegative", key="env.quality_stddev")
        if self.doc_length <= 0:
            raise ConfigError("doc_length must be positive", key="env.doc_length")
        if self.quality_clamp <= 0:
            raise ConfigError("quality_clamp must be positive", key="env.quality_clamp")

    @classmethod
    def split(
        cls,
        num_topics: int = DEFAULT_NUM_TOPICS,
        num_low_quality: int = DEFAULT_NUM_LOW_QUALITY,
        quality_stddev: float = 1.0,
        doc_length: float = 4.0,
        quality_clamp: float = DEFAULT_QUALITY_CLAMP,
    ) -> 'TopicCatalog':
        """
        Low-quality topic means evenly spaced over [-3, 0], the remaining
        high-quality ones over [0, 3]

        Args:
            num_topics: Total number of topics
            num_low_quality: How many of them are low quality
            quality_stddev: Shared quality standard deviation
            doc_length: Constant document length
            quality_clamp: Sampled qualities are clamped to +/- this value
        """
        if not 0 <= num_low_quality <= num_topics:
            raise ConfigError(
                f"num_low_quality={num_low_quality} outside [0, {num_topics}]",
                key="env.num_low_quality",
            )
        low = _spaced(-3.0, 0.0, num_low_quality)
        high = _spaced(0.0, 3.0, num_topics - num_low_quality)
        return cls(
            num_topics=num_topics,
            mean_quality=tuple(float(x) for x in np.concatenate([low, high])),
            quality_stddev=quality_stddev,
            quality_clamp=quality_clamp,
            doc_length=doc_length,
            num_low_quality=num_low_quality,
        )

    def is_high_quality(self, topic: int) -> bool:
        """
        Topics after the low-quality group; without a recorded split, topics
        with a positive mean
        """
        if self.num_low_quality is not None:
            return topic >= self.num_low_quality
        return self.mean_quality[topic] > 0.0


def _spaced(start: float, stop: float, count: int) -> np.ndarray:
    # A single mean sits at the interval midpoint
    if count == 1:
        return np.array([(start + stop) / 2.0])
    return np.linspace(start, stop, count)


def sample_document(
    catalog: TopicCatalog,
    rng: np.random.Generator,
    doc_id: int = 0,
    topic: Optional[int] = None,
) -> Document:
    """
    Draw one document from the content distribution

    Topics are uniform; quality is Normal(mu_topic, sigma^2) clamped to
    the catalog's quality range.

    Args:
        catalog: Topic catalog
        rng: Random stream
        doc_id: Identifier assigned to the document
        topic: Force a topic instead of drawing one
    """
    if topic is None:
        topic = int(rng.integers(catalog.num_topics))
    elif not 0 <= topic < catalog.num_topics:
        raise ConfigError(f"topic {topic} outside [0, {catalog.num_topics})", key="env.num_topics")
    quality = rng.normal(catalog.mean_quality[topic], catalog.quality_stddev)
    quality = float(np.clip(quality, -catalog.quality_clamp, catalog.quality_clamp))
    return Document(id=doc_id, topic=topic, quality=quality, length=catalog.doc_length)


def sample_candidates(
    catalog: TopicCatalog,
    m: int,
    rng: np.random.Generator,
    ids: Optional[Iterator[int]] = None,
) -> List[Document]:
    """
    Draw m independent candidate documents

    Args:
        catalog: Topic catalog
        m: Number of candidates
        rng: Random stream
        ids: Run-scoped id counter; a fresh one is used when omitted
    """
    if m < 1:
        raise ConfigError("candidate count m must be at least 1", key="env.num_candidates")
    if ids is None:
        ids = itertools.count()
    return [sample_document(catalog, rng, doc_id=next(ids)) for _ in range(m)]
