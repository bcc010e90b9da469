from typing import Sequence

import numpy as np

from ..models import Document, UserState


class FeatureConverter:
    """
    Converter from observable user/document state to network inputs

    Item vector: [interests (T)] ++ [topic one-hot (T)] ++ [quality (1)].
    Slate vector: [interests (T)] ++ k * [topic one-hot (T) ++ quality (1)].
    The session budget is unobservable and never encoded.
    """

    @staticmethod
    def item_width(num_topics: int) -> int:
        return 2 * num_topics + 1

    @staticmethod
    def slate_width(num_topics: int, slate_size: int) -> int:
        return num_topics + slate_size * (num_topics + 1)

    @staticmethod
    def featurize(user: UserState, doc: Document) -> np.ndarray:
        """
        Feature vector of one (user, document) pair

        Args:
            user: User whose interests form the state part
            doc: Candidate document

        Returns:
            Vector of length 2 * num_topics + 1
        """
        num_topics = user.num_topics
        features = np.zeros(2 * num_topics + 1)
        features[:num_topics] = user.interests
        features[num_topics + doc.topic] = 1.0
        features[-1] = doc.quality
        return features

    @staticmethod
    def featurize_candidates(user: UserState, docs: Sequence[Document]) -> np.ndarray:
        """
        Stack item vectors for a candidate list, one row per document
        """
        num_topics = user.num_topics
        features = np.zeros((len(docs), 2 * num_topics + 1))
        features[:, :num_topics] = user.interests
        for row, doc in enumerate(docs):
            features[row, num_topics + doc.topic] = 1.0
            features[row, -1] = doc.quality
        return features

    @staticmethod
    def slate_features(item_features: np.ndarray, num_topics: int) -> np.ndarray:
        """
        Full-slate vector from the item vectors of its members, in slate order
        """
        return np.concatenate([item_features[0, :num_topics], item_features[:, num_topics:].ravel()])

    @staticmethod
    def enumerate_slate_features(
        item_features: np.ndarray,
        combos: np.ndarray,
        num_topics: int,
    ) -> np.ndarray:
        """
        Full-slate vectors for many slates of the same candidate set

        Args:
            item_features: (m, 2T+1) candidate item vectors
            combos: (C, k) candidate row indices, one slate per row
            num_topics: Number of topics T

        Returns:
            (C, T + k(T+1)) matrix
        """
        count = combos.shape[0]
        interests = np.broadcast_to(item_features[0, :num_topics], (count, num_topics))
        docs = item_features[:, num_topics:][combos].reshape(count, -1)
        return np.hstack([interests, docs])
