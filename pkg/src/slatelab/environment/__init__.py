from .choice import (
    CascadeParams,
    ChoiceScores,
    cascade_probs,
    conditional_probs,
    environment_score,
    sample_choice,
)
from .corpus import TopicCatalog, sample_candidates, sample_document
from .user_model import (
    DynamicsParams,
    apply_click,
    apply_no_click,
    interest,
    sample_user,
    satisfaction,
)

__all__ = [
    'CascadeParams',
    'ChoiceScores',
    'DynamicsParams',
    'TopicCatalog',
    'apply_click',
    'apply_no_click',
    'cascade_probs',
    'conditional_probs',
    'environment_score',
    'interest',
    'sample_candidates',
    'sample_choice',
    'sample_document',
    'sample_user',
    'satisfaction',
]
