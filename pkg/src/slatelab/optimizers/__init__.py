from .slate import (
    OPTIMIZERS,
    brute_force_slate,
    count_slates,
    exact_slate,
    get_optimizer,
    greedy_slate,
    lp_slate,
    slate_value,
    topk_slate,
)

__all__ = [
    'OPTIMIZERS',
    'brute_force_slate',
    'count_slates',
    'exact_slate',
    'get_optimizer',
    'greedy_slate',
    'lp_slate',
    'slate_value',
    'topk_slate',
]
