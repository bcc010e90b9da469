from .features import FeatureConverter

__all__ = ['FeatureConverter']
