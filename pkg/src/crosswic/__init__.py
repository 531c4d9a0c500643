"""Multilingual and cross-lingual word-in-context disambiguation lab.

Two strategies over a shared numeric core: fine-tuning a toy transformer
encoder with a span classification head, and frozen-feature extraction
(target-word or dependency-syntax embeddings) feeding LR/MLP classifiers.
"""

__version__ = "0.1.0"
