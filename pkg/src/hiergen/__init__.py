"""Two-phase article generation at desk scale.

Extract outlines from articles with frequency or TF-IDF summarization,
train small convolutional sequence-to-sequence models with gated flat or
hierarchical attention, evaluate perplexity, and generate articles by
chaining a prompt-to-outline model into an outline-to-article model.
"""

__version__ = "0.1.0"
