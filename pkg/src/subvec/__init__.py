"""Sub-vector decomposition of word embeddings: semantic trees, SSNs, benchmarks."""

from .decomp import children, is_subvector, root, tree_from_words
from .embed_io import EmbeddingSpace, VocabFilter, cosine_neighbors, load_embeddings
from .errors import SubvecError

__version__ = "0.1.0"

__all__ = [
    "EmbeddingSpace",
    "SubvecError",
    "VocabFilter",
    "children",
    "cosine_neighbors",
    "is_subvector",
    "load_embeddings",
    "root",
    "tree_from_words",
]
