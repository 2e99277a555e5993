"""Reference provider for the snippetqa embedding/entailment wire protocol."""

from .backends import HashEmbedder, LexicalEntailer, make_embedder, make_entailer
from .server import handle_request, main, serve

__version__ = "0.1.0"
