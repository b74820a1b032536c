from flexitex.index.builder import IndexingError, PropertiesAcceptor, build_index
from flexitex.index.store import IRI, Literal, QueryError, Store, Var, query

__all__ = [
    "IRI",
    "IndexingError",
    "Literal",
    "PropertiesAcceptor",
    "QueryError",
    "Store",
    "Var",
    "build_index",
    "query",
]
