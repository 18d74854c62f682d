"""Entity linking and resolution over graph-modelled profiles.

Profiles are triples of id, attribute-objects, and relation-objects with
value multiplicity and provenance. The package stores them, indexes them
for keyword and structured search, scores profile pairs with a
rarity-weighted similarity, keeps similarity edges under pluggable
physical layouts, and exposes the whole pipeline through an HTTP API and
a command-line interface.
"""

from .model import (
    AttributeObject,
    Profile,
    ProvPair,
    RelationEdge,
    RelationObject,
    SimilarityEdge,
    make_edge,
    make_profile,
    relation_edges,
    values_of,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeObject",
    "Profile",
    "ProvPair",
    "RelationEdge",
    "RelationObject",
    "SimilarityEdge",
    "make_edge",
    "make_profile",
    "relation_edges",
    "values_of",
    "__version__",
]
