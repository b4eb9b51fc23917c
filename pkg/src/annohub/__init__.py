"""annohub: a self-hosted platform for schema.org annotations.

Create, validate, store, and serve JSON-LD annotation documents; restrict
authoring with domain specifications; pull external sources through scheduled
wrapper adapters; inject stored annotations into HTML pages.
"""

__version__ = "0.1.0"
