"""Extension framework: scheduled adapters that pull external sources, map
records to annotation documents, and push them with CID upsert."""

from annohub.wrapper.framework import (
    AdapterDescriptor,
    ConfigField,
    ExtensionActivation,
    RunReport,
    SourceRecord,
    UnmappableRecord,
    WrapperError,
    make_cid,
    parse_cid,
    run_extension,
)

__all__ = [
    "AdapterDescriptor",
    "ConfigField",
    "ExtensionActivation",
    "RunReport",
    "SourceRecord",
    "UnmappableRecord",
    "WrapperError",
    "make_cid",
    "parse_cid",
    "run_extension",
]
