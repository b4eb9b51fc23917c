"""Bundled adapters, keyed by adapterId."""

from annohub.wrapper.adapters.page_scrape import PageScrapeAdapter
from annohub.wrapper.adapters.structured_feed import StructuredFeedAdapter


def build_adapter(adapter_id: str, fetcher=None):
    """Instantiate a bundled adapter; ``fetcher`` overrides HTTP access."""
    if adapter_id == StructuredFeedAdapter.descriptor.adapter_id:
        return StructuredFeedAdapter(fetcher=fetcher)
    if adapter_id == PageScrapeAdapter.descriptor.adapter_id:
        return PageScrapeAdapter(fetcher=fetcher)
    from annohub.wrapper.framework import WrapperError

    raise WrapperError("UnknownAdapter", f"no adapter with id {adapter_id}")


__all__ = ["StructuredFeedAdapter", "PageScrapeAdapter", "build_adapter"]
