"""Integration tests for MetaQuant."""
