"""Unit tests for MetaQuant."""
