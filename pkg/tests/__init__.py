"""Tests for MetaQuant."""
