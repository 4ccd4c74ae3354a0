"""Unit tests for cavtool."""
