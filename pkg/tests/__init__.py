"""Tests for the linewalk package."""
