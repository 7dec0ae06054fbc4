"""Test suite for the exterior decay lab."""
