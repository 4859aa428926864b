"""Tests for tpnv."""
