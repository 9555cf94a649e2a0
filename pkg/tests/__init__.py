"""Tests package for cblocks."""
