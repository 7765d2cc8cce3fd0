"""Sequence-diagram semantics and conformance checking."""
