"""Command-line interface for agentpolity."""
