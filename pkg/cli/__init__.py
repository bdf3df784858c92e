"""Command-line package: scenario loading and command dispatch."""
