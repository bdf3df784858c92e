"""Exporters package: CSV traces and tables, PDF sweep reports."""
