"""Decorators package for function decorators."""
