"""Estimate web-search trends from Wikipedia hourly page views."""

__version__ = "0.1.0"
