"""Toolkit for information transition systems."""
