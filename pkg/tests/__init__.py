"""
Test package for the ordinal scan toolkit.
"""
