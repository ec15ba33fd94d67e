"""Ramification numbers, break sequences and heights of wild automorphisms of k((t))."""
