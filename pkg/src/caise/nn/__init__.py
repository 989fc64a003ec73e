"""Minimal float64 tensor library with reverse-mode gradients.

Dense numpy arrays under the hood; the graph, layer math, optimizer, and
finite-difference verification are implemented here.
"""
