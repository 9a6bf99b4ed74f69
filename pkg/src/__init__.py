# src/__init__.py
"""
Package principal du banc de filtres FC-F-OFDM généralisé
"""

__version__ = "1.0.0"
