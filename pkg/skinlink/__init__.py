"""Transcutaneous optical wireless link evaluator.

Closed-form average SNR, outage probability, spectral efficiency and
capacity of a skin-penetrating optical link, cross-checked by Monte Carlo.
"""
