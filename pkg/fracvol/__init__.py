"""Fractional stochastic-volatility toolkit."""
