"""Managers for configuration and figure presets."""
