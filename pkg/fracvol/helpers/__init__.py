"""Helpers for fracvol."""
