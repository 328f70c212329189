"""Models used by fracvol."""
