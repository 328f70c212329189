"""Tests for Music Assistant go here."""
