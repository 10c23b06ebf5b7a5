"""Tests for NutriFit."""
