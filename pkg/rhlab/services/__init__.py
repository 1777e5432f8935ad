"""Verification services built on the chart geometry."""
