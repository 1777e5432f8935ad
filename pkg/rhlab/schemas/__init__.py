"""Pydantic models for scenarios and reports."""
