"""Common schema primitives."""

from typing import Literal

from pydantic import BaseModel, ConfigDict

Verdict = Literal["pass", "fail"]


class APIModel(BaseModel):
    """Base model with attribute validation enabled."""

    model_config = ConfigDict(from_attributes=True, ser_json_inf_nan="constants")


class ScenarioModel(BaseModel):
    """Base model for scenario input; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")


def verdict_of(passed: bool) -> Verdict:
    """Return ``"pass"`` or ``"fail"``."""
    return "pass" if passed else "fail"
