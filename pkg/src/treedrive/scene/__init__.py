"""Text rendering of scenarios, rules, targets and collision reports."""

from treedrive.scene.render import (
    DEFAULT_REPORT_STEPS,
    DEFAULT_RULES,
    CollisionReport,
    DrivingTarget,
    ReportStep,
    RuleSet,
    SceneError,
    render_collision_report,
    render_scenario,
)

__all__ = [
    "DEFAULT_REPORT_STEPS",
    "DEFAULT_RULES",
    "CollisionReport",
    "DrivingTarget",
    "ReportStep",
    "RuleSet",
    "SceneError",
    "render_collision_report",
    "render_scenario",
]
