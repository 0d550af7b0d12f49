from .scenario import (
    DEFAULT_SCENARIO,
    InfeasibleScenarioError,
    ScenarioConfig,
    ScenarioConfigError,
    scenario_from,
)
from .world import GroundTruth, ObservedWorld, World, generate_world, load_world, save_world
from .runner import ConditionRun, Slate, run_condition, run_experiment

__all__ = [
    "DEFAULT_SCENARIO",
    "ConditionRun",
    "GroundTruth",
    "InfeasibleScenarioError",
    "ObservedWorld",
    "ScenarioConfig",
    "ScenarioConfigError",
    "Slate",
    "World",
    "generate_world",
    "load_world",
    "run_condition",
    "run_experiment",
    "save_world",
    "scenario_from",
]
