"""Shipped catalog, product configurations, and scenario definitions."""

from importlib import resources
from pathlib import Path


def _path(name: str) -> Path:
    return Path(resources.files(__package__) / name)


def catalog_path() -> Path:
    return _path("catalog.fm")


def config_path(product: str) -> Path:
    """`product` is 'seco_a' or 'seco_b'."""
    return _path(f"{product}.cfg")


def scenario_path(scenario_id: str) -> Path:
    return _path(f"scenarios/{scenario_id}.scn")
