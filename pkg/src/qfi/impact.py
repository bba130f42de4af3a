"""Operational energy and carbon estimates for device executions.

energy_kj = power_kw * duration_s, energy_kwh = energy_kj / 3600, and
carbon_g = energy_kwh * grams_co2_per_kwh; rounding happens only at
presentation. Embodied/manufacturing impacts are out of scope.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import yaml

from .devices import DeviceSpec
from .errors import ConfigurationError, InvalidRequestError, NotFoundError

KJ_PER_KWH = 3600.0


@dataclass(frozen=True)
class RegionIntensity:
    region_code: str
    grams_co2_per_kwh: float

    def __post_init__(self):
        if self.grams_co2_per_kwh < 0:
            raise ConfigurationError(
                f"region {self.region_code}: grams_co2_per_kwh must be >= 0")


@dataclass(frozen=True)
class ImpactEstimate:
    device_id: str
    duration_s: float
    energy_kj: float
    energy_kwh: float
    region_code: str
    carbon_g: float

    def to_doc(self) -> dict:
        return {
            "device_id": self.device_id,
            "duration_s": self.duration_s,
            "energy_kj": self.energy_kj,
            "energy_kwh": self.energy_kwh,
            "region_code": self.region_code,
            "carbon_g": self.carbon_g,
        }


def load_regions(source: str | Path | dict) -> list[RegionIntensity]:
    if isinstance(source, (str, Path)):
        try:
            with open(source, "r", encoding="utf-8") as fh:
                document = yaml.safe_load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read region table {source}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"malformed region table {source}: {exc}") from exc
    else:
        document = source
    if not isinstance(document, dict) or not isinstance(document.get("regions"), list):
        raise ConfigurationError("region table must be a mapping with a 'regions' list")
    regions = []
    seen: set[str] = set()
    for entry in document["regions"]:
        code = entry.get("region_code", "<missing>")
        if code in seen:
            raise ConfigurationError(f"region {code}: duplicate region_code")
        seen.add(code)
        regions.append(RegionIntensity(region_code=code,
                                       grams_co2_per_kwh=float(entry["grams_co2_per_kwh"])))
    return regions


def default_regions_path() -> Path:
    return Path(__file__).parent / "config" / "regions.yaml"


def load_default_regions() -> list[RegionIntensity]:
    return load_regions(default_regions_path())


def get_region(regions: Iterable[RegionIntensity], region_code: str) -> RegionIntensity:
    for region in regions:
        if region.region_code == region_code:
            return region
    raise NotFoundError(f"unknown region {region_code!r}")


def estimate(device: DeviceSpec, duration_s: float, region: RegionIntensity) -> ImpactEstimate:
    if duration_s < 0:
        raise InvalidRequestError("duration_s must be >= 0")
    energy_kj = device.power_kw * duration_s
    energy_kwh = energy_kj / KJ_PER_KWH
    carbon_g = energy_kwh * region.grams_co2_per_kwh
    return ImpactEstimate(device_id=device.id, duration_s=duration_s,
                          energy_kj=energy_kj, energy_kwh=energy_kwh,
                          region_code=region.region_code, carbon_g=carbon_g)


def execution_duration_s(device: DeviceSpec, shots: int, per_shot_s: float) -> float:
    """Emulated wall time: configured latency plus a per-shot cost constant."""
    return device.latency_ms / 1000.0 + shots * per_shot_s


def compare_impact(catalog: Iterable[DeviceSpec], duration_s: float,
                   region: RegionIntensity) -> list[tuple[str, ImpactEstimate]]:
    """Ascending carbon order, ties by device id."""
    estimates = [(d.id, estimate(d, duration_s, region)) for d in catalog]
    estimates.sort(key=lambda pair: (pair[1].carbon_g, pair[0]))
    return estimates
