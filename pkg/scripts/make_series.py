#!/usr/bin/env python3
"""Regenerate the synthetic load/availability series shipped under scenarios/.

The shapes are synthetic stand-ins: a daily sinusoidal electricity load with
weekday modulation, a heat load peaking in the early hours, and a clear-sky
solar availability bell with day-to-day weather scaling.  Run from the repo
root: python scripts/make_series.py
"""

import numpy as np
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "scenarios"
SEED = 7


def build(hours: int, rng) -> dict:
    t = np.arange(hours)
    hour_of_day = t % 24
    day = t // 24

    elec = (40.0
            + 12.0 * np.sin((hour_of_day - 9) / 24 * 2 * np.pi)
            + 4.0 * np.sin(day / 7 * 2 * np.pi)
            + rng.normal(0, 1.5, hours))
    heat = (24.0
            + 9.0 * np.cos(hour_of_day / 24 * 2 * np.pi)
            + 3.0 * np.sin(day / 7 * 2 * np.pi + 1.0)
            + rng.normal(0, 1.0, hours))
    weather = 0.55 + 0.45 * rng.uniform(size=hours // 24 + 1)
    sun = np.maximum(0.0, np.sin((hour_of_day - 6) / 12 * np.pi))
    pv = np.where((hour_of_day >= 6) & (hour_of_day <= 18),
                  sun * weather[day], 0.0)
    return {
        "load_electricity": np.clip(elec, 5.0, None),
        "load_heat": np.clip(heat, 2.0, None),
        "availability_pv": np.clip(pv, 0.0, 1.0),
    }


def write(path: Path, series: dict) -> None:
    names = list(series)
    rows = [",".join(names)]
    n = len(series[names[0]])
    for i in range(n):
        rows.append(",".join(f"{series[k][i]:.6f}" for k in names))
    path.write_text("\n".join(rows) + "\n")
    print(f"wrote {path} ({n} steps)")


def main() -> None:
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(SEED)
    full = build(168, rng)
    write(OUT / "series_168.csv", full)
    write(OUT / "series_48.csv", {k: v[:48] for k, v in full.items()})


if __name__ == "__main__":
    main()
