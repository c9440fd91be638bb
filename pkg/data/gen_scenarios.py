#!/usr/bin/env python3
"""
Scenario File Generator

Writes the built-in reference scenarios as TOML files under data/scenarios
so they can be edited and replayed with the run command.
"""

from pathlib import Path

from cli.presets import DESCRIPTIONS, SPECS, preset_scenario
from cli.scenario_file import dump_scenario

SCENARIO_DIR = Path("data/scenarios")


def main():
    print("Generating scenario files...")
    SCENARIO_DIR.mkdir(parents=True, exist_ok=True)

    for name in SPECS:
        path = SCENARIO_DIR / f"{name}.toml"
        text = dump_scenario(preset_scenario(name, seed=0), DESCRIPTIONS[name])
        path.write_text(text)
        print(f"Saved {path}")

    print(f"Generated {len(SPECS)} scenario files")


if __name__ == "__main__":
    main()
