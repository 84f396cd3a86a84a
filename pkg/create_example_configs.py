import sys
from pathlib import Path

import yaml

sys.path.insert(0, '.')

from nullcast.experiments import CATALOGUE
from nullcast.harness import config_template, parse_config_text, validate_config

CONFIG_DIR = Path("configs")

# smaller runs that finish in seconds, for trying things out
QUICK_OVERRIDES = {
    "trials": 200,
    "Q_list": [1, 10],
}


def create_example_configs():
    """Write one YAML config per experiment, plus a quick variant of each Monte Carlo one"""
    CONFIG_DIR.mkdir(exist_ok=True)
    print("🚀 Writing example experiment configs...")

    written, skipped = 0, 0
    for name, entry in CATALOGUE.items():
        targets = [(CONFIG_DIR / f"{name.value}.yaml", config_template(name))]
        if not entry.deterministic:
            data = parse_config_text(config_template(name))
            data.update(QUICK_OVERRIDES)
            quick = validate_config(data)
            targets.append((CONFIG_DIR / f"{name.value}.quick.yaml", _dump(quick)))

        for path, text in targets:
            if path.exists():
                print(f"ℹ️  {path} already exists")
                skipped += 1
                continue
            path.write_text(text)
            print(f"✅ Created {path}")
            written += 1

    print("\n" + "=" * 60)
    print("📊 SUMMARY")
    print("=" * 60)
    print(f"Written: {written}")
    print(f"Skipped: {skipped}")
    print("=" * 60)
    print("\n✨ NEXT STEPS:")
    print("  1. Run one locally: nullcast --config configs/roc_rx.quick.yaml --out results/roc_rx.csv")
    print("  2. Or start the API: uvicorn nullcast.main:app --reload")
    print("  3. Upload a config at POST /api/experiments/config/import")
    print("=" * 60)


def _dump(cfg) -> str:
    return yaml.safe_dump(cfg.model_dump(mode="json"), sort_keys=False)


if __name__ == "__main__":
    create_example_configs()
