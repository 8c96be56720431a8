"""Run the bundled configs end to end and write one report per config"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from soficlab.config import (
    ExperimentConfig,
    GraphOfGroupsConfig,
    NormalFormConfig,
    VerifyConfig,
    load_config,
)
from soficlab.errors import SoficLabError
from soficlab.report import emit_csv, emit_json, run_ballgroup, run_build, run_gog, run_nf, run_verify

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"
OUTPUT_DIR = Path("acceptance_output")

RUNS = [
    ("verify_z3.json", VerifyConfig, run_verify),
    ("free_product.json", ExperimentConfig, run_build),
    ("direct_product.json", ExperimentConfig, run_build),
    ("degraded_free_product.json", ExperimentConfig, run_build),
    ("nf_path.json", NormalFormConfig, run_nf),
    ("gog_amalgam.json", GraphOfGroupsConfig, run_gog),
    ("gog_hnn.json", GraphOfGroupsConfig, run_gog),
]

if "--full" in sys.argv:
    RUNS.append(("path3.json", ExperimentConfig, run_build))
    RUNS.append(("shift_free_group.json", ExperimentConfig, run_build))

failures = 0
for name, model, runner in RUNS:
    stem = Path(name).stem
    try:
        report = runner(load_config(model, CONFIG_DIR / name))
    except SoficLabError as e:
        print(f"❌ {name}: {e}")
        failures += 1
        continue
    emit_json(report, OUTPUT_DIR / f"{stem}.json")
    emit_csv(report, OUTPUT_DIR / f"{stem}.csv")
    mark = "✓" if report.passed else "❌"
    print(f"{mark} {name} ({report.seconds:.2f}s)")
    failures += not report.passed

report = run_ballgroup(2, 4)
emit_json(report, OUTPUT_DIR / "ballgroup.json")
print(f"{'✓' if report.passed else '❌'} ballgroup s=2 R=4 ({report.body['words_checked']} words)")
failures += not report.passed

print(f"\n{len(RUNS) + 1 - failures}/{len(RUNS) + 1} runs passed; reports in {OUTPUT_DIR}/")
sys.exit(1 if failures else 0)
