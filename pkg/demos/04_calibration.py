#!/usr/bin/env python3
"""Calibration walkthrough: from the raw base geometry to the shipped config.

The base geometry carries placeholder preload and end-stop travel. Two
independent bisections set them against scalar targets: the preload angle
against a 20 N triggering force, the travel limits against a 0.40 ratio
step, both at -88 degrees. Re-running the calibration on its own output is
a fixed point within the stated tolerances.
"""

import math
import pathlib

import lbvt

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

theta = math.radians(-88.0)
base = lbvt.load_config(lbvt.base_config_path())

print("base geometry:")
print(f"  preload:       {math.degrees(base.alpha_preload):.3f} deg")
print(f"  travel limit:  {math.degrees(base.joint_open_limit[0]):.3f} deg")
print(f"  trigger:       {lbvt.triggering_force(base, theta):.2f} N")
print(f"  ratio step:    {lbvt.ratio_step_direct(base, theta):.4f}")

calibrated = lbvt.calibrate(base, target_trigger=20.0, target_ratio_step=0.40,
                            theta=theta)

print("calibrated:")
print(f"  preload:       {math.degrees(calibrated.alpha_preload):.3f} deg")
print(f"  travel limit:  {math.degrees(calibrated.joint_open_limit[0]):.3f} deg")
print(f"  trigger:       {lbvt.triggering_force(calibrated, theta):.2f} N")
print(f"  ratio step:    {lbvt.ratio_step_direct(calibrated, theta):.4f}")

again = lbvt.calibrate(calibrated, 20.0, 0.40, theta)
drift = abs(again.alpha_preload - calibrated.alpha_preload)
print(f"fixed point: preload drift on re-calibration {drift:.2e} rad")

out = OUT / "calibrated_config.json"
lbvt.save_config(calibrated, out, provenance={
    "source": "demos/04_calibration.py",
    "targets": {"triggering_force_N": 20.0, "ratio_step": 0.40, "theta_deg": -88.0},
})
print(f"wrote {out}")
