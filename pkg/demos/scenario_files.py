"""
Scenario files and the kernel language
======================================

Scenarios can be written as JSON; kernels use ``+ - * /`` and parentheses.
"""

# %%
import json
import tempfile
from pathlib import Path

from mcve import exprlang
from mcve.scenarios import ScenarioError, load_scenario, serialize, generic_example

tree = exprlang.parse("(y + m_nom) / (1 + k*(a - b)) - m_ref")
print(tree)
print(exprlang.unparse(tree))
print(sorted(exprlang.free_variables(tree)))

# %%
spec = {
    "id": "thermometer",
    "kernel": "(1 + alpha*(T - 20))*y + offset",
    "type_b": [
        {"name": "alpha", "dist": {"uniform": {"lower": 0.001, "upper": 0.003}}},
        {"name": "T", "dist": {"gaussian": {"mean": 22.0, "variance": 0.25}}},
        {"name": "offset", "dist": {"gaussian": {"mean": 0.0, "variance": 0.0004}}},
    ],
    "data": {"mean": 10.02, "count": 10, "variance": 0.0025},
    "default_y0": 10.0,
    "units": "V",
}
path = Path(tempfile.mkdtemp()) / "thermometer.json"
path.write_text(json.dumps(spec, indent=2))
scenario = load_scenario(path)
print(scenario)

# %%
# The same file drives the command line:
#   mcve run --scenario thermometer.json --engine mc-ve --n 100000 --seed 1

# %%
bad = serialize(generic_example())
bad["kernel"] = "y*y"
path.write_text(json.dumps(bad))
try:
    load_scenario(path)
except ScenarioError as exc:
    print(exc.kind, "->", exc)
