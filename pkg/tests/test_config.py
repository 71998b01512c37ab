from __future__ import annotations

import pytest
import yaml

from isingbench.config import ConfigError, load_config, parse_config
from isingbench.instances import SquareLatticeSpec, gen_planted_square, write_instance

BASE = {
    "units": "steps",
    "runs": 100,
    "instance_sets": [{"name": "sq4", "generator": {"type": "square", "L": 4, "mode": "mattis", "count": 2}}],
    "solvers": [{"kind": "sa", "grid": {"n_steps": [2, 4]}}],
}


def test_minimal():
    cfg = parse_config(BASE)
    assert cfg.instance_sets[0].L == 4 and len(cfg.instance_sets[0].problems) == 2
    assert cfg.solvers[0].grid == {"n_steps": [2, 4]} and cfg.runs == 100


def test_overrides_merge_with_defaults():
    data = dict(BASE, solvers=[{"kind": "sim-cim", "label": "cim", "extras": {"x_sat": 2},
                                "schedules": {"noise": {"kind": "constant", "value": 0.05}}}])
    p = parse_config(data).solvers[0].params_for(4)
    assert p.extras["x_sat"] == 2.0
    assert p.schedules["noise"].params["value"] == 0.05
    assert p.schedules["pump"].kind == "tanh-ramp"


@pytest.mark.parametrize("mutate, fragment", [
    (lambda d: d.update(colour="red"), "unknown key 'colour'"),
    (lambda d: d.update(units="hours"), "units"),
    (lambda d: d.update(solvers=[]), "'solvers' must be a non-empty list"),
    (lambda d: d["solvers"][0].update(kind="quantum"), "unknown kind"),
    (lambda d: d["solvers"][0].update(integrator="leapfrog"), "leapfrog"),
    (lambda d: d["instance_sets"][0]["generator"].update(shape="hex"), "unknown key 'shape'"),
    (lambda d: d["instance_sets"][0].update(files="*.txt"), "exactly one"),
])
def test_errors(mutate, fragment):
    data = yaml.safe_load(yaml.safe_dump(BASE))
    mutate(data)
    with pytest.raises(ConfigError) as info:
        parse_config(data)
    assert any(fragment in p for p in info.value.problems)


def test_all_problems_reported():
    data = dict(BASE, colour=1, shape=2)
    with pytest.raises(ConfigError) as info:
        parse_config(data)
    assert len(info.value.problems) == 2


def test_files_relative_to_config(tmp_path):
    (tmp_path / "inst").mkdir()
    for s in range(3):
        write_instance(gen_planted_square(SquareLatticeSpec(4, seed=s), "mattis"), tmp_path / "inst" / f"{s}.txt")
    data = dict(BASE, instance_sets=[{"name": "files", "files": "inst/*.txt"}])
    (tmp_path / "bench.yaml").write_text(yaml.safe_dump(data))
    cfg = load_config(tmp_path / "bench.yaml")
    assert len(cfg.instance_sets[0].problems) == 3 and cfg.instance_sets[0].L == 4
    assert cfg.base_dir == tmp_path


def test_no_matching_files(tmp_path):
    data = dict(BASE, instance_sets=[{"files": "none/*.txt"}])
    with pytest.raises(ConfigError):
        parse_config(data, tmp_path)


def test_malformed_yaml(tmp_path):
    (tmp_path / "bad.yaml").write_text("solvers: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "bad.yaml")
