from __future__ import annotations

import textwrap

import pytest

from aplab.cli import preset_names, preset_text
from aplab.config import parse_config
from aplab.errors import ParseError, ValidationError
from aplab.functions import Kind, TrigSum
from aplab.periods import DEFAULT_EPSILONS

MINIMAL = textwrap.dedent(
    """
    name: minimal
    interval: {kind: HalfLine, truncation_radius: 50}
    step: 2*pi/100
    functions:
      f: {kind: TrigSum, amplitudes: [1], frequencies: [1]}
    tasks:
      - {name: ap, type: classify, function: f, class: AP}
    """
)


def problems(text):
    with pytest.raises(ValidationError) as exc:
        parse_config(text)
    return exc.value.problems


def test_minimal_config_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert isinstance(cfg.functions["f"], TrigSum)
    (task,) = cfg.tasks
    assert task.grid.interval.kind is Kind.HALF_LINE
    assert task.grid.norm == "sup"
    assert task.budget.epsilons == DEFAULT_EPSILONS
    assert task.params["p"] == 1


def test_exponent_below_one():
    text = MINIMAL.replace("class: AP}", "class: APSp, p: 0.5}")
    assert any("exponent below 1" in p for p in problems(text))


def test_undefined_function_is_named():
    text = MINIMAL.replace("function: f,", "function: g,")
    msgs = problems(text)
    assert any("'g'" in p and "undefined" in p for p in msgs)


def test_all_problems_reported_together():
    text = MINIMAL.replace("function: f, class: AP}", "function: g, class: Nope}")
    text = text.replace("step: 2*pi/100", "step: -1")
    assert len(problems(text)) >= 3


def test_duplicate_task_names():
    text = MINIMAL + "  - {name: ap, type: classify, function: f, class: AP}\n"
    assert any("duplicate" in p for p in problems(text))


def test_unknown_key():
    text = MINIMAL.replace("name: minimal", "name: minimal\ncolour: blue")
    assert any("colour" in p for p in problems(text))


def test_parse_error_has_line():
    with pytest.raises(ParseError) as exc:
        parse_config("tasks: [\n  {name: a\n")
    assert exc.value.line is not None


def test_empty_task_list_is_valid():
    cfg = parse_config("name: nothing\ntasks: []\n")
    assert cfg.tasks == []


def test_task_grid_override():
    text = MINIMAL.replace("class: AP}", "class: AP, step: 0.1, interval: {kind: FullLine, truncation_radius: 5}}")
    grid = parse_config(text).tasks[0].grid
    assert grid.step == 0.1 and grid.interval.kind is Kind.FULL_LINE


def test_missing_grid():
    text = MINIMAL.replace("interval: {kind: HalfLine, truncation_radius: 50}\n", "").replace("step: 2*pi/100\n", "")
    assert any("no interval/step" in p for p in problems(text))


def test_invalid_weyl_exponents_rejected():
    text = textwrap.dedent(
        """
        interval: {kind: HalfLine, truncation_radius: 50}
        step: 0.1
        functions:
          F: {expr: {kind: Argument}}
          x: {kind: TrigSum, amplitudes: [1], frequencies: [1]}
        compacts:
          K: {lower: [-1], upper: [1]}
        tasks:
          - {name: w, type: verify, theorem: weyl, F: F, x: x, K: K, exponents: {p: 2, r: 1.5}}
        """
    )
    assert any("r >=" in p for p in problems(text))


def test_role_type_checks():
    text = textwrap.dedent(
        """
        interval: {kind: HalfLine, truncation_radius: 50}
        step: 0.1
        functions:
          F: {kind: TrigSum, amplitudes: [1], frequencies: [1]}
          x: {expr: {kind: Argument}}
        compacts:
          K: {lower: [-1], upper: [1]}
        tasks:
          - {name: s, type: verify, theorem: stepanov, F: F, x: x, K: K, exponents: {p: 1, r: 2}}
        """
    )
    msgs = problems(text)
    assert any("two-parameter" in p for p in msgs)
    assert any("one-parameter" in p for p in msgs)


def test_config_hash_is_stable_and_sensitive():
    a = parse_config(MINIMAL)
    assert a.config_hash == parse_config(MINIMAL).config_hash
    assert a.config_hash != parse_config(MINIMAL.replace("50}", "60}")).config_hash


def test_with_epsilons_overrides_tasks():
    cfg = parse_config(MINIMAL).with_epsilons((0.2,))
    assert cfg.tasks[0].budget.epsilons == (0.2,)


@pytest.mark.parametrize("name", preset_names())
def test_presets_parse(name):
    cfg = parse_config(preset_text(name))
    assert cfg.name == name
    assert cfg.tasks
