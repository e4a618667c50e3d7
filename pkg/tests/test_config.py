import copy
import json

import pytest
from testapp.systems import EXAMPLE_DOCUMENT, LINEAR_DECAY_DOCUMENT

from hilfer_impulse.config import ESTIMATE, build_config, load_config, validate_document
from hilfer_impulse.exceptions import ConfigError, ParameterError, ScheduleError, UnknownIdentifier
from hilfer_impulse.special import gamma
from hilfer_impulse.systems import Mode


def document(base=EXAMPLE_DOCUMENT, **changes):
    result = copy.deepcopy(base)
    result.update(changes)
    return result


def test_example_document():
    config = build_config(document())
    assert config.system.mode == Mode.NON_INSTANTANEOUS
    assert config.system.order.lam == pytest.approx(1)
    assert config.system.schedule.p_points == (0.5, 1.5, 2.5)
    assert len(config.system.impulse_maps) == 3
    assert config.mesh.points_per_interval == 64
    assert config.contraction is None
    assert config.lyapunov is None
    assert config.output_csv is None


def test_lyapunov_section():
    config = build_config(document(LINEAR_DECAY_DOCUMENT, certificate={"h": 2, "envelope_param": "nu"}))
    assert config.lyapunov.alpha3 == 1
    assert config.grid_stride == 1
    assert config.h == 2
    assert config.envelope_param == "nu"
    assert config.mesh.grading == 2


@pytest.mark.parametrize(
    "changes",
    [
        {"colour": "blue"},
        {"mode": "sometimes"},
        {"order": {"mu": 1.0, "nu": 0.5}},
        {"order": {"mu": 0.5}},
        {"mesh": {"points_per_interval": 4}},
        {"contraction": {"L": -1, "I": []}},
        {"contraction": {"L": "guess", "I": []}},
    ],
)
def test_schema_rejections(changes):
    with pytest.raises(ConfigError, match="Invalid configuration"):
        build_config(document(**changes))


def test_schema_names_the_field():
    with pytest.raises(ConfigError, match="order/nu"):
        validate_document(document(order={"mu": 0.5, "nu": 2}))


def test_schedule_errors():
    # t_1 before p_0
    with pytest.raises(ScheduleError):
        build_config(document(schedule={"t_points": [0, 0.4], "p_points": [0.5, 1], "horizon": 2}))
    # Not enough impulse maps for the schedule
    with pytest.raises(ScheduleError):
        build_config(document(impulse_maps=["x"]))


def test_bad_expressions():
    with pytest.raises(ConfigError, match="In g"):
        build_config(document(g="t +"))
    with pytest.raises(UnknownIdentifier):
        build_config(document(impulse_maps=["x", "x + z", "x"]))


def test_integral_initial_condition():
    weighted = build_config(document(order={"mu": 0.4, "nu": 0.5}, x0=2.0))
    integral = build_config(document(order={"mu": 0.4, "nu": 0.5}, x0=2.0, x0_form="integral"))
    lam = weighted.system.lam
    assert weighted.system.x0 == 2.0
    assert integral.system.x0 == pytest.approx(2.0 / gamma(lam))


def test_contraction_section():
    config = build_config(document(contraction={"L": ESTIMATE, "I": [0.1, 0.2, 0.3], "p": 0.8}))
    assert config.contraction.L == ESTIMATE
    assert config.contraction.impulses == [0.1, 0.2, 0.3]
    assert config.contraction.p == 0.8
    assert config.contraction.box == (-10.0, 10.0)


def test_generalized_defaults_to_system_initial_value():
    config = build_config(
        document(
            order={"mu": 0.4, "nu": 0.5},
            x0=1.5,
            generalized={"m": "abs(x)", "m0": 1, "c": 1, "gamma": 0.5},
        )
    )
    assert config.generalized.integral_ic == pytest.approx(1.5 * gamma(config.system.lam))
    explicit = build_config(
        document(generalized={"m": "abs(x)", "m0": 1, "c": 1, "gamma": 0.5, "integral_ic": 3})
    )
    assert explicit.generalized.integral_ic == 3


def test_lyapunov_ranges():
    lyapunov = dict(LINEAR_DECAY_DOCUMENT["lyapunov"], alpha4=2)
    with pytest.raises(ParameterError):
        build_config(document(LINEAR_DECAY_DOCUMENT, lyapunov=lyapunov))


def test_load_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(document(output={"csv": "out.csv"})))
    assert load_config(path).output_csv == "out.csv"
    with pytest.raises(ConfigError, match="Cannot read"):
        load_config(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(broken)
