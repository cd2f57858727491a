from causalicm.cate import CateEstimate
from causalicm.errors import ValidationError
from causalicm.estimators import MethodSettings, estimator_names, get_estimator, humanize_list
import pytest


def test_registered_ids():
    assert estimator_names() == ["causal_icm", "experimental_grounding", "gp_exp", "gp_obs"]
    assert "icm" in estimator_names(aliases=True)


def test_aliases_resolve_to_the_same_function():
    assert get_estimator("icm") is get_estimator("causal_icm")
    assert get_estimator("eg") is get_estimator("experimental_grounding")


def test_unknown_id_lists_known_ones():
    with pytest.raises(ValidationError) as info:
        get_estimator("lasso")
    assert "gp_obs" in info.value.message


def test_humanize_list():
    assert humanize_list(["a"]) == "a"
    assert humanize_list(["a", "b"]) == "a and b"
    assert humanize_list(["a", "b", "c"]) == "a, b, and c"


def test_settings_validation():
    assert MethodSettings(rho=0.3).rho == 0.3
    assert MethodSettings().replace(seed=4).seed == 4
    with pytest.raises(ValidationError):
        MethodSettings(kernel_family="linear")
    with pytest.raises(ValidationError):
        MethodSettings(rho=2.0)
    with pytest.raises(ValidationError):
        MethodSettings(tuning_mode="lazy")


@pytest.mark.parametrize("name", ["causal_icm", "gp_exp", "gp_obs", "experimental_grounding"])
def test_every_estimator_predicts(small_uni1, name):
    rct, obs, _ = small_uni1
    settings = MethodSettings(rho=0.5, restarts=1)
    estimate = get_estimator(name)(rct, obs, settings).predict([[-1.0], [0.0], [1.0]], 0.9)
    assert isinstance(estimate, CateEstimate)
    assert len(estimate) == 3
    assert all(p.ci_low <= p.mean <= p.ci_high for p in estimate)
