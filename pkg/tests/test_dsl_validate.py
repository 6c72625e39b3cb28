import pytest

from treedrive.dsl import PolicyError, load_policy, parse, validate


def check(cond):
    return validate(parse(f'policy "t" {{ if {cond} {{ IDLE }} else {{ SLOWER }} }}'))


def test_valid_condition():
    r = check("lead_gap < 20 and ego_speed > 20")
    assert r.ok and not r.issues


def test_unknown_feature_is_error():
    r = check("lead_distance < 20")
    assert not r.ok
    assert "unknown feature 'lead_distance'" in r.errors[0].message
    assert "line 1" in r.errors[0].location


def test_unknown_function_and_arity():
    assert "unknown function 'sqrt'" in check("sqrt(lead_gap) < 2").errors[0].message
    assert "abs() takes 1" in check("abs(lead_gap, follow_gap) < 2").errors[0].message
    assert "at least 2" in check("min(lead_gap) < 2").errors[0].message


@pytest.mark.parametrize("cond", [
    "lead_gap", "lead_gap + left_exists > 1", "not lead_gap", "left_exists < 3",
    "lead_gap < 1 and 5", "left_exists == 3",
])
def test_type_errors(cond):
    assert not check(cond).ok


def test_unit_mixing_is_only_a_warning():
    r = check("lead_gap < ego_lane")
    assert r.ok
    assert len(r.warnings) == 1 and "mixes units" in r.warnings[0].message


def test_unit_algebra():
    # seconds * m/s = meters, so no warning
    assert not check("lead_gap < ttc_lead * ego_speed").warnings
    assert not check("ttc_lead > lead_gap / (0 - lead_rel_speed)").warnings
    assert check("lead_gap < ttc_lead").warnings
    # bare literals adopt the other side's unit
    assert not check("lead_gap + 5 < 20").warnings


def test_bool_equality_allowed():
    assert check("left_exists == right_exists").ok
    assert check("left_exists != (lead_gap < 3)").ok


def test_unreachable_arms_warn():
    src = ('policy "t" { if 1 < 2 { IDLE } elif lead_gap < 3 { SLOWER } else { FASTER } }')
    r = validate(parse(src))
    assert r.ok
    messages = [w.message for w in r.warnings]
    assert any("arms[0] is always true" in m for m in messages)
    assert any("unreachable else" in m for m in messages)
    r = check("lead_gap < 3 and 2 < 1")
    assert any("always false" in w.message for w in r.warnings)


def test_render_and_load_policy(tmp_path):
    path = tmp_path / "bad.dtp"
    path.write_text('policy "b" { if nope < 1 { IDLE } else { IDLE } }')
    with pytest.raises(PolicyError) as info:
        load_policy(path)
    assert "error" in str(info.value) and "nope" in str(info.value)
    assert "error" in info.value.report.render()


def test_shipped_policies_validate(conservative_path, aggressive_path):
    for path in (conservative_path, aggressive_path):
        assert validate(load_policy(path)).ok
