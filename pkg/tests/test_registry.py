import pytest

from rcodelin import registry, symmetry
from rcodelin.sampling import FAIL, PASS, SamplingConfig

ENTRIES = {e.id: e for e in registry.registry()}


def test_entries():
    assert list(ENTRIES) == ["E1", "E2", "E3", "E4", "E5", "N1"]


@pytest.mark.parametrize("example_id", list(ENTRIES))
def test_every_entry_behaves_as_recorded(example_id):
    result = registry.run_example(ENTRIES[example_id])
    bad = [c["name"] for c in result["checks"] if c["verdict"] != PASS]
    assert not bad
    assert result["verdict"] == PASS


def expected(example_id):
    return {c.name: c.expected for c in ENTRIES[example_id].checks}


def test_cubic_decay_expectations():
    e = expected("E4")
    assert e["linearizable"] == PASS
    assert e["symmetry d/dx"] == PASS and e["symmetry x d/dx - u d/du"] == PASS
    assert e["classification"] == symmetry.T1_9
    assert e["map to the canonical cubic form"] == PASS
    assert e["linearizing map to U''=0"] == PASS
    assert e["complex general solution"] == PASS
    assert e["identity map is not linearizing"] == FAIL


def test_parabolic_flags_the_printed_square_root_solution():
    e = expected("E5")
    assert e["printed square-root solution for w = 1/t"] == FAIL
    assert e["derived quadratic solution for w = 1/t"] == PASS


def test_negative_control_expects_failures():
    assert set(expected("N1").values()) == {FAIL}


def test_find_is_case_insensitive():
    assert registry.find("e4").id == "E4"
    with pytest.raises(KeyError):
        registry.find("E9")


def test_errors_are_reported_not_raised():
    def boom(cfg):
        raise RuntimeError("broken")

    ex = registry.Example("X1", "broken", [registry.Check("boom", PASS, boom)])
    out = registry.run_example(ex)
    assert out["checks"][0]["outcome"] == "error"
    assert out["verdict"] == FAIL


def test_seed_changes_do_not_flip_verdicts():
    out = registry.run_example(ENTRIES["E4"], SamplingConfig(seed=1234))
    assert out["verdict"] == PASS
