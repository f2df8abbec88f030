import hashlib
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hhlab import cli
from hhlab.harness import (SuiteConfig, build_plan, dumps_report, paper_counterexample,
                           random_symmetric, run_suite, save_report, strip_timing)
from hhlab.matcore import spectral_decompose, write_matrix
from hhlab.scalarfn import Convexity

FIXTURE_SHA256 = (
    "a325b423e43a1978d7c3ac1648e2789aca2d49778edaf92f8b29e294c23d0541",
    "41e57a811ac9776a5931d1ac2f1f354df344c042329b13e20b4b516db8b78410",
)


def _sha(m):
    return hashlib.sha256(np.ascontiguousarray(m, dtype="<f8").tobytes()).hexdigest()


def test_fixture_values_and_digests():
    a, b, f = paper_counterexample()
    np.testing.assert_array_equal(a, [[2, 1], [1, 1]])
    np.testing.assert_array_equal(b, [[1, 0], [0, 0]])
    assert f.name == "cube" and f.convexity is Convexity.CONVEX
    assert (_sha(a), _sha(b)) == FIXTURE_SHA256


# -- random ensembles -----------------------------------------------------------------

def test_random_symmetric_one_by_one():
    a = random_symmetric(1, (2.0, 2.0 + 1e-12), 5)
    assert a.shape == (1, 1) and a[0, 0] == pytest.approx(2.0, abs=1e-11)


def test_random_symmetric_is_deterministic():
    np.testing.assert_array_equal(random_symmetric(5, (0.0, 1.0), 77), random_symmetric(5, (0.0, 1.0), 77))
    assert not np.array_equal(random_symmetric(5, (0.0, 1.0), 77), random_symmetric(5, (0.0, 1.0), 78))


@given(st.integers(1, 10), st.integers(0, 2**63 - 1))
def test_random_symmetric_spectrum_in_window(dim, seed):
    w = spectral_decompose(random_symmetric(dim, (0.0, 3.0), seed)).eigenvalues
    assert w[0] >= -1e-9 and w[-1] <= 3.0 + 1e-9


def test_random_symmetric_signed_window_bounds_abs():
    w = spectral_decompose(random_symmetric(8, (0.5, 2.0), 3, signed=True)).eigenvalues
    assert np.all((np.abs(w) >= 0.5 - 1e-9) & (np.abs(w) <= 2.0 + 1e-9))
    assert w[0] < 0 < w[-1]


@pytest.mark.parametrize("window", [(1.0, 1.0), (2.0, 1.0)])
def test_random_symmetric_rejects_bad_window(window):
    with pytest.raises(ValueError):
        random_symmetric(2, window, 0)


# -- config ---------------------------------------------------------------------------

@pytest.mark.parametrize("bad", [
    {"dims": []}, {"dims": [0]}, {"instances_per_checker": 0}, {"spectrum_window": [2, 1]},
    {"node_count": 1}, {"checkers": ["nope"]}, {"tolerance": 0.0},
])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        SuiteConfig.from_dict(bad)


def test_config_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown config keys"):
        SuiteConfig.from_dict({"sed": 1})


def test_plan_filters_by_function_names():
    plan = build_plan(SuiteConfig(function_names=["square"], checkers=["hh", "t21", "cor22"]))
    assert [(e["checker"], e["f"], e.get("g")) for e in plan] == [("hh", "square", None),
                                                                  ("cor22", "square", "square")]


# -- suite ----------------------------------------------------------------------------

def test_minimal_scalar_suite():
    rep = run_suite(SuiteConfig(dims=[1], instances_per_checker=1, function_names=["square"],
                                checkers=["hh"]))
    (res,) = rep["results"]
    assert res["passed"] == 1 and rep["overall"]
    assert rep["counterexample"]["reproduced"] and rep["schema"] == 1


def test_merely_convex_f_in_nabla_is_exploratory():
    cfg = SuiteConfig(dims=[2], instances_per_checker=3, function_names=["cube"],
                      checkers=["nabla"], lambdas=[0.3])
    res = run_suite(cfg)["results"][0]
    assert res["exploratory"] == 3 and res["passed"] == 0
    assert any("operator convex" in w for w in res["warnings"])


def test_custom_polynomial_and_window(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "seed": 9, "dims": [2, 3], "instances_per_checker": 4, "checkers": ["hh", "grad"],
        "function_names": ["q"], "custom_functions": {"q": [1.0, -1.0, 2.0]},
        "function_windows": {"q": [-1.0, 1.0]},
    }))
    rep = run_suite(SuiteConfig.from_json(cfg_path))
    assert [r["combo"]["checker"] for r in rep["results"]] == ["hh", "grad"]
    assert rep["results"][1]["passed"] + rep["results"][1]["exploratory"] == 4


def test_suite_is_deterministic_without_timing():
    cfg = SuiteConfig(seed=5, dims=[2, 3], instances_per_checker=3)
    r1, r2 = run_suite(cfg), run_suite(cfg)
    assert dumps_report(strip_timing(r1)) == dumps_report(strip_timing(r2))
    assert "timing" in r1 and r1["timing"]["total"] > 0


def test_reports_are_never_overwritten(tmp_path):
    rep = {"config": {"seed": 3}, "schema": 1}
    p1, p2 = save_report(rep, tmp_path), save_report(rep, tmp_path)
    assert p1 != p2 and p1.name.startswith("seed3-")
    assert json.loads(p1.read_text()) == rep


# -- command line ---------------------------------------------------------------------

def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_counterexample(capsys):
    code, out, _ = run_cli(capsys, "counterexample")
    doc = json.loads(out)
    assert code == 0 and doc["reproduced"] and doc["relations"] == ["Incomparable", "Incomparable"]


def test_cli_check_from_files(tmp_path, capsys):
    a, b, _ = paper_counterexample()
    write_matrix(tmp_path / "a.json", a)
    write_matrix(tmp_path / "b.json", b)
    code, out, err = run_cli(capsys, "check", "--theorem", "hh", "--f", "cube",
                             "--a", str(tmp_path / "a.json"), "--b", str(tmp_path / "b.json"))
    assert code == 1 and json.loads(out)["overall"] is False
    assert "warning" in err
    code, out, _ = run_cli(capsys, "check", "--theorem", "hh", "--f", "square",
                           "--a", str(tmp_path / "a.json"), "--b", str(tmp_path / "b.json"))
    assert code == 0


@pytest.mark.parametrize("theorem, extra", [
    ("hh", ["--f", "inv"]), ("t21", ["--f", "cube", "--g", "square", "--alpha", "2"]),
    ("cor22", ["--f", "exp", "--g", "square"]), ("norm", ["--f", "exp", "--signed"]),
    ("nabla", ["--f", "square", "--lambda", "0.25"]),
    ("reverse", ["--f", "cube", "--g", "cube", "--alpha", "1"]), ("grad", ["--f", "exp"]),
])
def test_cli_check_random(capsys, theorem, extra):
    code, out, _ = run_cli(capsys, "check", "--theorem", theorem, *extra,
                           "--random-dim", "3", "--count", "2", "--seed", "4")
    docs = json.loads(out)
    assert code == 0 and len(docs) == 2 and all(d["overall"] for d in docs)


@pytest.mark.parametrize("argv", [
    ["check", "--theorem", "t21", "--f", "cube", "--random-dim", "2"],
    ["check", "--theorem", "t21", "--f", "cube", "--g", "cube", "--alpha", "-1", "--random-dim", "2"],
    ["check", "--theorem", "hh", "--f", "nosuch", "--random-dim", "2"],
    ["check", "--theorem", "hh", "--f", "square"],
    ["check", "--theorem", "bogus", "--f", "square"],
    ["bounds", "--kind", "alpha", "--f", "square", "--g", "identity", "--m", "-1", "--M", "1"],
    ["suite", "--config", "/nonexistent/cfg.json"],
])
def test_cli_usage_errors_exit_2(capsys, argv):
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_cli_bounds(capsys):
    code, out, _ = run_cli(capsys, "bounds", "--kind", "beta", "--f", "square", "--g", "square",
                           "--alpha", "1", "--m", "0", "--M", "2")
    doc = json.loads(out)
    assert code == 0 and doc["value"] == pytest.approx(1.0) and doc["method"] == "golden-section"
    code, out, _ = run_cli(capsys, "bounds", "--kind", "xi", "--f", "square", "--random-dim", "2")
    doc = json.loads(out)
    assert doc["kind"] == "Xi" and doc["value"] >= 0


def test_cli_suite_writes_report(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dims": [2], "instances_per_checker": 2, "checkers": ["hh"]}))
    runs = tmp_path / "runs"
    code, out, err = run_cli(capsys, "suite", "--config", str(cfg), "--runs-dir", str(runs))
    assert code == 0 and json.loads(out)["overall"]
    (saved,) = runs.iterdir()
    assert json.loads(saved.read_text()) == json.loads(out)
