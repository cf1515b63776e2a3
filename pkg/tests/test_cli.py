import json

import pytest

from strposet import (DomainSpec, GeneratorParams, PosetFragment, StrIso,
                      affine_plane_fragment, corrupt_str_iso, cusp_fragment,
                      dumps_fragment, finite_node, induce_str_iso,
                      load_fragment, random_fragment, relabel, save_fragment)
from strposet.cli import main


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    """Fragment and map files shared by the verb tests."""
    d = tmp_path_factory.mktemp("cli")
    frags = {
        "f0": PosetFragment(3, 2, [(0, 0), (0, 1), (1, 0), (1, 1), (2, 0)],
                            ["a", "b", "c"], ["d", "e"]),
        "f3": cusp_fragment(),
        "ag21": affine_plane_fragment(2, 1),
        "p3": random_fragment(GeneratorParams(
            n1=12, n2=3, planted_pairs_per_point=3, seed=1)),
    }
    paths = {}
    for name, frag in frags.items():
        paths[name] = str(d / f"{name}.json")
        save_fragment(frag, paths[name])

    relabeled, rho = relabel(frags["p3"], seed=7)
    paths["p3y"] = str(d / "p3y.json")
    save_fragment(relabeled, paths["p3y"])
    phi = induce_str_iso(rho)
    paths["map"] = str(d / "map.json")
    with open(paths["map"], "w", encoding="utf-8") as fh:
        json.dump(phi.to_json(), fh)
    paths["map_bad"] = str(d / "map_bad.json")
    with open(paths["map_bad"], "w", encoding="utf-8") as fh:
        json.dump(corrupt_str_iso(phi, seed=0).to_json(), fh)
    paths["dir"] = d
    return paths


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert err == ""
    return code, json.loads(out)


# -- gen ----------------------------------------------------------------------


def test_gen_cusp_stdout(capsys):
    code, out, err = run(capsys, "gen", "--model", "cusp")
    assert code == 0 and err == ""
    assert out == dumps_fragment(cusp_fragment())


def test_gen_writes_file(capsys, files):
    target = str(files["dir"] / "gen.json")
    code, out, _ = run(capsys, "gen", "--model", "cusp", "-o", target)
    assert code == 0 and out == ""
    with open(target, encoding="utf-8") as fh:
        assert fh.read() == dumps_fragment(cusp_fragment())


def test_gen_affine(capsys):
    code, out, _ = run(capsys, "gen", "--model", "affine", "-p", "3", "-d", "1")
    assert code == 0
    assert out == dumps_fragment(affine_plane_fragment(3, 1))


def test_gen_random_deterministic(capsys):
    argv = ("gen", "--model", "random", "--n1", "10", "--n2", "3",
            "--seed", "5")
    code, first, _ = run(capsys, *argv)
    assert code == 0
    assert run(capsys, *argv)[1] == first
    assert run(capsys, *argv[:-1], "6")[1] != first


def test_gen_config_file_with_flag_override(capsys, files):
    cfg = str(files["dir"] / "params.json")
    with open(cfg, "w", encoding="utf-8") as fh:
        json.dump({"n1": 10, "n2": 3, "seed": 0}, fh)
    _, from_cfg, _ = run(capsys, "gen", "--model", "random",
                         "--config", cfg, "--seed", "5")
    _, from_flags, _ = run(capsys, "gen", "--model", "random",
                           "--n1", "10", "--n2", "3", "--seed", "5")
    assert from_cfg == from_flags


@pytest.mark.parametrize("argv,fragment_of_err", [
    (("gen", "--model", "random", "--n2", "3"), "needs --n1"),
    (("gen", "--model", "random", "--n1", "4", "--n2", "3",
      "--planted", "3"), "too small"),
    (("gen", "--model", "affine", "-p", "7"), "p must be one of"),
    (("gen", "--model", "random", "--config", "/nonexistent.json",
      "--n1", "8", "--n2", "3"), "/nonexistent.json"),
])
def test_gen_rejects(capsys, argv, fragment_of_err):
    code, out, err = run(capsys, *argv)
    assert code == 3 and out == ""
    assert err.startswith("error: ") and fragment_of_err in err


# -- check --------------------------------------------------------------------


def test_check_cusp_passes_with_survey_failures(capsys, files):
    code, data = run_json(capsys, "check", files["f3"])
    assert code == 0 and data["ok"] is True
    assert data["structure"]["ok"] is True
    assert {"S": ["P"], "T": ["m"]} in data["p5_survey"]["witnesses"]
    assert data["battery"]["passed"] is False
    names = {c["condition"]: c["holds"] for c in data["conditions"]}
    assert names["J1"] and names["J2"] and names["P1"]


def test_check_threshold_sensitivity(capsys, files):
    # two curves of F0 meet in two points, so the pair threshold fails
    code, data = run_json(capsys, "check", files["f0"])
    assert code == 1 and data["ok"] is False
    code, data = run_json(capsys, "check", files["f0"], "--k", "1")
    assert code == 0 and data["ok"] is True


def test_check_bad_inputs(capsys, files):
    code, _, err = run(capsys, "check", "/no/such/file.json")
    assert code == 3 and "no such file" in err
    garbage = str(files["dir"] / "garbage.json")
    with open(garbage, "w", encoding="utf-8") as fh:
        fh.write("{]")
    code, _, err = run(capsys, "check", garbage)
    assert code == 3 and "not valid JSON" in err


# -- fiber, mu, str-leq ---------------------------------------------------------


def test_fiber_json(capsys, files):
    code, data = run_json(capsys, "fiber", files["f0"], "--b", "d,e")
    assert code == 0
    assert len(data["nodes"]) == 6
    assert data["node_labels"][0] == "(a|d,e)"


def test_fiber_support_and_amax(capsys, files):
    code, data = run_json(capsys, "fiber", files["f0"], "--b", "d",
                          "--support", "a,b", "--amax", "1")
    assert code == 0
    assert data["node_labels"] == ["(a|d)", "(b|d)"]


def test_fiber_dot(capsys, files):
    code, out, _ = run(capsys, "fiber", files["f3"], "--b", "m", "--dot")
    assert code == 0
    assert 'n0 [label="(P|m)"];' in out
    assert 'n1 -> n5 [label="{y1,y2}"];' in out
    code, plain, _ = run(capsys, "fiber", files["f3"], "--b", "m", "--dot",
                         "--no-via")
    assert "label=\"{" not in plain and "n1 -> n5;" in plain


def test_fiber_rejects_bad_labels(capsys, files):
    code, _, err = run(capsys, "fiber", files["f0"], "--b", "z")
    assert code == 3 and "z" in err
    code, _, err = run(capsys, "fiber", files["f0"], "--b", "d,,e")
    assert code == 3 and "empty label" in err


def test_mu(capsys, files):
    code, data = run_json(capsys, "mu", files["f3"], "--x", "P", "--m", "m")
    assert code == 0
    assert data == {"version": 1, "x": "P", "m": "m", "amax": 4,
                    "mu": 7, "ge4": True}
    code, data = run_json(capsys, "mu", files["f3"], "--x", "P", "--m", "m",
                          "--amax", "2")
    assert code == 0 and data["mu"] == "infinity"
    code, _, err = run(capsys, "mu", files["f3"], "--x", "nope", "--m", "m")
    assert code == 3 and "nope" in err


def test_str_leq(capsys, files):
    code, data = run_json(capsys, "str-leq", files["f0"],
                          "--lhs", "a|d,e", "--rhs", "a,b|d,e")
    assert code == 0
    assert data["holds"] is True and data["witness"] == ["a", "b"]
    code, data = run_json(capsys, "str-leq", files["f0"],
                          "--lhs", "a|d,e", "--rhs", "a|d,e")
    assert code == 0 and data["witness"] is None
    code, data = run_json(capsys, "str-leq", files["f0"],
                          "--lhs", "a,b|d,e", "--rhs", "a|d,e")
    assert code == 1 and data["holds"] is False


@pytest.mark.parametrize("node,msg", [
    ("a,b", "must look like"),
    ("a|d|e", "must look like"),
    ("z|d", "z"),
    ("c|e", "not a member pair"),
    ("|d", "empty label"),
])
def test_str_leq_rejects_bad_nodes(capsys, files, node, msg):
    code, _, err = run(capsys, "str-leq", files["f0"],
                       "--lhs", node, "--rhs", "a,b|d")
    assert code == 3 and msg in err


def test_ambiguous_label_is_a_parse_error(capsys, files):
    twins = str(files["dir"] / "twins.json")
    save_fragment(PosetFragment(2, 1, [(0, 0), (1, 0)], ["w", "w"], ["m"]),
                  twins)
    code, _, err = run(capsys, "str-leq", twins, "--lhs", "w|m",
                       "--rhs", "w|m")
    assert code == 3 and "w" in err


# -- reconstruct ----------------------------------------------------------------


def test_reconstruct_honest_map(capsys, files):
    code, data = run_json(capsys, "reconstruct", files["p3"], files["p3y"],
                          "--map", files["map"])
    assert code == 0 and data["recovered"] is True
    # labels travel with the hidden relabeling, so both maps read as identity
    assert all(k == v for k, v in data["rho1"].items())
    assert all(k == v for k, v in data["rho2"].items())
    assert data["probes"] > 0
    assert data["factorization"]["clean"] is True
    assert data["trace"]["conflicts"] == []


def test_reconstruct_corrupt_map(capsys, files):
    code, data = run_json(capsys, "reconstruct", files["p3"], files["p3y"],
                          "--map", files["map_bad"])
    assert code == 1 and data["recovered"] is False
    assert data["conflicts"]


def test_reconstruct_rejects_bad_map_files(capsys, files):
    bad = str(files["dir"] / "notjson.json")
    with open(bad, "w", encoding="utf-8") as fh:
        fh.write("][")
    code, _, err = run(capsys, "reconstruct", files["p3"], files["p3y"],
                       "--map", bad)
    assert code == 3 and "notjson.json" in err
    versioned = str(files["dir"] / "v7.json")
    with open(versioned, "w", encoding="utf-8") as fh:
        json.dump({"version": 7}, fh)
    code, _, err = run(capsys, "reconstruct", files["p3"], files["p3y"],
                       "--map", versioned)
    assert code == 3 and "unsupported map file" in err


def test_reconstruct_reports_truncated_map_domain(capsys, files):
    rho = relabel(load_fragment(files["p3"]), seed=7)[1]
    phi = induce_str_iso(rho, DomainSpec(k_cap=3, fiber_support_cap=2))
    capped = str(files["dir"] / "map_capped.json")
    with open(capped, "w", encoding="utf-8") as fh:
        json.dump(phi.to_json(), fh)
    code, data = run_json(capsys, "reconstruct", files["p3"], files["p3y"],
                          "--map", capped)
    assert code == 1 and data["recovered"] is False
    assert "map domain" in data["error"]


def test_reconstruct_rejects_nonmember_images(capsys, files):
    f0 = load_fragment(files["f0"])
    table = {finite_node(0b001, 0b01): finite_node(0b100, 0b10)}
    broken = str(files["dir"] / "broken_map.json")
    with open(broken, "w", encoding="utf-8") as fh:
        json.dump(StrIso.from_table(f0, f0, table).to_json(), fh)
    code, _, err = run(capsys, "reconstruct", files["f0"], files["f0"],
                       "--map", broken)
    assert code == 3 and "not a member pair" in err


# -- roundtrip ------------------------------------------------------------------


def test_roundtrip_refuses_weak_battery(capsys, files):
    code, data = run_json(capsys, "roundtrip", files["f0"])
    assert code == 1
    assert data["recovered"] is False and data["refused"] is True
    assert data["probes"] == 0 and data["conflicts"] == []
    assert data["battery"]["reasons"]


def test_roundtrip_weak_battery_still_ambiguous(capsys, files):
    code, data = run_json(capsys, "roundtrip", files["f3"],
                          "--allow-weak-battery")
    assert code == 1 and data["recovered"] is False
    assert any(c["kind"] == "rho1-ambiguous" for c in data["conflicts"])


def test_roundtrip_weak_battery_can_recover(capsys, files):
    code, data = run_json(capsys, "roundtrip", files["ag21"],
                          "--allow-weak-battery")
    assert code == 0 and data["recovered"] is True


def test_roundtrip_rays_resolve_f0(capsys, files):
    code, data = run_json(capsys, "roundtrip", files["f0"],
                          "--allow-weak-battery", "--with-rays")
    assert code == 0 and data["recovered"] is True


def test_roundtrip_planted(capsys, files):
    code, data = run_json(capsys, "roundtrip", files["p3"], "--seed", "3")
    assert code == 0 and data["recovered"] is True
    assert data["battery"]["passed"] is True and data["probes"] > 0


def test_roundtrip_corrupt(capsys, files):
    code, data = run_json(capsys, "roundtrip", files["p3"], "--corrupt")
    assert code == 1 and data["recovered"] is False
    assert data["conflicts"]


# -- dot and plumbing -----------------------------------------------------------


def test_dot_frozen(capsys, files):
    code, out, _ = run(capsys, "dot", files["f0"])
    assert code == 0
    assert out == """digraph fragment {
  rankdir=BT;
  "Min";
  "a";
  "b";
  "c";
  "d";
  "e";
  "Min" -> "a";
  "Min" -> "b";
  "Min" -> "c";
  "a" -> "d";
  "a" -> "e";
  "b" -> "d";
  "b" -> "e";
  "c" -> "d";
}
"""


def test_output_file_matches_stdout(capsys, files):
    _, out, _ = run(capsys, "check", files["f3"])
    target = str(files["dir"] / "check.json")
    run(capsys, "check", files["f3"], "-o", target)
    with open(target, encoding="utf-8") as fh:
        assert fh.read() == out


def test_usage_errors_exit_2(capsys, files):
    for argv in ([], ["frobnicate"], ["fiber", files["f0"]]):
        with pytest.raises(SystemExit) as err:
            main(argv)
        assert err.value.code == 2
        capsys.readouterr()
