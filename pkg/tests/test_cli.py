import json

import pytest

from dirtylocus.cli import main

STABLE = {"p": [0, 0, 1], "k": [-2, -3]}
DESTABILIZING = {"p": [0, -3, 1], "k": [-1, -5]}
DOUBLE_ROOT = {"p": [0, 0, 1], "k": [-1, -2]}
CONSTANT_K = {"p": [0, 3, 1], "k": [-2]}


@pytest.fixture
def write_config(tmp_path):
    def _write(obj, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)

    return _write


def run(args, out_path):
    code = main(args + ["--out", str(out_path)])
    text = out_path.read_text() if out_path.exists() else ""
    return code, text


def data_lines(text):
    return [l for l in text.splitlines() if l and not l.startswith("#")]


def comment_lines(text):
    return [l for l in text.splitlines() if l.startswith("#")]


def parse_json_body(text):
    return json.loads("\n".join(data_lines(text)))


def rows(text):
    lines = data_lines(text)
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def test_manifest_header(write_config, tmp_path):
    cfg = write_config(STABLE)
    code, text = run([cfg, "--command", "roots", "--tau", "0"], tmp_path / "o.csv")
    assert code == 0
    head = comment_lines(text)
    assert head[0].startswith("# dirtylocus ")
    assert head[1] == "# command: roots"
    assert head[2].startswith("# config_digest: sha256:")
    assert head[3].startswith("# settings: ")
    assert text.splitlines()[0].startswith("#")


def test_roots_baseline(write_config, tmp_path):
    cfg = write_config(STABLE)
    code, text = run([cfg, "--command", "roots", "--tau", "0"], tmp_path / "o.csv")
    assert code == 0
    got = rows(text)
    assert [(r["re"], r["im"], r["family"]) for r in got] == [
        ("-2.0", "0.0", "tracked"),
        ("-1.0", "0.0", "tracked"),
    ]


def test_roots_destabilized_has_rhp_row(write_config, tmp_path):
    cfg = write_config(DESTABILIZING)
    code, text = run([cfg, "--command", "roots", "--tau", "0.5"], tmp_path / "o.csv")
    assert code == 0
    got = rows(text)
    assert any(float(r["re"]) > 0 for r in got)
    assert all(r["family"] == "untracked-single-tau" for r in got)


def test_roots_invalid_config_exits_1(write_config, tmp_path, capsys):
    cfg = write_config({"p": [0, 0, 2], "k": [-2, -3]})
    code, _ = run([cfg, "--command", "roots", "--tau", "0"], tmp_path / "o.csv")
    assert code == 1
    assert "monic" in capsys.readouterr().err


def test_sweep_row_structure(write_config, tmp_path):
    cfg = write_config(STABLE)
    code, text = run(
        [cfg, "--command", "sweep", "--tau-min", "0", "--tau-max", "0.01", "--steps", "4"],
        tmp_path / "o.csv",
    )
    assert code == 0
    got = rows(text)
    by_tau = {}
    for r in got:
        by_tau.setdefault(r["tau"], []).append(r)
    assert len(by_tau["0.0"]) == 2  # tau = 0 has only the n tracked rows
    for tau, group in by_tau.items():
        if tau != "0.0":
            assert len(group) == 3  # n + m = 3 paths everywhere else
    families = {r["family"] for r in got}
    assert families == {"tracked", "parasitic"}
    assert set(r["path_id"] for r in got) == {"t0", "t1", "p0"}


def test_sweep_without_refinement_has_exact_rows(write_config, tmp_path):
    # per-step ratio 10**(1/12) = 1.21 < 4/3 keeps even the parasitic
    # root inside the continuity budget, so no rows are inserted
    cfg = write_config(STABLE)
    code, text = run(
        [cfg, "--command", "sweep", "--tau-min", "1e-3", "--tau-max", "1e-2", "--steps", "13"],
        tmp_path / "o.csv",
    )
    assert code == 0
    got = rows(text)
    assert len(got) == 13 * 3
    assert all(r["refined"] == "false" for r in got)


def test_sweep_refinement_on_coarse_grid(write_config, tmp_path):
    cfg = write_config(DESTABILIZING)
    code, text = run(
        [cfg, "--command", "sweep", "--tau-min", "1e-3", "--tau-max", "0.5", "--steps", "4"],
        tmp_path / "o.csv",
    )
    assert code == 0
    got = rows(text)
    assert any(r["refined"] == "true" for r in got)


def test_sweep_constant_feedback_paths_frozen(write_config, tmp_path):
    cfg = write_config(CONSTANT_K)
    code, text = run(
        [cfg, "--command", "sweep", "--tau-min", "0", "--tau-max", "1", "--steps", "6"],
        tmp_path / "o.csv",
    )
    assert code == 0
    got = rows(text)
    per_path = {}
    for r in got:
        per_path.setdefault(r["path_id"], set()).add((r["re"], r["im"]))
    assert set(per_path) == {"t0", "t1"}
    assert all(len(points) == 1 for points in per_path.values())


def test_sweep_determinism_byte_identical(write_config, tmp_path):
    cfg = write_config(STABLE)
    args = [cfg, "--command", "sweep", "--tau-min", "0", "--tau-max", "0.1", "--steps", "12"]
    _, first = run(args, tmp_path / "a.csv")
    _, second = run(args, tmp_path / "b.csv")
    assert first == second
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_critical_tau_json(write_config, tmp_path):
    cfg = write_config(DESTABILIZING)
    code, text = run(
        [cfg, "--command", "critical-tau", "--tau-max", "10"], tmp_path / "o.json"
    )
    assert code == 0
    body = parse_json_body(text)
    assert body["tau_crit"] == pytest.approx(0.2909944487358056, abs=1e-6)
    assert body["sigma_crit"] == pytest.approx(3.4364916731, rel=1e-5)
    assert body["tau_max_searched"] == 10.0

    cfg2 = write_config(STABLE, "stable.json")
    code, text = run([cfg2, "--command", "critical-tau", "--tau-max", "10"], tmp_path / "o2.json")
    assert code == 0
    body = parse_json_body(text)
    assert body["tau_crit"] is None and body["sigma_crit"] is None
    assert body["tau_max_searched"] == 10.0


def test_critical_tau_zero_tol_exits_1(write_config, tmp_path):
    cfg = write_config({**DESTABILIZING, "settings": {"tol": 0.0}})
    code, _ = run([cfg, "--command", "critical-tau", "--tau-max", "10"], tmp_path / "o.json")
    assert code == 1


def test_locus_trace_csv(write_config, tmp_path):
    cfg = write_config(STABLE)
    code, text = run(
        [cfg, "--command", "locus", "--s0-re", "-2", "--tau-min", "0", "--tau-max", "0.05"],
        tmp_path / "o.csv",
    )
    assert code == 0
    got = rows(text)
    taus = [float(r["tau"]) for r in got]
    assert taus == sorted(taus) and len(set(taus)) == len(taus)
    assert all(float(r["residual"]) <= 1e-8 for r in got)
    assert "# status=completed" in comment_lines(text)
    assert data_lines(text)[0] == "tau,re,im,residual,denom_mag"


def test_locus_bifurcation_is_a_finding_not_a_failure(write_config, tmp_path):
    cfg = write_config(DOUBLE_ROOT)
    code, text = run(
        [cfg, "--command", "locus", "--s0-re", "-1", "--tau-min", "0", "--tau-max", "0.05"],
        tmp_path / "o.csv",
    )
    assert code == 0
    assert len(rows(text)) == 1
    assert "# status=bifurcation" in comment_lines(text)


def test_locus_off_level_set_exits_1(write_config, tmp_path):
    cfg = write_config(STABLE)
    code, _ = run(
        [cfg, "--command", "locus", "--s0-re", "-1.7", "--tau-min", "0", "--tau-max", "0.05"],
        tmp_path / "o.csv",
    )
    assert code == 1


def test_locus_paper_literal_flag_reports_drift(write_config, tmp_path):
    cfg = write_config(STABLE)
    code, text = run(
        [
            cfg, "--command", "locus", "--s0-re", "-2",
            "--tau-min", "0", "--tau-max", "0.05", "--paper-literal-rhs",
        ],
        tmp_path / "o.csv",
    )
    assert code == 0
    assert data_lines(text)[0] == "tau,re,im,residual,drift,denom_mag"
    got = rows(text)
    assert float(got[-1]["drift"]) > 1e-2


def test_nyquist_csv_and_winding_trailer(write_config, tmp_path):
    cfg = write_config(DESTABILIZING)
    code, text = run(
        [
            cfg, "--command", "nyquist", "--tau", "0.5",
            "--omega-min", "0.01", "--omega-max", "100",
            "--points-per-decade", "10", "--winding",
        ],
        tmp_path / "o.csv",
    )
    assert code == 0
    got = rows(text)
    omegas = [float(r["omega"]) for r in got]
    assert omegas == sorted(omegas)
    assert len([w for w in omegas if w < 0]) == len([w for w in omegas if w > 0])
    trailer = comment_lines(text)[-1]
    assert json.loads(trailer[2:]) == {"rhp_roots": 2, "winding": 2}
    # mirrored rows really are conjugates
    at = {r["omega"]: r for r in got}
    assert at["-1.0"]["H_re"] == at["1.0"]["H_re"]
    assert float(at["-1.0"]["H_im"]) == -float(at["1.0"]["H_im"])


def test_nyquist_sensitivity_asymptotes_in_manifest(write_config, tmp_path):
    cfg = write_config(STABLE)
    code, text = run(
        [
            cfg, "--command", "nyquist", "--tau", "0.5",
            "--omega-min", "0.1", "--omega-max", "10",
            "--points-per-decade", "4", "--sensitivity",
        ],
        tmp_path / "o.csv",
    )
    assert code == 0
    asym = next(l for l in comment_lines(text) if l.startswith("# asymptotes: "))
    body = json.loads(asym[len("# asymptotes: "):])
    assert body["small_s"] == [-3.0, 0.0]
    assert body["large_s"] == [-12.0, 0.0]


def test_nyquist_sensitivity_at_tau_zero_omits_asymptotes(write_config, tmp_path):
    cfg = write_config(STABLE)
    code, text = run(
        [cfg, "--command", "nyquist", "--tau", "0", "--omega-min", "0.1",
         "--omega-max", "10", "--points-per-decade", "4", "--sensitivity"],
        tmp_path / "o.csv",
    )
    assert code == 0
    assert not any(l.startswith("# asymptotes") for l in comment_lines(text))


def test_nyquist_singular_omega_exits_2(write_config, tmp_path, capsys):
    cfg = write_config({"p": [0, 0, 1], "k": [-1]})  # p - k = s^2 + 1
    code, _ = run(
        [cfg, "--command", "nyquist", "--tau", "0", "--omega-min", "1", "--omega-max", "10",
         "--points-per-decade", "2"],
        tmp_path / "o.csv",
    )
    assert code == 2
    assert "omega = 1.0" in capsys.readouterr().err


def test_certify_json(write_config, tmp_path):
    cfg = write_config(STABLE)
    code, text = run(
        [cfg, "--command", "certify", "--epsilon", "1e9", "--tau-max", "1"],
        tmp_path / "o.json",
    )
    assert code == 0
    body = parse_json_body(text)
    assert body["tau_star"] == 1.0
    assert "sampled certificate" in body["disclaimer"]
    assert body["grid"]["kind"] == "geometric"

    code, text1 = run(
        [cfg, "--command", "certify", "--epsilon", "0.01", "--tau-max", "1"],
        tmp_path / "c1.json",
    )
    assert code == 0
    _, text2 = run(
        [cfg, "--command", "certify", "--epsilon", "0.01", "--tau-max", "1"],
        tmp_path / "c2.json",
    )
    assert text1 == text2
    star_small = parse_json_body(text1)["tau_star"]
    assert star_small > 0.0
    _, text3 = run(
        [cfg, "--command", "certify", "--epsilon", "0.05", "--tau-max", "1"],
        tmp_path / "c3.json",
    )
    assert star_small <= parse_json_body(text3)["tau_star"]


def test_certify_invalid_epsilon_exits_1(write_config, tmp_path):
    cfg = write_config(STABLE)
    code, _ = run(
        [cfg, "--command", "certify", "--epsilon", "-1", "--tau-max", "1"],
        tmp_path / "o.json",
    )
    assert code == 1
    code, _ = run([cfg, "--command", "certify", "--tau-max", "1"], tmp_path / "o.json")
    assert code == 1


def test_settings_sigma_converts_to_tau(write_config, tmp_path):
    via_sigma = write_config({**STABLE, "settings": {"sigma": 2.0}}, "sigma.json")
    via_tau = write_config({**STABLE, "settings": {"tau": 0.5}}, "tau.json")
    _, a = run([via_sigma, "--command", "roots"], tmp_path / "a.csv")
    _, b = run([via_tau, "--command", "roots"], tmp_path / "b.csv")
    assert data_lines(a) == data_lines(b)


def test_settings_validation(write_config, tmp_path):
    both = write_config({**STABLE, "settings": {"sigma": 2.0, "tau": 0.5}}, "both.json")
    code, _ = run([both, "--command", "roots"], tmp_path / "o.csv")
    assert code == 1
    unknown = write_config({**STABLE, "settings": {"bogus": 1}}, "unknown.json")
    code, _ = run([unknown, "--command", "roots"], tmp_path / "o.csv")
    assert code == 1
    extra_top = write_config({**STABLE, "note": "hi"}, "top.json")
    code, _ = run([extra_top, "--command", "roots"], tmp_path / "o.csv")
    assert code == 1


def test_flags_override_settings(write_config, tmp_path):
    cfg = write_config({**STABLE, "settings": {"tau": 0.5}})
    _, with_flag = run([cfg, "--command", "roots", "--tau", "0"], tmp_path / "a.csv")
    assert [r["family"] for r in rows(with_flag)] == ["tracked", "tracked"]


def test_bad_flag_exits_1(write_config, tmp_path, capsys):
    cfg = write_config(STABLE)
    assert main([cfg, "--command", "nonsense"]) == 1
    assert main([cfg]) == 1
