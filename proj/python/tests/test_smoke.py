import math

import numpy as np
import pytest

import hzdgait as hz

BASE_COEFFS = np.array(
    [
        [-0.48459659545946071, -0.62816527362723262, -0.74882684871934069, 0.31240950094013803,
         0.32727597768735528, 0.21218802878179804, 0.1001678422672751],
        [0.10016784226727508, -0.13447531518827149, -0.15739404564341813, 0.15966282975421614,
         0.22277022841658967, -0.44956604675923639, -0.48459659545946071],
        [0.23540634058459786, 0.12282010572739037, 1.0745602903101827, -0.85314240975424915,
         0.28042861193134061, 0.0088327911143941951, 0.022931020875633062],
        [0.022931020875633069, 0.071638599984573947, 0.91518263406847544, 1.0074372886155807,
         1.901825305854522, 1.1354354976977858, 0.23540634058459786],
    ]
)


@pytest.fixture(scope="module")
def base():
    outputs = hz.BezierOutputs(-0.22516777439564206, 0.25335900347661133, BASE_COEFFS)
    return hz.certify_base(outputs, hz.Controller())


def test_dwell_time_worked_example():
    assert hz.dwell_time_bound(106.0, 100.0, 0.5, 2.0) == 3
    assert hz.dwell_time_bound(100.0, 100.0, 0.5, 2.0) == 1
    with pytest.raises(hz.HzdError):
        hz.dwell_time_bound(1.0, 2.0, 0.5, 0.0)


def test_boundedness_reference_magnitudes():
    v = hz.boundedness_check([120.8, 247.2], [45.15, 30.0], 0.5)
    assert v.passed
    assert v.bound == pytest.approx(90.3)
    assert v.margin == pytest.approx(30.5)


def test_planner_and_scc_on_ring():
    g = hz.make_graph(5, [(i, (i + 1) % 5, 1) for i in range(5)])
    assert hz.strongly_connected(g).strongly_connected
    path = hz.plan_path(g, 0, 3)
    assert path.nodes == [0, 1, 2, 3]
    assert path.steps == 3
    star = hz.make_graph(4, [(0, 1, 1), (0, 2, 1), (0, 3, 1)])
    with pytest.raises(hz.HzdError, match="unreachable"):
        hz.plan_path(star, 1, 0)


def test_config_parsing():
    cfg = hz.parse_config("controller:\n  epsilon: 0.1\n")
    assert cfg.controller.epsilon == 0.1
    assert len(cfg.schedule) == 3
    with pytest.raises(hz.HzdError):
        hz.parse_config("nonsense: 1\n")


def test_base_orbit_certified(base):
    r = base.record
    assert r.periodicity_error < 1e-8
    assert 0.0 < r.delta_sq < 1.0
    assert r.spectral_radius < 1.0
    assert r.zeta_star == pytest.approx(r.predicted_zeta_star(), rel=1e-8)
    assert r.margins.max_torque <= 100.0
    assert base.outputs.coeffs.shape == (4, 7)


def test_small_family_and_supervisor(base, tmp_path):
    ctl = hz.Controller()
    v0 = base.record.speed
    fam = hz.continuum(base, ctl, v0 - 0.01, v0 + 0.01)
    assert len(fam) >= 3
    speeds = [g.speed for g in fam.gaits]
    assert speeds == sorted(speeds)
    deltas = [g.delta_sq for g in fam.gaits]
    assert max(deltas) - min(deltas) < 1e-6
    assert hz.boundedness_check(fam).passed

    edge = hz.feasibility(fam, 0, len(fam) - 1, ctl)
    assert edge.feasible
    assert edge.measured_steps <= edge.weight

    graph = hz.build_graph(fam, ctl, workers=1)
    assert hz.strongly_connected(graph).strongly_connected

    opt = hz.SupervisorOptions()
    opt.duration = 6.0
    sched = [hz.ScheduleEntry(0.0, speeds[-1]), hz.ScheduleEntry(1.0, speeds[0])]
    run = hz.supervise(sched, fam, graph, ctl, opt)
    assert not run.violated
    assert run.log[-1].gait == 0
    replay = hz.affine_replay(fam, run.signal, run.zeta[0])
    assert all(math.isclose(a, b, rel_tol=1e-6) for a, b in zip(run.zeta, replay))

    hz.save_family(str(tmp_path / "family.json"), fam)
    again = hz.load_family(str(tmp_path / "family.json"))
    assert [g.speed for g in again.gaits] == speeds
    hz.export_family(str(tmp_path / "family.csv"), fam)
    header = (tmp_path / "family.csv").read_text().splitlines()[0]
    assert header.startswith("gait,v_des,speed,zeta_star")


def test_missing_artifact_message(tmp_path):
    with pytest.raises(hz.HzdError, match="design-base"):
        hz.load_gait(str(tmp_path / "absent.json"))


def test_gait_json_round_trip():
    outputs = hz.BezierOutputs(-0.22516777439564206, 0.25335900347661133, BASE_COEFFS)
    g = hz.GaitParams.from_base(outputs).with_beta(np.array([0.01, 0.0, -0.02, 0.03]))
    back = hz.GaitParams.from_json(g.to_json())
    np.testing.assert_array_equal(back.beta, g.beta)
