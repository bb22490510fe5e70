import io
import math

import numpy as np
import pytest

from jetfactor.numverify import (
    DriftBelowNoiseFloor,
    ImmediateSingularity,
    NumVerifyError,
    PivotTooSmall,
    check_first_integral,
    h_refinement_check,
    psi_along,
    resolution_error,
    rk4_trajectory,
    solve_highest,
    verify_first_integral,
    write_trajectory_csv,
)
from jetfactor.ode_model import make_ode
from jetfactor.symcore import ONE, Const, ProbeSettings, SingularPoint, parse_expr

P = parse_expr

# example2 from (t, y, y1, y2) = (0, 1, 1, 1) to t = 1/2, from scipy DOP853 at rtol 1e-13
EXAMPLE2_END = [1.595027072508976, 1.337249528969912, 0.46621819360662503]


def test_solve_highest(example2):
    # y3 = -(y^3*y2 - 2*t*y1 + y)/y^3 = -1 at the base point, shifted by t
    assert solve_highest(example2, (0, 1, 1, 1)) == -2.0
    assert solve_highest(example2, (1, 1, 1, 1)) == 0.0
    assert solve_highest(make_ode(1, [Const(0), ONE]), (0.3, 2.0)) == 0.0


def test_solve_highest_pivot(example2):
    with pytest.raises(PivotTooSmall) as info:
        solve_highest(example2, (1, 1e-4, 1, 1))
    assert info.value.fn == pytest.approx(1e-12)
    with pytest.raises(ValueError):
        solve_highest(example2, (0, 1, 1))


def test_sine_endpoint(sine):
    steps = 2000
    traj = rk4_trajectory(sine, (0.0, 1.0), (0.0, math.pi), math.pi / steps)
    assert len(traj.t_grid) == steps + 1 and not traj.early_stop
    assert traj.t_grid[-1] == pytest.approx(math.pi, abs=1e-12)
    assert abs(traj.states[-1, 0]) < 1e-10
    assert traj.states[-1, 1] == pytest.approx(-1.0, abs=1e-10)


def test_example2_endpoint(example2):
    traj = rk4_trajectory(example2, (1, 1, 1), (0, 0.5), 1e-3)
    assert np.max(np.abs(traj.states[-1] - EXAMPLE2_END)) < 1e-9


def test_example2_integral_is_conserved(example2):
    psi = P("y1 + y2 + t*y^(-2)")
    rep = check_first_integral(psi, rk4_trajectory(example2, (1, 1, 1), (0, 0.5), 1e-3))
    assert rep.passed and rep.max_drift < 1e-10 and rep.steps_used == 500
    assert rep.psi0 == pytest.approx(2.0)


def test_wrong_integral_drifts(sine):
    rep = check_first_integral(P("y"), rk4_trajectory(sine, (0.0, 1.0), (0, 1), 1e-2))
    assert not rep.passed and rep.max_drift == pytest.approx(math.sin(1.0), abs=1e-8)


def test_early_stop_on_pivot():
    # (1 - t)*y' + 1 = 0 loses its leading coefficient at t = 1
    ode = make_ode(1, [ONE, P("1 - t")])
    traj = rk4_trajectory(ode, (0.0,), (0, 2), 1e-3)
    assert traj.early_stop and "pivot" in traj.stop_reason
    assert traj.t_grid[-1] == pytest.approx(1.0, abs=2e-3)
    with pytest.raises(ImmediateSingularity):
        rk4_trajectory(ode, (0.0,), (1, 2), 1e-3)


def test_grazing_trajectory_is_unresolved(example2):
    # at h = 1e-3 this start steps over y = 0 without noticing; at h/2 the pivot guard fires
    init = (0.5278936609821245, -0.34024845374710244, -0.4396660050727441)
    t0 = 1.8047062218421934
    traj = rk4_trajectory(example2, init, (t0, t0 + 0.5), 1e-3)
    assert not traj.early_stop
    assert resolution_error(example2, traj) == math.inf
    smooth = rk4_trajectory(example2, (1, 1, 1), (0, 0.5), 1e-3)
    assert resolution_error(example2, smooth) < 1e-10


def test_rk4_argument_checks(sine):
    with pytest.raises(ValueError):
        rk4_trajectory(sine, (0.0, 1.0), (0, 1), 0.0)
    with pytest.raises(ValueError):
        rk4_trajectory(sine, (0.0,), (0, 1), 0.1)


def test_psi_along_checks(sine):
    traj = rk4_trajectory(sine, (0.0, 1.0), (0, 0.1), 1e-2)
    with pytest.raises(ValueError):
        psi_along(P("y2"), traj)
    with pytest.raises(SingularPoint):
        psi_along(P("1/y"), traj)


def test_refinement_oscillator(sine):
    ratio = h_refinement_check(sine, P("y^2 + y1^2"), (0.0, 1.0), (0.0, 3.2), 0.1)
    assert 16 <= ratio <= 40


def test_refinement_below_noise_floor():
    ode = make_ode(1, [Const(0), ONE])
    with pytest.raises(DriftBelowNoiseFloor):
        h_refinement_check(ode, P("y"), (1.0,), (0, 1), 0.1)


def test_verify_first_integral_is_seeded(example2):
    psi = P("y1 + y2 + t*y^(-2)")
    a = verify_first_integral(example2, psi, ProbeSettings(seed=7), runs=3)
    b = verify_first_integral(example2, psi, ProbeSettings(seed=7), runs=3)
    assert a == b and len(a) == 3 and all(r.passed for r in a)
    assert [r.seed for r in a] == [0, 1, 2]
    c = verify_first_integral(example2, psi, ProbeSettings(seed=8), runs=3)
    assert [r.init for r in c] != [r.init for r in a]


def test_verify_rejects_wrong_integral(sine):
    reps = verify_first_integral(sine, P("y"), ProbeSettings(seed=0), runs=4)
    assert not any(r.passed for r in reps)


def test_verify_gives_up_when_every_draw_is_singular():
    ode = make_ode(1, [Const(0), ONE])
    with pytest.raises(NumVerifyError):
        verify_first_integral(ode, P("ln(-1 - y^2)"), runs=1, max_draws=5)


def test_trajectory_csv(sine):
    traj = rk4_trajectory(sine, (0.0, 1.0), (0, 0.2), 0.1)
    buf = io.StringIO()
    write_trajectory_csv(buf, traj, P("y^2 + y1^2"))
    rows = [r.split(",") for r in buf.getvalue().splitlines()]
    assert rows[0] == ["t", "y", "y1", "psi"] and len(rows) == 4
    assert float(rows[-1][0]) == pytest.approx(0.2)
    assert float(rows[-1][3]) == pytest.approx(1.0, abs=1e-6)

