//! Exit criteria. Each criterion prints one PASS/FAIL line; the process
//! exits with a failure status when any criterion fails.

use std::panic;
use std::process::Command;
use std::time::{Duration, Instant};

use ddpc_core::behavior::{
    collect_data, is_persistently_exciting, min_data_length, required_pe_order,
    HankelRepresentation, MEMBERSHIP_TOL,
};
use ddpc_core::descriptor::{DescriptorSystem, QuasiWeierstrass, Trajectory};
use ddpc_core::linalg::{self, Matrix, Vector, RANK_TOL};
use ddpc_core::ocp::{solve_data_driven_ocp, solve_equality_qp, solve_model_based_ocp, OcpSpec};
use ddpc_core::{presets, random};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    check(
        elapsed.as_secs_f64() < limit_s,
        format!("runtime {:.2}s exceeds {limit_s}s", elapsed.as_secs_f64()),
    )
}

fn example() -> QuasiWeierstrass {
    QuasiWeierstrass::compute(&presets::example_system(), RANK_TOL).unwrap()
}

fn ddpc(args: &[&str]) -> (std::process::Output, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_ddpc"))
        .args(args)
        .env("DDPC_LOG", "quiet")
        .output()
        .expect("binary runs");
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out, v)
}

fn structural_invariants() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let (out, v) = ddpc(&["analyze", "--out", dir.path().to_str().unwrap()]);
    let elapsed = start.elapsed();
    check(out.status.success(), "analyze exited with failure")?;
    for (key, want) in [("q", 2), ("r", 2), ("s", 2)] {
        check(v[key] == want, format!("{key} = {} (want {want})", v[key]))?;
    }
    check(v["r_controllable"] == true, "not R-controllable")?;
    check(v["r_observable"] == true, "not R-observable")?;
    within(elapsed, 1.0)?;
    Ok(format!("q = r = s = 2 in {:.3}s", elapsed.as_secs_f64()))
}

fn qw_residual_bound(qw: &QuasiWeierstrass) -> Result<f64, String> {
    let sys = qw.system();
    let (p, s) = (qw.right_transform(), qw.left_transform());
    let (q, r) = (qw.slow_dim(), qw.fast_dim());
    let target_e = linalg::block_diag(&Matrix::identity(q, q), qw.nilpotent());
    let target_a = linalg::block_diag(qw.slow_dynamics(), &Matrix::identity(r, r));
    let re = (s * sys.e() * p - target_e).norm();
    let ra = (s * sys.a() * p - target_a).norm();
    let bound = 1e-10 * (1.0 + sys.e().norm() + sys.a().norm());
    check(re <= bound && ra <= bound, format!("residuals {re:e}, {ra:e} above {bound:e}"))?;
    Ok(re.max(ra))
}

fn quasi_weierstrass_residuals() -> Outcome {
    let start = Instant::now();
    let mut worst = qw_residual_bound(&example())?;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for i in 0..100 {
        let gen = random::any_structure(&mut rng, 6, 3, 3);
        let qw = QuasiWeierstrass::compute(&gen.system, RANK_TOL)
            .map_err(|e| format!("system {i}: {e}"))?;
        worst = worst.max(qw_residual_bound(&qw).map_err(|e| format!("system {i}: {e}"))?);
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!("101 systems, worst residual {worst:.1e}"))
}

fn simulated(qw: &QuasiWeierstrass, rng: &mut ChaCha8Rng, len: usize) -> Trajectory {
    let z1 = Vector::from_fn(qw.slow_dim(), |_, _| rng.random_range(-5.0..5.0));
    let u = Matrix::from_fn(qw.system().m(), len + qw.nilpotency_index() - 1, |_, _| {
        rng.random_range(-2.0..2.0)
    });
    qw.simulate(&z1, &u).unwrap().manifest()
}

/// Model-based oracle: some state sequence and some inputs past the window
/// satisfy the system equations and reproduce `traj` on its interval.
fn is_trajectory(sys: &DescriptorSystem, traj: &Trajectory) -> bool {
    let (n, m, p) = (sys.n(), sys.m(), sys.p());
    let len = traj.len();
    // Unknowns: x(0..=len + n) followed by u(len..len + n).
    let steps = len + n;
    let nx = n * (steps + 1);
    let cols = nx + m * n;
    let rows = n * steps + p * len;
    let mut mat = Matrix::zeros(rows, cols);
    let mut rhs = Vector::zeros(rows);
    for t in 0..steps {
        let r = n * t;
        mat.view_mut((r, n * (t + 1)), (n, n)).copy_from(sys.e());
        mat.view_mut((r, n * t), (n, n)).copy_from(&(-sys.a()));
        if t < len {
            rhs.rows_mut(r, n).copy_from(&(sys.b() * traj.inputs().column(t)));
        } else {
            mat.view_mut((r, nx + m * (t - len)), (n, m)).copy_from(&(-sys.b()));
        }
    }
    for t in 0..len {
        let r = n * steps + p * t;
        mat.view_mut((r, n * t), (p, n)).copy_from(sys.c());
        rhs.rows_mut(r, p).copy_from(
            &(traj.outputs().column(t) - sys.d() * traj.inputs().column(t)),
        );
    }
    linalg::LeastSquares::new(&mat, 1e-12).residual(&rhs) <= 1e-9 * (1.0 + rhs.norm())
}

/// 200 genuine and 200 corrupted trajectories of length 20 against data of
/// length 60 represented with the given truncation.
fn classify(truncation: usize) -> Outcome {
    const L: usize = 20;
    let start = Instant::now();
    let qw = example();
    let order = required_pe_order(L, qw.slow_dim(), qw.nilpotency_index());
    let data = collect_data(&qw, presets::DATA_LENGTH, order, 31).map_err(|e| e.to_string())?;
    check(data.pe.verdict, "recorded input not persistently exciting")?;
    let rep = HankelRepresentation::new(&data.trajectory, L, truncation).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + truncation as u64);
    let mut misses = 0;
    let mut still_trajectories = 0;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let traj = simulated(&qw, &mut rng, L);
        check(is_trajectory(qw.system(), &traj), "oracle rejects a simulated trajectory")?;
        let res = rep.membership(&traj, MEMBERSHIP_TOL).unwrap();
        worst = worst.max(res.residual);
        if !(res.member && res.residual <= 1e-8) {
            misses += 1;
        }
        let bad = loop {
            let mut y = traj.outputs().clone();
            let (j, k) = (rng.random_range(0..qw.system().p()), rng.random_range(0..L));
            y[(j, k)] += rng.random_range(0.5..2.0) * if rng.random() { 1.0 } else { -1.0 };
            let bad = Trajectory::new(0, traj.inputs().clone(), y).unwrap();
            if !is_trajectory(qw.system(), &bad) {
                break bad;
            }
            still_trajectories += 1;
        };
        if rep.membership(&bad, MEMBERSHIP_TOL).unwrap().member {
            misses += 1;
        }
    }
    check(misses == 0, format!("{misses} misclassifications"))?;
    within(start.elapsed(), 30.0)?;
    Ok(format!(
        "400 samples, {} Hankel columns, worst member residual {worst:.1e}, {still_trajectories} redrawn corruptions",
        rep.cols()
    ))
}

fn ocp_equivalence() -> Outcome {
    let start = Instant::now();
    let qw = example();
    let w = qw.window_len();
    let depth = w + presets::HORIZON;
    let order = required_pe_order(depth, qw.slow_dim(), qw.nilpotency_index());
    let data = collect_data(&qw, presets::DATA_LENGTH, order, 77).map_err(|e| e.to_string())?;
    let rep = HankelRepresentation::new(&data.trajectory, depth, qw.nilpotency_index()).unwrap();
    let sys = qw.system();
    // Stationary pairs: (x, u) in the kernel of [E − A, −B].
    let pencil = linalg::hstack(&[&(sys.e() - sys.a()), &(-sys.b())]);
    let stationary = linalg::kernel(&pencil, RANK_TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_cost, mut worst_seq) = (0.0f64, 0.0f64);
    for i in 0..50 {
        let c = Vector::from_fn(stationary.ncols(), |_, _| rng.random_range(-20.0..20.0));
        let xu = &stationary * c;
        let us = xu.rows(sys.n(), sys.m()).into_owned();
        let ys = sys.c() * xu.rows(0, sys.n()) + sys.d() * &us;
        let past = simulated(&qw, &mut rng, w).shifted_to(40);
        let spec = OcpSpec::new(
            presets::HORIZON,
            Matrix::identity(4, 4),
            Matrix::identity(1, 1),
            past,
            w,
        )
        .and_then(|s| s.with_setpoint(us, ys))
        .map_err(|e| format!("instance {i}: {e}"))?;
        let dd = solve_data_driven_ocp(&rep, &spec).map_err(|e| format!("instance {i}: {e}"))?;
        let mb = solve_model_based_ocp(&qw, &spec).map_err(|e| format!("instance {i}: {e}"))?;
        let gap = (dd.cost - mb.cost).abs() / (1.0 + mb.cost);
        let seq = (&dd.u_hat - &mb.u_hat).amax().max((&dd.y_hat - &mb.y_hat).amax());
        worst_cost = worst_cost.max(gap);
        worst_seq = worst_seq.max(seq);
    }
    check(worst_cost <= 1e-6, format!("relative cost gap {worst_cost:e}"))?;
    check(worst_seq <= 1e-5, format!("sequence gap {worst_seq:e}"))?;
    within(start.elapsed(), 60.0)?;
    Ok(format!(
        "50 instances, cost gap {worst_cost:.1e}, sequence gap {worst_seq:.1e}"
    ))
}

fn closed_loop() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let (out, v) = ddpc(&["paper-example", "--out", dir.path().to_str().unwrap()]);
    let elapsed = start.elapsed();
    check(v.is_object(), "no summary on stdout")?;
    check(out.status.success(), format!("aborted: {}", v["failure"]))?;
    check(v["data_length"] == 60 && v["horizon"] == 20, "unexpected experiment parameters")?;
    check(v["all_feasible"] == true, format!("infeasible at {}", v["failing_step"]))?;
    let segments = v["segments"].as_array().cloned().unwrap_or_default();
    check(segments.len() == 2, "expected two setpoint segments")?;
    let mut notes = Vec::new();
    for s in &segments {
        let span = format!("[{}, {})", s["start"], s["end"]);
        check(
            s["cost_non_increasing"] == true,
            format!("cost increases by {} on {span}", s["max_cost_increase"]),
        )?;
        check(
            s["settling_time"].is_i64() && s["stays_settled"] == true,
            format!(
                "output not within 1e-3 for q + s consecutive steps before the end of {span} (final error {:.2e})",
                s["final_error"].as_f64().unwrap_or(f64::NAN)
            ),
        )?;
        notes.push(format!("settled at {} on {span}", s["settling_time"]));
    }
    within(elapsed, 60.0)?;
    Ok(notes.join(", "))
}

fn state_reconstruction() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (mut checked, mut worst) = (0, 0.0f64);
    while checked < 100 {
        let gen = random::any_structure(&mut rng, 6, 2, 3);
        let qw = QuasiWeierstrass::compute(&gen.system, RANK_TOL).map_err(|e| e.to_string())?;
        // Without slow states the window is empty and there is nothing to recover.
        if qw.slow_dim() == 0 || !qw.r_observable(RANK_TOL) {
            continue;
        }
        let w = qw.window_len();
        let z1 = Vector::from_fn(qw.slow_dim(), |_, _| rng.random_range(-1.0..1.0));
        let u = Matrix::from_fn(gen.system.m(), w + 5 + qw.nilpotency_index() - 1, |_, _| {
            rng.random_range(-1.0..1.0)
        });
        let traj = qw.simulate(&z1, &u).unwrap();
        let states = traj.states().unwrap();
        for t in 0..=5i64 {
            let window = traj.window(t, w).unwrap().manifest();
            let rec = qw.reconstruct_state(&window, 1e-8).map_err(|e| e.to_string())?;
            worst = worst.max((rec.initial() - states.column(t as usize)).amax());
        }
        checked += 1;
    }
    check(worst <= 1e-8, format!("state error {worst:e}"))?;
    within(start.elapsed(), 10.0)?;
    Ok(format!("100 systems, worst state error {worst:.1e}"))
}

fn excitation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut false_positives = 0;
    let mut non_monotone = 0;
    for _ in 0..100 {
        let m = rng.random_range(1..=3);
        let len = rng.random_range(2..=60);
        let u = Matrix::from_fn(m, len, |_, _| rng.random_range(-1.0..1.0));
        let verdicts: Vec<bool> = (1..=len)
            .map(|order| {
                let v = is_persistently_exciting(&u, order, RANK_TOL).verdict;
                if v && len < min_data_length(m, order) {
                    false_positives += 1;
                }
                v
            })
            .collect();
        for k in 1..verdicts.len() {
            if verdicts[k] && !verdicts[k - 1] {
                non_monotone += 1;
            }
        }
    }
    check(false_positives == 0, format!("{false_positives} verdicts below the length bound"))?;
    check(non_monotone == 0, format!("{non_monotone} monotonicity violations"))?;
    within(start.elapsed(), 5.0)?;
    Ok("100 signals, all orders".into())
}

/// Null-space oracle: particular solution `Aᵀ(AAᵀ)⁻¹b` and a kernel basis
/// from the unit eigenvectors of the projector `I − Aᵀ(AAᵀ)⁻¹A`.
fn null_space_qp(h: &Matrix, g: &Vector, a: &Matrix, b: &Vector) -> Vector {
    let n = h.nrows();
    let (xp, z) = if a.nrows() == 0 {
        (Vector::zeros(n), Matrix::identity(n, n))
    } else {
        let gram = (a * a.transpose()).cholesky().expect("full row rank");
        let xp = a.transpose() * gram.solve(b);
        let proj = Matrix::identity(n, n) - a.transpose() * gram.solve(a);
        let eig = proj.symmetric_eigen();
        let cols: Vec<Vector> = (0..n)
            .filter(|&i| eig.eigenvalues[i] > 0.5)
            .map(|i| eig.eigenvectors.column(i).into_owned())
            .collect();
        (xp, Matrix::from_columns(&cols))
    };
    if z.ncols() == 0 {
        return xp;
    }
    let reduced = z.transpose() * h * &z;
    let rhs = -(z.transpose() * (g + h * &xp));
    xp + &z * reduced.cholesky().expect("reduced Hessian SPD").solve(&rhs)
}

fn qp_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = rng.random_range(1..=50);
        let k = rng.random_range(0..n);
        let f = random::gaussian(&mut rng, n, n);
        let h = f.transpose() * f + Matrix::identity(n, n);
        let g = random::gaussian(&mut rng, n, 1).column(0).into_owned();
        let a = random::gaussian(&mut rng, k, n);
        let b = random::gaussian(&mut rng, k, 1).column(0).into_owned();
        let sol = solve_equality_qp(&h, &g, &a, &b).map_err(|e| format!("QP {i}: {e}"))?;
        let oracle = null_space_qp(&h, &g, &a, &b);
        worst = worst.max((&sol.x - &oracle).amax());
    }
    check(worst <= 1e-9, format!("deviation {worst:e}"))?;
    within(start.elapsed(), 10.0)?;
    Ok(format!("100 QPs, worst deviation {worst:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("structural invariants", structural_invariants),
        ("quasi-Weierstrass residuals", quasi_weierstrass_residuals),
        ("fundamental lemma membership", || classify(1)),
        ("reduced data membership", || classify(example().nilpotency_index())),
        ("data-driven and model-based OCP agree", ocp_equivalence),
        ("closed-loop convergence", closed_loop),
        ("state reconstruction", state_reconstruction),
        ("excitation necessity and monotonicity", excitation),
        ("equality QP against null-space oracle", qp_oracle),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {reason}", i + 1)
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
