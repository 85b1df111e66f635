//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use fraccancel::analysis::{margins, simulate_loop, step_metrics, LoopRun, NuChoice};
use fraccancel::bench::{builtin_scenarios, plant_example1, plant_example2, scenario_by_name, Scenario};
use fraccancel::fotf::maps_from_parts;
use fraccancel::ilt::{log_grid, uniform_grid, IltMethod, IltParams, PreparedTransform, TimeSeries};
use fraccancel::realize::{fit_rational, FitRequest};
use fraccancel::{
    canceller, controller_tf, loop_maps, real_unstable_zeros, stability, CancellerSpec,
    ControllerSpec, Fotf, LoopModel, Poly,
};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run_scenario(s: &Scenario, nu: &NuChoice, params: &IltParams) -> Result<LoopRun, String> {
    let s = s.with_nu(nu.clone()).map_err(|e| e.to_string())?;
    let model = s.loop_model().map_err(|e| e.to_string())?;
    simulate_loop(&model, s.horizon_s, s.n_points, params, s.band).map_err(|e| e.to_string())
}

fn sup_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn a1() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let z = 10f64.powf(rng.gen_range(-1.0..3.0));
        let nu = rng.gen_range(1..=50u32);
        let s = Complex64::from_polar(10f64.powf(rng.gen_range(-3.0..3.0)), rng.gen_range(-PI..PI));
        let q = canceller(z, nu).map_err(|e| e.to_string())?.den().eval(s);
        let x = ((s / z).ln() / nu as f64).exp();
        let err = ((1.0 - x) * q - (1.0 - s / z)).norm() / (1.0 + (s / z).norm());
        worst = worst.max(err);
    }
    check(worst <= 1e-9, format!("500 triples, max scaled residual {worst:.2e}"))
}

fn a2() -> Outcome {
    let mut worst = [0.0f64; 4];
    for method in [IltMethod::FourierAccel, IltMethod::Talbot] {
        let p = IltParams::with_method(method);
        let step = PreparedTransform::new(&Fotf::constant(1.0)).unwrap();
        let t = log_grid(0.01, 100.0, 80);
        let r = step.step(&t, &p).map_err(|e| e.to_string())?;
        worst[0] = worst[0].max(sup_norm(&r.values.iter().map(|v| v - 1.0).collect::<Vec<_>>()));

        let lag = PreparedTransform::new(&Fotf::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap()).unwrap();
        let t = log_grid(0.01, 20.0, 80);
        let r = lag.impulse(&t, &p).map_err(|e| e.to_string())?;
        worst[1] = worst[1].max(diff(&r, |t| (-t).exp()));

        let osc = PreparedTransform::new(&Fotf::from_coeffs(&[1.0], &[1.0, 0.0, 1.0]).unwrap())
            .unwrap();
        let t: Vec<f64> = uniform_grid(20.0, 200).into_iter().filter(|&t| t >= 0.1).collect();
        let r = osc.impulse(&t, &p).map_err(|e| e.to_string())?;
        worst[2] = worst[2].max(diff(&r, f64::sin));

        let t = log_grid(0.1, 10.0, 60);
        let r = fraccancel::ilt::invert(|s| 1.0 / s.sqrt(), &t, &p).map_err(|e| e.to_string())?;
        let rel = r
            .times
            .iter()
            .zip(&r.values)
            .map(|(t, v)| {
                let exact = 1.0 / (PI * t).sqrt();
                ((v - exact) / exact).abs()
            })
            .fold(0.0, f64::max);
        worst[3] = worst[3].max(rel);
    }

    // cross-method agreement on every bench closed loop
    let mut cross = 0.0f64;
    for s in builtin_scenarios() {
        for nu in s.sweep_or_nominal() {
            let model = s.with_nu(nu).and_then(|s| s.loop_model()).map_err(|e| e.to_string())?;
            let maps = loop_maps(&model).map_err(|e| e.to_string())?;
            let times: Vec<f64> = uniform_grid(s.horizon_s, 400)
                .into_iter()
                .filter(|&t| t >= 0.05 * s.horizon_s)
                .collect();
            for sys in [&maps.complementary, &maps.effort] {
                let prep = PreparedTransform::new(sys).map_err(|e| e.to_string())?;
                let f = prep.step(&times, &IltParams::with_method(IltMethod::FourierAccel));
                let t = prep.step(&times, &IltParams::with_method(IltMethod::Talbot));
                let (f, t) = (f.map_err(|e| e.to_string())?, t.map_err(|e| e.to_string())?);
                let d: Vec<f64> = f.values.iter().zip(&t.values).map(|(a, b)| a - b).collect();
                cross = cross.max(sup_norm(&d));
            }
        }
    }
    let ok = worst[0] <= 1e-6 && worst[1] <= 1e-5 && worst[2] <= 1e-5 && worst[3] <= 1e-4;
    check(
        ok && cross <= 1e-5,
        format!(
            "1/s {:.1e}, 1/(s+1) {:.1e}, sin {:.1e}, s^-1/2 rel {:.1e}; cross-method {:.1e}",
            worst[0], worst[1], worst[2], worst[3], cross
        ),
    )
}

fn diff(r: &TimeSeries, f: impl Fn(f64) -> f64) -> f64 {
    r.times.iter().zip(&r.values).map(|(&t, v)| (v - f(t)).abs()).fold(0.0, f64::max)
}

fn a3() -> Outcome {
    let z1 = real_unstable_zeros(&Poly::from_descending(&plant_example1().num))
        .map_err(|e| e.to_string())?;
    let z2 = real_unstable_zeros(&Poly::from_descending(&plant_example2().num))
        .map_err(|e| e.to_string())?;
    let ok1 = z1.len() == 1 && (z1[0] - 8.2057).abs() <= 1e-3;
    let ok2 = z2.len() == 3
        && z2.iter().zip([19.9982, 45.0015, 400.0282]).all(|(a, b)| (a - b).abs() <= 1e-2);
    check(ok1 && ok2, format!("example 1 {z1:.5?}, example 2 {z2:.5?}"))
}

fn undershoot(run: &LoopRun) -> Result<f64, String> {
    run.metrics.as_ref().map(|m| m.undershoot_frac).map_err(|e| e.to_string())
}

fn a4() -> Outcome {
    let s = scenario_by_name("ex1-fig3").unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for nu in [15, 20, 25] {
        let run = run_scenario(&s, &NuChoice::Uniform(nu), &IltParams::default())?;
        let (_, y_end) = run.output.last().unwrap();
        let u = undershoot(&run)?;
        ok &= run.stable() && (y_end - 1.0).abs() < 0.02 && u < 0.02;
        parts.push(format!(
            "nu={nu}: {:?}, y(60)={y_end:.4}, undershoot={u:.4}",
            run.stability.class
        ));
    }
    check(ok, parts.join("; "))
}

fn a5() -> Outcome {
    let s = scenario_by_name("ex1-fig4").unwrap();
    let run = run_scenario(&s, &NuChoice::Uniform(2), &IltParams::default())?;
    let u = undershoot(&run)?;
    check(
        run.stable() && u < 0.02,
        format!("nu=2: {:?}, undershoot={u:.4}", run.stability.class),
    )
}

fn a6() -> Outcome {
    let s = scenario_by_name("ex2-fig5").unwrap();
    let mut rows = Vec::new();
    for nu in [4, 5, 6] {
        let run = run_scenario(&s, &NuChoice::Uniform(nu), &IltParams::default())?;
        let m = run.metrics.clone().map_err(|e| e.to_string())?;
        rows.push((nu, run.stable(), m.undershoot_frac, m.rise_time_s));
    }
    let all_stable = rows.iter().all(|r| r.1);
    let small = rows.iter().all(|r| r.2 <= 0.10);
    let faster = rows.windows(2).all(|w| w[1].3 > w[0].3);
    let tradeoff = rows[0].2 >= rows[2].2;
    let detail = rows
        .iter()
        .map(|(nu, st, u, tr)| format!("nu={nu}: stable={st}, undershoot={u:.4}, rise={tr:.4}s"))
        .collect::<Vec<_>>()
        .join("; ");
    check(all_stable && small && faster && tradeoff, detail)
}

fn a7() -> Outcome {
    let s = scenario_by_name("ex1-fig3").unwrap();
    let (lo, hi) = (1e-3, 1e3);
    let with = loop_maps(&s.loop_model().unwrap()).map_err(|e| e.to_string())?;
    let without = loop_maps(&s.baseline_model().unwrap()).map_err(|e| e.to_string())?;
    let m_with = margins(&with.open_loop, lo, hi).map_err(|e| e.to_string())?;
    let m_without = margins(&without.open_loop, lo, hi).map_err(|e| e.to_string())?;
    let st_with = stability(&with.complementary).map_err(|e| e.to_string())?;
    let st_without = stability(&without.complementary).map_err(|e| e.to_string())?;
    let pm_with = m_with.phase_margin_deg;
    let pm_without = m_without.phase_margin_deg;
    let detail = format!(
        "nu=20: {:?}, PM {:?} deg, GM {:.2} dB; without canceller: {:?}, PM {:?} deg, GM {:.2} dB",
        st_with.class,
        pm_with.map(|p| (p * 100.0).round() / 100.0),
        m_with.gain_margin_db,
        st_without.class,
        pm_without.map(|p| (p * 100.0).round() / 100.0),
        m_without.gain_margin_db
    );
    let improved = match (pm_with, pm_without) {
        (Some(a), Some(b)) => a > b,
        (Some(_), None) => true,
        _ => false,
    };
    let baseline_fails = st_without.is_unstable() || pm_without.is_none();
    let ok = st_with.tracks_steps() && pm_with.is_some_and(|p| p > 0.0) && (improved || baseline_fails);
    check(ok, detail)
}

/// Matignon verdict against boundedness of the simulated step response.
fn agrees(sys: &Fotf, horizon: f64, n: usize) -> Result<(bool, bool), String> {
    let verdict = stability(sys).map_err(|e| e.to_string())?.tracks_steps();
    let y = PreparedTransform::new(sys)
        .and_then(|p| p.step(&uniform_grid(horizon, n), &IltParams::default()))
        .map_err(|e| e.to_string())?;
    let bounded = sup_norm(&y.values) < 10.0 && step_metrics(&y).is_ok();
    Ok((verdict, bounded))
}

fn a8() -> Outcome {
    let mut mismatches = Vec::new();
    let mut total = 0;
    for s in builtin_scenarios() {
        for nu in s.sweep_or_nominal() {
            let model = s.with_nu(nu.clone()).and_then(|s| s.loop_model()).unwrap();
            let t = loop_maps(&model).map_err(|e| e.to_string())?.complementary;
            let (v, b) = agrees(&t, s.horizon_s, 1000)?;
            total += 1;
            if v != b {
                mismatches.push(format!("{} {nu:?}", s.name));
            }
        }
    }
    // k / (s (s + a) (s + b)) in unity feedback is stable iff k < (a + b) a b
    let mut rng = StdRng::seed_from_u64(8);
    let (mut n_stable, mut n_unstable) = (0, 0);
    for i in 0..20 {
        let a = rng.gen_range(0.8..4.0);
        let b = rng.gen_range(0.8..4.0);
        let critical = (a + b) * a * b;
        let ratio = if i % 2 == 0 { rng.gen_range(0.05..0.5) } else { rng.gen_range(1.8..4.0) };
        let plant = Fotf::from_coeffs(&[1.0], &[1.0, a + b, a * b, 0.0]).unwrap();
        let model = LoopModel::new(plant, CancellerSpec::none(), ControllerSpec::pd(ratio * critical, 0.0));
        let t = loop_maps(&model).map_err(|e| e.to_string())?.complementary;
        let (v, bounded) = agrees(&t, 100.0, 1000)?;
        total += 1;
        if v {
            n_stable += 1;
        } else {
            n_unstable += 1;
        }
        if v != bounded || v != (ratio < 1.0) {
            mismatches.push(format!("random #{i} (a={a:.3}, b={b:.3}, k/kc={ratio:.3})"));
        }
    }
    check(
        mismatches.is_empty(),
        format!(
            "{total} systems ({n_stable} stable / {n_unstable} unstable random), mismatches: {mismatches:?}"
        ),
    )
}

fn a9() -> Outcome {
    let z = 8.2057;
    let target = canceller(z, 20).unwrap();
    let fit = fit_rational(&FitRequest::new(target, (z / 100.0, z * 100.0), 8))
        .map_err(|e| e.to_string())?;

    let s = scenario_by_name("ex1-fig3").unwrap();
    let plant = s.plant.transfer_function().unwrap();
    let c2 = controller_tf(&s.controller).unwrap();
    let fractional = loop_maps(&s.loop_model().unwrap()).map_err(|e| e.to_string())?;
    let rational = maps_from_parts(&plant, &c2.mul(&fit.to_fotf().unwrap()))
        .map_err(|e| e.to_string())?;
    let times = uniform_grid(s.horizon_s, 600);
    let step = |f: &Fotf| {
        PreparedTransform::new(f)
            .and_then(|p| p.step(&times, &IltParams::default()))
            .map_err(|e| e.to_string())
    };
    let y_frac = step(&fractional.complementary)?;
    let y_rat = step(&rational.complementary)?;
    let d: Vec<f64> = y_frac.values.iter().zip(&y_rat.values).map(|(a, b)| a - b).collect();
    let perturbation = sup_norm(&d) / sup_norm(&y_frac.values);
    check(
        fit.max_mag_error_db <= 1.0 && fit.max_phase_error_deg <= 5.0 && perturbation <= 0.02,
        format!(
            "order 8 on [{:.4}, {:.1}]: {:.3} dB / {:.3} deg, stable={}, step perturbation {:.2}%",
            z / 100.0,
            z * 100.0,
            fit.max_mag_error_db,
            fit.max_phase_error_deg,
            fit.fit_stable,
            100.0 * perturbation
        ),
    )
}

fn sampled(t1: f64, n: usize, f: impl Fn(f64) -> f64) -> TimeSeries {
    let times = uniform_grid(t1, n);
    let values = times.iter().map(|&t| f(t)).collect();
    TimeSeries { times, values }
}

fn a10() -> Outcome {
    let nmp = step_metrics(&sampled(30.0, 3000, |t| 1.0 - (-t).exp() - 2.0 * t * (-t).exp()))
        .map_err(|e| e.to_string())?;
    let lag = step_metrics(&sampled(12.0, 2400, |t| 1.0 - (-t).exp())).map_err(|e| e.to_string())?;
    let k = 2.0;
    let model = LoopModel::new(
        Fotf::from_coeffs(&[1.0], &[1.0, 0.0]).unwrap(),
        CancellerSpec::none(),
        ControllerSpec::pd(k, 0.0),
    );
    let u = fraccancel::analysis::control_effort(&model, 5.0, 500, &IltParams::default())
        .map_err(|e| e.to_string())?;
    let u_err = diff(&u, |t| k * (-k * t).exp());
    let peak_first = u.values.iter().all(|&v| v <= u.values[0]);
    let ok = (nmp.undershoot_frac - 0.2131).abs() <= 0.002
        && (lag.rise_time_s - 9f64.ln()).abs() < 0.01
        && (lag.settling_time_s - 50f64.ln()).abs() < 0.01
        && lag.overshoot_frac < 1e-4
        && lag.undershoot_frac == 0.0
        && u_err < 1e-6
        && peak_first;
    check(
        ok,
        format!(
            "undershoot {:.4}; lag rise {:.4} (ln 9), settling {:.4} (ln 50); effort err {:.1e}",
            nmp.undershoot_frac, lag.rise_time_s, lag.settling_time_s, u_err
        ),
    )
}

fn main() {
    let criteria: [(&str, &str, Duration, fn() -> Outcome); 10] = [
        ("A1", "telescoping identity", Duration::from_secs(1), a1),
        ("A2", "inverse Laplace pairs", Duration::from_secs(10), a2),
        ("A3", "zero locations", Duration::from_secs(5), a3),
        ("A4", "example 1, nu in {15, 20, 25}", Duration::from_secs(30), a4),
        ("A5", "example 1, nu = 2", Duration::from_secs(30), a5),
        ("A6", "example 2, nu in {4, 5, 6}", Duration::from_secs(60), a6),
        ("A7", "phase margin with and without canceller", Duration::from_secs(30), a7),
        ("A8", "sector test vs time-domain boundedness", Duration::from_secs(120), a8),
        ("A9", "rational realization", Duration::from_secs(10), a9),
        ("A10", "step metric oracle", Duration::from_secs(5), a10),
    ];
    let mut failed = 0;
    for (id, name, budget, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over time budget {budget:?}")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{id:<4} {} {name}: {detail} [{:.2}s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
