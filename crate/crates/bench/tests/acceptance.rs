//! Acceptance suite: one PASS/FAIL line per criterion. Criterion 8 is a
//! timing trend and only warns.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::time::Instant;

use bdris::channel::{build_scenario, Scenario, ScenarioConfig};
use bdris::powermin::{project_qos_row, qos_kkt_residual, solve_powermin, PowerMinParams, QosCase};
use bdris::riscore::{
    b_to_theta, resolvent, solve_b_subproblem_with, spectral_norm, theta_to_b, BSolvePath, MaskKind, Susceptance,
};
use bdris::sumrate::{solve_sumrate, SumRateParams};
use bdris::Status;
use bdris_bench::{compare_architectures, ExperimentSpec, Mode};
use common::{dense_b_oracle, mask_for, qos_feasible, qos_oracle, random_susceptance, rmat, row_for_case, C64, KINDS};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn scenario(m: usize, kind: MaskKind, seed: u64, gamma_db: f64) -> Scenario<f64> {
    let mut cfg = ScenarioConfig { m, mask_kind: kind, seed, ..Default::default() }.with_uniform_gamma_db(gamma_db);
    if kind == MaskKind::Group {
        cfg.group_size = Some(4);
    }
    build_scenario(&cfg).unwrap()
}

fn cayley_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let (mut unit, mut sym, mut trip, mut res) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..1000 {
        let m = [4, 16, 64][i % 3];
        let mask = mask_for(KINDS[(i / 3) % 4], m);
        let z0 = 50.0;
        let scale = 10f64.powf(rng.random_range(-2.0..0.7));
        let b = random_susceptance(&mut rng, &mask, z0, scale);
        let theta = b_to_theta(&b, z0).map_err(|e| e.to_string())?;
        unit = unit.max(theta.unitarity_error() / m as f64);
        sym = sym.max(theta.symmetry_error() / m as f64);
        let back = theta_to_b(&theta, z0).map_err(|e| e.to_string())?;
        trip = trip.max((back.matrix() - b.matrix()).norm() * z0 / (b.matrix().norm() * z0).max(1.0));
        res = res.max(spectral_norm(&resolvent(&b, z0).map_err(|e| e.to_string())?));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        unit <= 1e-9 && sym <= 1e-9 && trip <= 1e-9 && res <= 1.0 + 1e-10 && secs < 30.0,
        format!("unitarity/M {unit:.1e}, symmetry/M {sym:.1e}, round trip {trip:.1e}, resolvent {res:.12}, {secs:.1} s"),
    )
}

fn b_subproblem_oracle() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(77);
    let mut worst = 0f64;
    for i in 0..200 {
        let m = 1 + i % 6;
        let k = rng.random_range(1..4);
        let mask = mask_for(KINDS[(i / 6) % 4], m);
        let mm = rmat(&mut rng, m, 2 * k);
        let gm = rmat(&mut rng, m, 2 * k);
        let xi = 10f64.powf(rng.random_range(-3.0..0.0));
        let prev = random_susceptance(&mut rng, &mask, 1.0, 1.0);
        let want = dense_b_oracle(&mm, &gm, xi, prev.matrix(), &mask);
        for path in [BSolvePath::Parameter, BSolvePath::RowSpace] {
            let got = solve_b_subproblem_with(&mm, &gm, xi, &prev, &mask, path).map_err(|e| e.to_string())?;
            if !got.conforms_to(&mask) || got.matrix() != &got.matrix().transpose() {
                return Err(format!("instance {i} {path:?}: mask or symmetry broken"));
            }
            worst = worst.max((got.matrix() - &want).norm() / want.norm().max(1e-300));
        }
    }
    ensure(worst <= 1e-8, format!("worst relative disagreement {worst:.1e} over 200 instances"))
}

fn qos_oracle_suite() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(31);
    let cases = [QosCase::Inside, QosCase::Shrink, QosCase::Pivot, QosCase::Flip];
    let (mut dist, mut kkt, mut seen) = (0f64, 0f64, [0usize; 4]);
    for i in 0..500 {
        let case = i % 4;
        let len = rng.random_range(1..5);
        let k = rng.random_range(0..len);
        let gamma = 10f64.powf(rng.random_range(-0.5..1.0));
        let sigma2 = 10f64.powf(rng.random_range(-2.0..0.5));
        let a = row_for_case(&mut rng, len, k, gamma, sigma2, case);
        let p = project_qos_row(&a, k, gamma, sigma2).map_err(|e| e.to_string())?;
        if p.case != cases[case] {
            return Err(format!("row {i}: expected {:?}, got {:?}", cases[case], p.case));
        }
        if p.case == QosCase::Inside && p.row != a {
            return Err(format!("row {i}: feasible input changed"));
        }
        if !qos_feasible(&p.row, k, gamma, sigma2, 1e-9 * (1.0 + a.norm())) {
            return Err(format!("row {i}: output infeasible"));
        }
        seen[case] += 1;
        let want = qos_oracle(&a, k, gamma, sigma2);
        dist = dist.max((&p.row - &want).norm() / (1.0 + a.norm()));
        kkt = kkt.max(qos_kkt_residual(&a, k, gamma, sigma2, &p));
    }
    ensure(dist <= 1e-6 && kkt <= 1e-8, format!("cases {seen:?}, oracle distance {dist:.1e}, KKT {kkt:.1e}"))
}

fn sumrate_regression(s: &Scenario<f64>) -> bdris::sumrate::SumRateReport<f64> {
    solve_sumrate(s, &SumRateParams { diagnostics: true, ..Default::default() }, None).unwrap()
}

fn sumrate_solver(r: &bdris::sumrate::SumRateReport<f64>) -> Outcome {
    let o = &r.outcome;
    let first = r.history.iter().find(|h| h.residual_rel < 1e-5).map(|h| h.iter);
    let fp = (o.surrogate - o.rate_iterate).abs() / o.rate_iterate;
    let exact = (o.rate_exact - o.rate_u).abs() / o.rate_u;
    let viol = r.history.iter().map(|h| h.lagrangian_violation).fold(f64::MIN, f64::max);
    ensure(
        o.residual_rel < 1e-5 && r.iterations <= 3000 && r.elapsed < 60.0 && fp < 1e-6 && exact < 1e-8 && viol <= 1e-9,
        format!(
            "residual {:.1e} (below 1e-5 from iteration {first:?}), {} iterations in {:.1} s, FP gap {fp:.1e}, Θ vs U rate {exact:.1e}, worst ascent violation {viol:.1e}",
            o.residual_rel, r.iterations, r.elapsed
        ),
    )
}

fn architecture_ordering() -> Outcome {
    let cfg = ScenarioConfig { m: 32, ..Default::default() };
    let spec = ExperimentSpec::new(Mode::Sumrate, cfg, (1..=20).collect());
    let masks = [MaskKind::Fully, MaskKind::Group, MaskKind::TreeTridiagonal, MaskKind::Single];
    let (_, cmp) = compare_architectures(&spec, &masks).map_err(|e| e.to_string())?;
    let mean = |m: MaskKind| cmp.ranking.iter().find(|e| e.mask == m).unwrap().mean;
    let pair = |a: MaskKind, b: MaskKind| cmp.pairs.iter().find(|p| p.a == a && p.b == b).unwrap();
    let (fg, gs) = (pair(MaskKind::Fully, MaskKind::Group), pair(MaskKind::Group, MaskKind::Single));
    let (f, g, t, s) = (mean(MaskKind::Fully), mean(MaskKind::Group), mean(MaskKind::TreeTridiagonal), mean(MaskKind::Single));
    let tree_gap = (t - g).abs() / g;
    ensure(
        f >= g && g >= s && fg.p_value < 0.05 && gs.p_value < 0.05 && tree_gap <= 0.05,
        format!(
            "means fully {f:.3} group {g:.3} tree {t:.3} single {s:.3} nats; fully>group {}/{} (p {:.3}), group>single {}/{} (p {:.1e}), tree vs group {:.1}%",
            fg.wins,
            fg.wins + fg.losses,
            fg.p_value,
            gs.wins,
            gs.wins + gs.losses,
            gs.p_value,
            100.0 * tree_gap
        ),
    )
}

/// Worst `min_k SINR_k/Γ_k` recomputed from the returned susceptance with a
/// separately formed scattering matrix.
fn certificate(s: &Scenario<f64>, b: &Susceptance<f64>, w: &DMatrix<C64>) -> f64 {
    let m = s.m();
    let jb = b.matrix().map(|x| C64::new(0.0, s.z0 * x));
    let id = DMatrix::<C64>::identity(m, m);
    let theta = (&id + &jb).try_inverse().unwrap() * (&id - &jb);
    let e = s.h.adjoint() * theta * &s.g * w;
    (0..s.k())
        .map(|k| {
            let interference: f64 = (0..s.k()).filter(|&j| j != k).map(|j| e[(k, j)].norm_sqr()).sum();
            e[(k, k)].norm_sqr() / (interference + s.sigma2) / s.gamma[k]
        })
        .fold(f64::INFINITY, f64::min)
}

struct PmStats {
    mean_dbm: f64,
    mean_w: f64,
    infeasible: usize,
    worst_certificate: f64,
}

fn powermin_cell(m: usize, kind: MaskKind, gamma_db: f64, seeds: &[u64]) -> PmStats {
    let (mut total, mut infeasible, mut worst) = (0.0, 0, f64::INFINITY);
    for &seed in seeds {
        let s = scenario(m, kind, seed, gamma_db);
        let r = solve_powermin(&s, &PowerMinParams::default(), None).unwrap();
        total += r.outcome.power;
        if r.status == Status::InfeasibleSolution {
            infeasible += 1;
        } else {
            worst = worst.min(certificate(&s, &r.outcome.b, &r.outcome.w));
        }
    }
    let mean_w = total / seeds.len() as f64;
    PmStats { mean_dbm: 10.0 * (mean_w * 1e3).log10(), mean_w, infeasible, worst_certificate: worst }
}

fn powermin_trends() -> Outcome {
    let seeds: Vec<u64> = (1..=20).collect();
    let gammas: Vec<PmStats> = [0.0, 2.0, 4.0, 6.0].iter().map(|&g| powermin_cell(16, MaskKind::Fully, g, &seeds)).collect();
    let ms: Vec<PmStats> = [16, 32, 64].iter().map(|&m| powermin_cell(m, MaskKind::Single, 2.0, &seeds)).collect();
    let (fully, single) = (&gammas[1], &ms[0]);
    let all = gammas.iter().chain(&ms);
    let worst = all.clone().map(|c| c.worst_certificate).fold(f64::INFINITY, f64::min);
    let infeasible: usize = all.map(|c| c.infeasible).sum();
    let gamma_up = gammas.windows(2).all(|w| w[1].mean_w >= w[0].mean_w);
    let m_down = ms.windows(2).all(|w| w[1].mean_w <= w[0].mean_w);
    let dbm = |v: &[PmStats]| v.iter().map(|c| format!("{:.2}", c.mean_dbm)).collect::<Vec<_>>().join("/");
    ensure(
        worst >= 1.0 - 1e-4 && gamma_up && m_down && fully.mean_w <= single.mean_w,
        format!(
            "certificate min {worst:.6} ({infeasible} of 140 runs infeasible); fully M=16 over Γ 0/2/4/6 dB: {} dBm; single over M 16/32/64: {} dBm; fully {:.2} vs single {:.2} dBm",
            dbm(&gammas),
            dbm(&ms),
            fully.mean_dbm,
            single.mean_dbm
        ),
    )
}

fn identities(sr: &bdris::sumrate::SumRateReport<f64>) -> Outcome {
    let s = scenario(16, MaskKind::Fully, 1, 2.0);
    let pm = solve_powermin(&s, &PowerMinParams { diagnostics: true, ..Default::default() }, None).unwrap();
    let worst = |h: &[bdris::IterationRecord]| h.iter().map(|r| r.multiplier_identity).fold(0.0, f64::max);
    let (a, c) = (worst(&sr.history), worst(&pm.history));
    ensure(
        a <= 1e-6 && c <= 1e-6,
        format!("sum-rate identity {a:.1e} over {} sweeps, power-min relation {c:.1e} over {} sweeps", sr.iterations, pm.iterations),
    )
}

fn per_iteration_seconds(m: usize) -> f64 {
    let s = scenario(m, MaskKind::Fully, 1, 2.0);
    let p = SumRateParams { max_iters: 150, tol_residual: 1e-300, tol_change: 1e-300, ..Default::default() };
    (0..3)
        .map(|_| {
            let r = solve_sumrate(&s, &p, None).unwrap();
            r.elapsed / r.iterations as f64
        })
        .fold(f64::INFINITY, f64::min)
}

fn complexity_trend() -> Outcome {
    let (t32, t64) = (per_iteration_seconds(32), per_iteration_seconds(64));
    let ratio = t64 / t32;
    ensure(
        (4.0..=12.0).contains(&ratio),
        format!("t(64)/t(32) = {ratio:.2} ({:.3} ms vs {:.3} ms per iteration)", t64 * 1e3, t32 * 1e3),
    )
}

fn main() {
    // Let `cargo test -- --list` and filters pass through without running the suite.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut failed = 0;
    let mut report = |id: u32, name: &str, soft: bool, out: Outcome| {
        let (tag, msg) = match out {
            Ok(m) => ("PASS", m),
            Err(m) if soft => ("WARN", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("{tag} criterion {id} ({name}): {msg}");
    };
    report(1, "Cayley map", false, cayley_suite());
    report(2, "B-subproblem oracle", false, b_subproblem_oracle());
    report(3, "QoS projection oracle", false, qos_oracle_suite());
    let sr = sumrate_regression(&scenario(16, MaskKind::Fully, 1, 2.0));
    report(4, "sum-rate solver", false, sumrate_solver(&sr));
    report(5, "architecture ordering", false, architecture_ordering());
    report(6, "power-min trends", false, powermin_trends());
    report(7, "multiplier identities", false, identities(&sr));
    report(8, "complexity trend", true, complexity_trend());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
