//! Acceptance gate. Each criterion prints one `PASS`/`FAIL` line; the process
//! exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rmcds_core::certificate::{
    golfing_certificate, least_squares_certificate, verify_kkt, GolfingOptions, Truncation,
};
use rmcds_core::conditions::{
    check_conditions, gamma_isomeric, opnorm_nperp_pt, opnorm_pt_poc_pt, opnorm_pv_pt, prop1_deviation,
    prop3_inequality, raiip_estimate, ConditionConfig, PowerOptions, RaiipOptions,
};
use rmcds_core::harness::{run_trial, ExperimentSpec, MaskSpec};
use rmcds_core::model::{
    generate_corruption, generate_mask, generate_model, nuclear_norm, CorruptionModel, IndexSet, LowRankModel,
    MaskKind, Matrix, ModelKind, SamplingMask,
};
use rmcds_core::par::{map_slice, Execution};
use rmcds_core::rng::derive_seed;
use rmcds_core::solver::{soft_threshold, solve_rmc, solve_rmc_reference, svt, SolverConfig};
use rmcds_core::theorem_lambda;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    Matrix::from_fn(n, n, |_, _| rng.sample(StandardNormal))
}

/// Small fixtures can have eigen-gaps near 1e-5 at the top of the spectrum,
/// so the iteration budget is generous.
fn tight() -> PowerOptions {
    PowerOptions {
        tol: 1e-14,
        max_iters: 3_000_000,
        seed: 7,
    }
}

// ---------------------------------------------------------------- 1

fn projector_algebra() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in [4, 8, 16] {
        for r in [1, 2] {
            let model = generate_model(n, r, ModelKind::Gaussian, (n * 10 + r) as u64).unwrap();
            let t = model.tangent();
            let mask = generate_mask(n, &MaskKind::Bernoulli { rate: 0.5, seed: n as u64 }).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64((n * 100 + r) as u64);
            for _ in 0..1000 {
                let x = gaussian(&mut rng, n);
                let y = gaussian(&mut rng, n);
                let scale = x.norm() * y.norm().max(1.0);
                let px = t.project(&x).unwrap();
                let qx = t.project_complement(&x).unwrap();
                let ox = mask.project(&x).unwrap();
                let oy = mask.project_complement(&y).unwrap();
                let qy = t.project_complement(&y).unwrap();
                let checks = [
                    (t.project(&px).unwrap() - &px).norm() / x.norm(),
                    (t.project_complement(&qx).unwrap() - &qx).norm() / x.norm(),
                    (mask.project(&ox).unwrap() - &ox).norm() / x.norm(),
                    (&px + &qx - &x).norm() / x.norm(),
                    (&ox + mask.project_complement(&x).unwrap() - &x).norm() / x.norm(),
                    px.dot(&qy).abs() / scale,
                    ox.dot(&oy).abs() / scale,
                    (px.dot(&y) - x.dot(&t.project(&y).unwrap())).abs() / scale,
                ];
                for c in checks {
                    worst = worst.max(c);
                }
                count += 1;
            }
        }
    }
    outcome(worst <= 1e-10, format!("{count} matrices, worst relative defect {worst:.2e} (tol 1e-10)"))
}

// ---------------------------------------------------------------- 2

/// Column `k` is `op(E_k)` flattened column-major.
fn assemble(n: usize, op: impl Fn(&Matrix) -> Matrix) -> Matrix {
    let d = n * n;
    let mut a = Matrix::zeros(d, d);
    for k in 0..d {
        let mut e = Matrix::zeros(n, n);
        e[k] = 1.0;
        let col = op(&e);
        for i in 0..d {
            a[(i, k)] = col[i];
        }
    }
    a
}

fn dense_norm(a: Matrix) -> f64 {
    let sym = (&a + a.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

fn operator_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut fixtures = 0;
    for n in [4, 6, 8] {
        for r in [1, 2] {
            for seed in 0..2u64 {
                let model = generate_model(n, r, ModelKind::Gaussian, seed * 31 + n as u64).unwrap();
                let t = model.tangent();
                let mask = generate_mask(n, &MaskKind::Bernoulli { rate: 0.7, seed: seed + 3 }).unwrap();
                let batch = generate_mask(n, &MaskKind::Bernoulli { rate: 0.5, seed: seed + 11 }).unwrap();
                let v_set = mask
                    .intersection(&generate_mask(n, &MaskKind::Bernoulli { rate: 0.3, seed: seed + 19 }).unwrap())
                    .unwrap();
                let pi = 0.5;

                let poc = opnorm_pt_poc_pt(&t, &mask, &tight()).unwrap();
                let poc_ref = dense_norm(assemble(n, |x| {
                    t.project(&mask.project_complement(&t.project(x).unwrap()).unwrap()).unwrap()
                }));
                let pv = opnorm_pv_pt(&t, &v_set, &tight()).unwrap();
                let pv_ref = dense_norm(assemble(n, |x| {
                    t.project(&v_set.project(&t.project(x).unwrap()).unwrap()).unwrap()
                }))
                .sqrt();
                let dev = prop1_deviation(&t, &mask, &batch, pi, &tight()).unwrap();
                let dev_ref = dense_norm(assemble(n, |x| {
                    let tx = t.project(x).unwrap();
                    let s = mask.project(&batch.project(&tx).unwrap()).unwrap();
                    &tx - t.project(&s).unwrap() / pi
                }));
                worst = worst.max((poc - poc_ref).abs()).max((pv - pv_ref).abs()).max((dev - dev_ref).abs());
                fixtures += 1;
            }
        }
    }
    outcome(worst <= 1e-8, format!("{fixtures} fixtures x 3 norms, worst |power - dense| {worst:.2e} (tol 1e-8)"))
}

// ---------------------------------------------------------------- 3

fn prox_correctness() -> Outcome {
    let diag = Matrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]);
    let exact = svt(&diag, 2.0).unwrap() == Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);

    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut expansive = 0;
    for _ in 0..1000 {
        let n = rng.random_range(2..7);
        let x = gaussian(&mut rng, n);
        let y = gaussian(&mut rng, n);
        let tau = rng.random_range(0.0..1.5);
        let d = (&x - &y).norm();
        let ds = (svt(&x, tau).unwrap() - svt(&y, tau).unwrap()).norm();
        let dl = (soft_threshold(&x, tau).unwrap() - soft_threshold(&y, tau).unwrap()).norm();
        if ds > d * (1.0 + 1e-12) || dl > d * (1.0 + 1e-12) {
            expansive += 1;
        }
    }

    let mut descents = 0;
    for inst in 0..10 {
        let x = gaussian(&mut rng, 5);
        let tau = 0.3;
        let z = svt(&x, tau).unwrap();
        let f = |m: &Matrix| tau * nuclear_norm(m) + 0.5 * (m - &x).norm_squared();
        let fz = f(&z);
        for _ in 0..1000 {
            let delta = gaussian(&mut rng, 5) * 1e-3;
            if f(&(&z + delta)) < fz - 1e-12 {
                descents += 1;
            }
        }
        let _ = inst;
    }
    outcome(
        exact && expansive == 0 && descents == 0,
        format!("svt(diag(3,1),2) exact: {exact}; expansive pairs {expansive}/1000; descent directions {descents}/10000"),
    )
}

// ---------------------------------------------------------------- 4

fn cross_solver() -> Outcome {
    let mut worst = 0.0f64;
    let mut both_converged = 0;
    for k in 0..10u64 {
        let n = [8, 10, 12][k as usize % 3];
        let r = 1 + (k as usize % 2);
        let model = generate_model(n, r, ModelKind::Gaussian, 500 + k).unwrap();
        let mask = generate_mask(n, &MaskKind::Bernoulli { rate: 0.8, seed: 600 + k }).unwrap();
        let c = generate_corruption(n, 0.1, 1.0, 700 + k).unwrap();
        let y = model.matrix() + c.matrix();
        let cfg = SolverConfig {
            max_iters: 200_000,
            ..SolverConfig::for_size(n)
        };
        let a = solve_rmc(&y, &mask, &cfg).unwrap();
        let b = solve_rmc_reference(&y, &mask, &cfg).unwrap();
        if a.converged && b.converged {
            both_converged += 1;
        }
        worst = worst.max((a.objective - b.objective).abs() / (1.0 + a.objective));
    }
    outcome(
        worst <= 1e-6,
        format!("10 instances (n in 8..=12), worst relative objective gap {worst:.2e} (tol 1e-6), both converged on {both_converged}/10"),
    )
}

// ---------------------------------------------------------------- 5

fn desk_recovery() -> Outcome {
    let seeds: Vec<u64> = (0..10).map(|i| derive_seed(2024, i)).collect();
    let mut spec = ExperimentSpec::new(60, 2, 0.02, MaskSpec::Bernoulli(0.6), seeds.clone());
    spec.model_kind = ModelKind::Rademacher;
    spec.stages.certificate = false;
    let records = map_slice(Execution::Parallel, &seeds, |&s| run_trial(&spec, s).unwrap());
    let ok = records.iter().filter(|r| r.rel_error <= 1e-4).count();
    let errors: Vec<String> = records.iter().map(|r| format!("{:.1e}", r.rel_error)).collect();
    let gaps: Vec<String> = records.iter().map(|r| format!("{:.1e}", r.gap)).collect();
    let conditions = records
        .iter()
        .filter(|r| r.conditions.as_ref().is_some_and(|c| c.all_pass))
        .count();
    let poc: Vec<String> = records
        .iter()
        .map(|r| format!("{:.2}", r.conditions.as_ref().map_or(f64::NAN, |c| c.opnorm_pt_poc_pt)))
        .collect();
    outcome(
        ok >= 9,
        format!(
            "n=60 r=2 rho=0.02 rate 0.6 lambda=1/sqrt(n ln n): {ok}/10 with rel error <= 1e-4; errors [{}]; \
             objective gaps vs ground truth [{}]; conditions passing {conditions}/10, |P_T P_Oc P_T| [{}]",
            errors.join(" "),
            gaps.join(" "),
            poc.join(" ")
        ),
    )
}

// ---------------------------------------------------------------- fixtures for 6-9

struct Fixture {
    label: String,
    model: LowRankModel,
    mask: SamplingMask,
    corruption: CorruptionModel,
    passing: bool,
}

fn fixtures() -> Vec<Fixture> {
    let mut out = Vec::new();
    let n = 60;
    for r in [1, 2] {
        for rate in [0.8, 0.9] {
            for rho in [0.0, 0.02, 0.05] {
                for seed in 0..2u64 {
                    let tag = (r as u64) * 1000 + (rate * 100.0) as u64 * 10 + (rho * 100.0) as u64 + seed * 7;
                    let model = generate_model(n, r, ModelKind::Rademacher, derive_seed(tag, 0)).unwrap();
                    let mask = generate_mask(n, &MaskKind::Bernoulli { rate, seed: derive_seed(tag, 1) }).unwrap();
                    let corruption = generate_corruption(n, rho, 1.0, derive_seed(tag, 2)).unwrap();
                    let config = ConditionConfig {
                        raiip: RaiipOptions {
                            seed: derive_seed(tag, 3),
                            ..Default::default()
                        },
                        ..Default::default()
                    };
                    let passing = check_conditions(&model, &mask, &corruption, &config).unwrap().all_pass;
                    out.push(Fixture {
                        label: format!("n{n} r{r} rate{rate} rho{rho} s{seed}"),
                        model,
                        mask,
                        corruption,
                        passing,
                    });
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------- 6

fn golfing_decay(fx: &[Fixture]) -> Outcome {
    let mut checked = 0;
    let mut step_violations = 0;
    let mut final_violations = Vec::new();
    for f in fx.iter().filter(|f| f.passing) {
        let t = f.model.tangent();
        let n = t.n() as f64;
        let opts = GolfingOptions {
            measure_deviation: true,
            seed: 9,
            ..Default::default()
        };
        let (_, diag) = golfing_certificate(&t, &f.mask, f.corruption.support(), f.corruption.rho, &opts).unwrap();
        checked += 1;
        for (w, c) in diag.d_norms.windows(2).zip(&diag.deviations) {
            if w[1] > c * w[0] + 1e-10 {
                step_violations += 1;
            }
        }
        if !(diag.final_residual() < 1.0 / (n * n)) {
            final_violations.push(format!("{} ({:.1e})", f.label, diag.final_residual()));
        }
    }
    outcome(
        checked > 0 && step_violations == 0 && final_violations.is_empty(),
        format!(
            "{checked} conditions-passing fixtures, k = ceil(5 ln n); per-step violations {step_violations}; final |D_k| >= 1/n^2 on {:?}",
            final_violations
        ),
    )
}

// ---------------------------------------------------------------- 7

fn certificate_implies_recovery(fx: &[Fixture]) -> Outcome {
    let mut implied = 0;
    let mut counterexamples = Vec::new();
    for f in fx {
        let t = f.model.tangent();
        let lambda = theorem_lambda(t.n());
        let (v_set, n_set) = f.corruption.split(&f.mask).unwrap();
        let sigma = f.corruption.observed_signs(&f.mask).unwrap();
        let opts = GolfingOptions {
            seed: 9,
            ..Default::default()
        };
        let (ll, _) = golfing_certificate(&t, &f.mask, f.corruption.support(), f.corruption.rho, &opts).unwrap();
        let (ls, _) = least_squares_certificate(&t, &f.mask, &v_set, &sigma, lambda, Truncation::Adaptive, &PowerOptions::default())
            .unwrap();
        let kkt = verify_kkt(&(ll + ls), &t, &v_set, &n_set, &sigma, lambda).unwrap();
        if !kkt.pass {
            continue;
        }
        let nperp = opnorm_nperp_pt(&t, &n_set, &PowerOptions::default()).unwrap();
        if nperp >= 1.0 {
            continue;
        }
        implied += 1;
        let l0 = f.model.matrix();
        let s0_bar = f.corruption.observed(&f.mask).unwrap();
        let y = &l0 + f.corruption.matrix();
        let res = solve_rmc(&y, &f.mask, &SolverConfig::for_size(t.n())).unwrap();
        let rel = (&res.l - &l0).norm() / l0.norm();
        let rel_s = (&res.s - &s0_bar).norm() / (1.0 + s0_bar.norm());
        if !(rel <= 1e-4 && rel_s <= 1e-4) {
            counterexamples.push(format!("{} (L err {rel:.1e}, S err {rel_s:.1e})", f.label));
        }
    }
    outcome(
        implied > 0 && counterexamples.is_empty(),
        format!(
            "{} fixtures, {implied} with passing certificate and |P_Nperp P_T| < 1; counterexamples {:?}",
            fx.len(),
            counterexamples
        ),
    )
}

// ---------------------------------------------------------------- 8

fn least_squares_exactness(fx: &[Fixture]) -> Outcome {
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for f in fx.iter().filter(|f| f.passing) {
        let t = f.model.tangent();
        let lambda = theorem_lambda(t.n());
        let (v_set, _) = f.corruption.split(&f.mask).unwrap();
        let sigma = f.corruption.observed_signs(&f.mask).unwrap();
        let (_, d) = least_squares_certificate(&t, &f.mask, &v_set, &sigma, lambda, Truncation::Adaptive, &PowerOptions::default())
            .unwrap();
        let bound = 1e-6 * lambda * (v_set.len() as f64).sqrt();
        checked += 1;
        if v_set.len() > 0 {
            worst = worst.max(d.v_residual / (lambda * (v_set.len() as f64).sqrt()));
        }
        if !(d.v_residual <= bound) {
            failures.push(f.label.clone());
        }
    }
    outcome(
        checked > 0 && failures.is_empty(),
        format!("{checked} conditions-passing fixtures; worst |P_V Lambda_S - lambda Sigma|_F / (lambda sqrt|V|) = {worst:.2e} (tol 1e-6); failing {failures:?}"),
    )
}

// ---------------------------------------------------------------- 9

fn injectivity(fx: &[Fixture]) -> Outcome {
    let mut checked = 0;
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for f in fx.iter().filter(|f| f.passing) {
        let t = f.model.tangent();
        let (_, n_set) = f.corruption.split(&f.mask).unwrap();
        for k in 0..100 {
            let g = gaussian(&mut rng, t.n());
            // half unstructured, half concentrated on T
            let p = if k % 2 == 0 { g } else { t.project(&g).unwrap() };
            let (lhs, rhs) = prop3_inequality(&t, &n_set, &p).unwrap();
            tightest = tightest.min(rhs / lhs);
            if lhs > rhs {
                violations += 1;
            }
        }
        checked += 1;
    }
    outcome(
        checked > 0 && violations == 0,
        format!("{checked} conditions-passing fixtures x 100 P; violations {violations}; smallest rhs/lhs {tightest:.3}"),
    )
}

// ---------------------------------------------------------------- 10

fn trivial_masks() -> Outcome {
    let mut worst_full = 0.0f64;
    let mut worst_empty = 0.0f64;
    let mut raiip_exact = true;
    for (n, r) in [(5, 1), (8, 2), (12, 3)] {
        let t = generate_model(n, r, ModelKind::Gaussian, n as u64).unwrap().tangent();
        let full = IndexSet::full(n);
        let empty = IndexSet::empty(n);
        worst_full = worst_full.max((gamma_isomeric(&t, &full, &PowerOptions::default()).unwrap() - 1.0).abs());
        worst_empty = worst_empty.max((gamma_isomeric(&t, &empty, &PowerOptions::default()).unwrap() - 0.5).abs());
        raiip_exact &= raiip_estimate(&t, &full, &RaiipOptions::default()).unwrap() == 0.0;
    }
    outcome(
        worst_full <= 1e-6 && worst_empty <= 1e-6 && raiip_exact,
        format!("|gamma(full) - 1| <= {worst_full:.1e}, |gamma(empty) - 1/2| <= {worst_empty:.1e}, raiip(full) == 0: {raiip_exact}"),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, limit: Option<Duration>, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        let limit_note = limit.map(|l| format!(" / limit {}s", l.as_secs())).unwrap_or_default();
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.1}s{limit_note}]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    };

    report(1, "projector algebra", Some(Duration::from_secs(10)), &mut projector_algebra);
    report(2, "operator-norm oracle", Some(Duration::from_secs(30)), &mut operator_oracle);
    report(3, "prox operators", None, &mut prox_correctness);
    report(4, "cross-solver agreement", Some(Duration::from_secs(60)), &mut cross_solver);
    report(5, "desk-scale exact recovery", Some(Duration::from_secs(300)), &mut desk_recovery);
    let fx = fixtures();
    println!(
        "fixture suite: {} instances, {} conditions-passing",
        fx.len(),
        fx.iter().filter(|f| f.passing).count()
    );
    report(6, "golfing decay", Some(Duration::from_secs(120)), &mut || golfing_decay(&fx));
    report(7, "certificate implies recovery", None, &mut || certificate_implies_recovery(&fx));
    report(8, "least-squares certificate exactness", None, &mut || least_squares_exactness(&fx));
    report(9, "injectivity inequality", None, &mut || injectivity(&fx));
    report(10, "trivial-mask condition values", None, &mut trivial_masks);

    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
