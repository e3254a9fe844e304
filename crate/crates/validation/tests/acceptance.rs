//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relqsim_cli::config::RunConfig;
use relqsim_cli::run::{execute, run, Overrides};
use relqsim_cli::Task;
use relqsim_core::circuits::{estimate_boundary, hadamard_test, hadamard_test_part, MeasuredOperator, TestPart};
use relqsim_core::coefficients::{beta, gamma};
use relqsim_core::estimators::{kinetic_dbc, kinetic_pbc, literal_variant_residual};
use relqsim_core::operators::{
    build_kinetic_matrix, build_p2_matrix, expectation_a_sum, expectation_adjoint_shift, expectation_boundary,
    BoundaryOperator,
};
use relqsim_core::oracle::{
    analytic_p2_spectrum, diagonalize, exact_ground, exact_sqrt_kinetic_ground, truncation_bound,
};
use relqsim_core::vqe::{minimize, Objective};
use relqsim_core::{
    AnsatzSpec, BoundaryCondition, BoundaryVariant, Budget, DbcOptions, OptimizerKind, PhysicsConfig, PotentialSpec,
    ShotPlan, WaveFunction,
};

const STATES_PER_SIZE: usize = 100;

type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn cfg(ratio: f64, qubits: u32) -> PhysicsConfig {
    PhysicsConfig::from_compton_ratio(1.0, 1.0, ratio, qubits).unwrap()
}

fn random_real_states(qubits: u32, count: usize, seed: u64) -> Vec<WaveFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 1usize << qubits;
    (0..count)
        .map(|_| {
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            WaveFunction::from_real(&v).unwrap()
        })
        .collect()
}

fn beta_identity() -> Outcome {
    let tol = 1e-10;
    let mut worst = 0.0f64;
    for qubits in 2..=6 {
        let config = cfg(0.3, qubits);
        let b = beta(&config, 2).unwrap();
        let k2 = build_kinetic_matrix(&config, BoundaryCondition::Pbc, 2).unwrap();
        for state in random_real_states(qubits, STATES_PER_SIZE, 100 + qubits as u64) {
            let formula = b[0] + b[1] * expectation_a_sum(&state, 1) + b[2] * expectation_a_sum(&state, 2);
            let dense = k2.expectation(&state).unwrap();
            let estimator = kinetic_pbc(&state, &config, 2, &ShotPlan::exact()).unwrap().value;
            let mc2 = config.rest_energy();
            worst = worst.max((formula - dense).abs() / mc2).max((estimator - dense).abs() / mc2);
        }
    }
    Outcome {
        pass: worst <= tol,
        detail: format!("max |beta form - <K2>| = {worst:.2e} mc^2 (tol {tol:.0e}), L=2..6 x {STATES_PER_SIZE} states"),
    }
}

fn gamma_identity() -> Outcome {
    let tol = 1e-10;
    let residual_tol = 1e-12;
    let mut worst = 0.0f64;
    let mut worst_residual = 0.0f64;
    let mut largest_residual = 0.0f64;
    let full = DbcOptions { variant: BoundaryVariant::Full, allow_complex: false };
    let literal = DbcOptions { variant: BoundaryVariant::PaperLiteral, allow_complex: false };
    for qubits in 2..=6 {
        let config = cfg(0.3, qubits);
        let b = beta(&config, 2).unwrap();
        let g = gamma(&config);
        let k2 = build_kinetic_matrix(&config, BoundaryCondition::Dbc, 2).unwrap();
        let mc2 = config.rest_energy();
        for state in random_real_states(qubits, STATES_PER_SIZE, 200 + qubits as u64) {
            let f = [
                expectation_boundary(&state, BoundaryOperator::E0),
                expectation_boundary(&state, BoundaryOperator::E1Full),
                expectation_boundary(&state, BoundaryOperator::E2Full),
                expectation_boundary(&state, BoundaryOperator::E0Sq),
            ];
            let formula = b[0]
                + b[1] * expectation_a_sum(&state, 1)
                + b[2] * expectation_a_sum(&state, 2)
                + g.iter().zip(f).map(|(g, f)| g * f).sum::<f64>();
            let dense = k2.expectation(&state).unwrap();
            let est_full = kinetic_dbc(&state, &config, 2, &ShotPlan::exact(), &full).unwrap().value;
            let est_lit = kinetic_dbc(&state, &config, 2, &ShotPlan::exact(), &literal).unwrap().value;
            worst = worst.max((formula - dense).abs() / mc2).max((est_full - dense).abs() / mc2);
            let predicted = literal_variant_residual(&state, &config, 2);
            worst_residual = worst_residual.max(((est_lit - dense) - predicted).abs() / mc2);
            largest_residual = largest_residual.max(predicted.abs() / mc2);
        }
    }
    Outcome {
        pass: worst <= tol && worst_residual <= residual_tol,
        detail: format!(
            "full: max err {worst:.2e} mc^2 (tol {tol:.0e}); literal residual vs -2 a2 mc^2 L^4 (P0+PN-1): \
             max dev {worst_residual:.2e} (tol {residual_tol:.0e}), residual up to {largest_residual:.2e} mc^2"
        ),
    }
}

fn reuse_identity() -> Outcome {
    let tol = 1e-12;
    let mut worst = 0.0f64;
    let opts = DbcOptions::default();
    for qubits in 2..=6 {
        let config = cfg(0.3, qubits);
        for state in random_real_states(qubits, STATES_PER_SIZE, 300 + qubits as u64) {
            let d = kinetic_dbc(&state, &config, 1, &ShotPlan::exact(), &opts).unwrap().value;
            let p = kinetic_pbc(&state, &config, 1, &ShotPlan::exact()).unwrap().value;
            let expected = 0.5
                * config.rest_energy()
                * config.compton_ratio().powi(2)
                * expectation_boundary(&state, BoundaryOperator::E0);
            worst = worst.max((d - p - expected).abs());
        }
    }
    Outcome {
        pass: worst <= tol,
        detail: format!("max |K_dbc - K_pbc - mc^2 L^2 <E0>/2| = {worst:.2e} (tol {tol:.0e})"),
    }
}

fn circuit_equivalence() -> Outcome {
    let tol = 1e-12;
    let mut worst = 0.0f64;
    let exact = ShotPlan::exact();
    let ops = [
        (MeasuredOperator::E0, BoundaryVariant::Full, BoundaryOperator::E0),
        (MeasuredOperator::E1, BoundaryVariant::Full, BoundaryOperator::E1Full),
        (MeasuredOperator::E2, BoundaryVariant::Full, BoundaryOperator::E2Full),
        (MeasuredOperator::E0Sq, BoundaryVariant::Full, BoundaryOperator::E0Sq),
        (MeasuredOperator::E1, BoundaryVariant::PaperLiteral, BoundaryOperator::E1Paper),
        (MeasuredOperator::E2, BoundaryVariant::PaperLiteral, BoundaryOperator::E2Paper),
    ];
    for qubits in 2..=5 {
        let n = 1usize << qubits;
        for state in random_real_states(qubits, STATES_PER_SIZE, 400 + qubits as u64) {
            for l in 0..n {
                let direct = expectation_adjoint_shift(&state, l);
                worst = worst.max((hadamard_test(&state, l, &exact).value - direct.re).abs());
                let im = hadamard_test_part(&state, l, TestPart::Imaginary, &exact).value;
                worst = worst.max((im - direct.im).abs());
            }
            for (which, variant, op) in ops {
                let est = estimate_boundary(&state, which, &exact, variant).unwrap().value;
                worst = worst.max((est - expectation_boundary(&state, op)).abs());
            }
        }
    }
    Outcome {
        pass: worst <= tol,
        detail: format!("max |circuit - direct| = {worst:.2e} over all shifts and edge operators, L=2..5 (tol {tol:.0e})"),
    }
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Standard-error exponent and 5-sigma coverage for one probe.
fn shot_statistics<F>(probe: F, truth: f64) -> (f64, usize)
where
    F: Fn(&ShotPlan) -> (f64, f64),
{
    let counts = [1e3, 1e4, 1e5, 1e6, 1e7];
    let errs: Vec<f64> = counts.iter().map(|&n| probe(&ShotPlan::shots(n as u64, 11).unwrap()).1).collect();
    let exponent = -log_log_slope(&counts, &errs);
    let covered = (0..100u64)
        .filter(|&seed| {
            let (v, se) = probe(&ShotPlan::shots(10_000, 1000 + seed).unwrap());
            (v - truth).abs() <= 5.0 * se
        })
        .count();
    (exponent, covered)
}

fn shot_scaling() -> Outcome {
    let uniform = WaveFunction::uniform(4).unwrap();
    let (exponent, covered) = shot_statistics(
        |plan| {
            let e = hadamard_test(&uniform, 1, plan);
            (e.value, e.std_error)
        },
        1.0,
    );
    let pass = (0.45..=0.55).contains(&exponent) && covered >= 99;

    // Non-degenerate probes for comparison: the uniform state is an
    // eigenstate of every shift, so its real-part test never fluctuates.
    let basis = WaveFunction::basis(4, 0).unwrap();
    let (exp_basis, cov_basis) = shot_statistics(
        |plan| {
            let e = hadamard_test(&basis, 1, plan);
            (e.value, e.std_error)
        },
        0.0,
    );
    let (exp_imag, cov_imag) = shot_statistics(
        |plan| {
            let e = hadamard_test_part(&uniform, 1, TestPart::Imaginary, plan);
            (e.value, e.std_error)
        },
        0.0,
    );
    Outcome {
        pass,
        detail: format!(
            "uniform state: exponent {exponent:.3} (need [0.45, 0.55]), coverage {covered}/100 (need >= 99); \
             for reference |0>: exponent {exp_basis:.3}, coverage {cov_basis}/100; \
             uniform imaginary part: exponent {exp_imag:.3}, coverage {cov_imag}/100"
        ),
    }
}

fn vqe_relative_error(qubits: u32, order: usize, potential: PotentialSpec) -> (f64, f64) {
    let config = cfg(0.2, qubits);
    let objective = Objective {
        config,
        bc: BoundaryCondition::Dbc,
        order,
        potential: potential.clone(),
        plan: ShotPlan::exact(),
        dbc: DbcOptions::default(),
    };
    let budget = Budget { restarts: 8, ..Budget::default() };
    let r = minimize(&AnsatzSpec::grid_direct(), &objective, OptimizerKind::NelderMead, &budget, 2024).unwrap();
    let truth = exact_ground(&config, BoundaryCondition::Dbc, order, &potential).unwrap().ground_energy;
    (r.best_energy, ((r.best_energy - truth) / truth).abs())
}

fn vqe_vs_oracle() -> Outcome {
    let mut pass = true;
    let mut worst_free = 0.0f64;
    let mut lines = Vec::new();
    for qubits in 2..=4 {
        let (e1, r1) = vqe_relative_error(qubits, 1, PotentialSpec::none(qubits));
        let (e2, r2) = vqe_relative_error(qubits, 2, PotentialSpec::none(qubits));
        worst_free = worst_free.max(r1).max(r2);
        pass &= r1 <= 1e-6 && r2 <= 1e-6 && e2 < e1;
        if e2 >= e1 {
            lines.push(format!("L={qubits}: order 2 not below order 1"));
        }
    }
    let well = PotentialSpec::well(4, 0.25, 0.75, -0.01, 0.0).unwrap();
    let (w1, rw1) = vqe_relative_error(4, 1, well.clone());
    let (w2, rw2) = vqe_relative_error(4, 2, well);
    pass &= rw1 <= 1e-5 && rw2 <= 1e-5 && w2 < w1;
    Outcome {
        pass,
        detail: format!(
            "free dbc L=2..4 orders 1,2: max rel err {worst_free:.2e} (tol 1e-6); square well L=4: \
             {rw1:.2e}, {rw2:.2e} (tol 1e-5); order 2 below order 1{}",
            if lines.is_empty() { String::new() } else { format!(" [{}]", lines.join("; ")) }
        ),
    }
}

fn truncation_control() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for qubits in [3u32, 4, 5] {
        let mut gaps = Vec::new();
        for ratio in [0.1, 0.2, 0.3] {
            let config = cfg(ratio, qubits);
            let free = PotentialSpec::none(qubits);
            let e2 = exact_ground(&config, BoundaryCondition::Dbc, 2, &free).unwrap().ground_energy;
            let es = exact_sqrt_kinetic_ground(&config, BoundaryCondition::Dbc, &free).unwrap().ground_energy;
            let gap = (e2 - es).abs();
            let bound = truncation_bound(&config, BoundaryCondition::Dbc);
            pass &= gap <= bound;
            gaps.push((gap, bound));
        }
        pass &= gaps.windows(2).all(|w| w[0].0 < w[1].0);
        parts.push(format!(
            "L={qubits}: gaps {} vs bounds {}",
            gaps.iter().map(|g| format!("{:.2e}", g.0)).collect::<Vec<_>>().join("/"),
            gaps.iter().map(|g| format!("{:.2e}", g.1)).collect::<Vec<_>>().join("/")
        ));
    }
    Outcome { pass, detail: format!("ratios 0.1/0.2/0.3, {}", parts.join("; ")) }
}

fn spectral_truth() -> Outcome {
    let tol = 1e-10;
    let mut worst = 0.0f64;
    for qubits in 2..=8 {
        let config = cfg(1.0, qubits);
        for bc in [BoundaryCondition::Pbc, BoundaryCondition::Dbc] {
            let analytic = analytic_p2_spectrum(&config, bc);
            let dense = diagonalize(&build_p2_matrix(&config, bc).unwrap().matrix).unwrap().eigenvalues;
            let scale = config.momentum_scale_sq();
            for (a, d) in analytic.iter().zip(&dense) {
                worst = worst.max((a - d).abs() / scale);
            }
        }
    }
    Outcome {
        pass: worst <= tol,
        detail: format!("max |analytic - dense| = {worst:.2e} (mc L)^2 for pbc and dbc, L=2..8 (tol {tol:.0e})"),
    }
}

const REPRO_CONFIGS: [(&str, &str); 3] = [
    (
        "evaluate",
        r#"{"schema_version":1,"physics":{"mass":1,"c":1,"compton_ratio":0.2,"qubits":4},"boundary":"dbc",
            "order":2,"mode":"shots","shots":5000,"seed":9,"state":{"kind":"dirichlet_sine"},
            "potential":{"kind":"harmonic","scale":0.01}}"#,
    ),
    (
        "vqe",
        r#"{"schema_version":1,"physics":{"mass":1,"c":1,"compton_ratio":0.2,"qubits":3},"boundary":"pbc",
            "order":2,"mode":"shots","shots":2000,"seed":5,"ansatz":{"kind":"layered_rotation","layers":2},
            "optimizer":{"method":"spsa","max_evals":300,"restarts":4},
            "potential":{"kind":"well","scale":-0.01}}"#,
    ),
    (
        "sweep",
        r#"{"schema_version":1,"physics":{"mass":1,"c":1,"compton_ratio":0.2,"qubits":3},"boundary":"dbc",
            "order":2,"mode":"shots","shots":1000,"seed":3,"state":{"kind":"dirichlet_sine"},
            "sweep":{"axis":"shots","values":[100,1000,10000]}}"#,
    ),
];

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut identical = 0;
    let mut worker_invariant = 0;
    let mut reseeded_differs = 0;
    for (name, text) in REPRO_CONFIGS {
        let task = match name {
            "evaluate" => Task::Evaluate,
            "vqe" => Task::Vqe,
            _ => Task::Sweep,
        };
        let cfg_path = dir.path().join(format!("{name}.json"));
        std::fs::write(&cfg_path, text).unwrap();
        let mut payloads = Vec::new();
        for run_id in 0..2 {
            let out = dir.path().join(format!("{name}_{run_id}.json"));
            let ov = Overrides { out: Some(out.clone()), ..Overrides::default() };
            run(task, &cfg_path, &ov).unwrap();
            payloads.push(std::fs::read(&out).unwrap());
        }
        if payloads[0] == payloads[1] {
            identical += 1;
        }

        let mut threaded = RunConfig::from_json(text).unwrap();
        threaded.workers = Some(3);
        threaded.task = Some(task);
        let mut b = execute(&threaded, task).unwrap();
        b.config.workers = None;
        if b.to_json().as_bytes() == payloads[0].as_slice() {
            worker_invariant += 1;
        }

        let mut other = RunConfig::from_json(text).unwrap();
        other.seed += 1;
        other.task = Some(task);
        if execute(&other, task).unwrap().to_json().as_bytes() != payloads[0].as_slice() {
            reseeded_differs += 1;
        }
    }
    let n = REPRO_CONFIGS.len();
    Outcome {
        pass: identical == n,
        detail: format!(
            "{identical}/{n} shot-mode tasks byte-identical across two runs; \
             {worker_invariant}/{n} unchanged with 3 workers; {reseeded_differs}/{n} change under a different seed"
        ),
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("beta decomposition identity (pbc)", beta_identity, Duration::from_secs(5)),
        ("gamma decomposition identity (dbc)", gamma_identity, Duration::from_secs(5)),
        ("dbc order-1 reuse identity", reuse_identity, Duration::from_secs(1)),
        ("circuit protocol equivalence", circuit_equivalence, Duration::from_secs(5)),
        ("shot statistics", shot_scaling, Duration::from_secs(60)),
        ("vqe vs dense oracle", vqe_vs_oracle, Duration::from_secs(300)),
        ("series truncation control", truncation_control, Duration::from_secs(10)),
        ("spectral ground truth", spectral_truth, Duration::from_secs(10)),
        ("reproducibility", reproducibility, Duration::from_secs(5)),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let pass = outcome.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] criterion {}: {name}: {}; {:.2}s (limit {}s{})",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", exceeded" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
