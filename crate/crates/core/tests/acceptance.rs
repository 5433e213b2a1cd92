//! Acceptance criteria, one test per criterion. Each prints a single
//! `[PASS]`/`[FAIL]` line before asserting.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use search_collusion::model::{self, MarketParams, MarketShape};
use search_collusion::plot::render_svg;
use search_collusion::solvers::{self, SolverConfig};
use search_collusion::sweep::{column_ordering, delta_sweep, g_sweep};
use search_collusion::verify::{self, DeltaCheckConfig, SuiteConfig, SuiteReport};
use search_collusion::IntegrationConfig;

fn cfg() -> IntegrationConfig {
    IntegrationConfig::default()
}

fn shape(n: u32, lambda: f64) -> MarketShape {
    MarketShape::new(n, lambda).unwrap()
}

fn verdict(id: u32, title: &str, passed: bool, detail: &str) {
    println!(
        "[{}] AC{id} {title}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "AC{id} {title}: {detail}");
}

#[test]
fn ac01_duopoly_closed_form() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 1..=99 {
        let lambda = i as f64 / 100.0;
        let g = model::g_value(&shape(2, lambda), &cfg()).unwrap();
        // ((1−λ)/(2λ))·ln((1+λ)/(1−λ)), written out independently
        let closed = (1.0 - lambda) / (2.0 * lambda) * ((1.0 + lambda) / (1.0 - lambda)).ln();
        worst = worst.max((g - closed).abs());
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        "duopoly closed form",
        worst <= 1e-10 && elapsed < Duration::from_secs(1),
        &format!("max |G - closed| = {worst:.2e} (<= 1e-10), {elapsed:?} (< 1 s)"),
    );
}

#[test]
fn ac02_gprime_identity() {
    let r = verify::check_gprime_identity(&(2..=10).collect::<Vec<_>>(), 101, &cfg()).unwrap();
    verdict(2, "G' identity", r.passed, &r.summary());
}

#[test]
fn ac03_limit_facts() {
    let mut lines = Vec::new();
    let mut all = true;
    for n in 2..=10u32 {
        let g0 = model::g_value(&shape(n, 1e-7), &cfg()).unwrap();
        let g1 = model::g_prime(&shape(n, 1e-7), &cfg()).unwrap();
        let g2 = model::g_double_prime(&shape(n, 1e-6), &cfg()).unwrap();
        let nf = n as f64;
        let g2_limit = 2.0 * nf * (nf / (2.0 * (nf - 1.0) + 1.0) - 1.0 / nf);
        let g_one = model::g_value(&shape(n, 1.0 - 1e-7), &cfg()).unwrap();

        let checks = [
            ("|G(1e-7)-1|", (g0 - 1.0).abs(), 1e-5),
            ("|G'(1e-7)+1|", (g1 + 1.0).abs(), 1e-4),
            ("|G''(1e-6)-limit|", (g2 - g2_limit).abs(), 1e-3),
            ("|G(1-1e-7)|", g_one.abs(), 1e-3),
        ];
        for (what, value, tol) in checks {
            if value > tol {
                all = false;
                lines.push(format!("N={n} {what} = {value:.3e} > {tol:.0e}"));
            }
        }
    }
    let detail = if lines.is_empty() {
        "all four limits within tolerance for N = 2..10".to_string()
    } else {
        lines.join("; ")
    };
    verdict(3, "limit facts", all, &detail);
}

#[test]
fn ac04_proposition_3() {
    let n_list: Vec<u32> = (3..=10).collect();
    let r = verify::check_prop3(&n_list, 10_001, &cfg()).unwrap();

    let mut interior_min = f64::INFINITY;
    for &n in &n_list {
        for lambda in verify::lambda_grid(10_001) {
            if (0.01..=0.99).contains(&lambda) {
                let g = model::g_value(&shape(n, lambda), &cfg()).unwrap();
                interior_min = interior_min.min(g - (1.0 - lambda));
            }
        }
    }

    let mut duopoly_ok = true;
    for lambda in verify::lambda_grid(10_001) {
        let analytic = ((1.0 + lambda) / (1.0 - lambda)).ln() >= 2.0 * lambda;
        let g = model::g_value(&shape(2, lambda), &cfg()).unwrap();
        duopoly_ok &= analytic && g - (1.0 - lambda) >= -1e-12;
    }

    verdict(
        4,
        "proposition 3",
        r.passed && interior_min > 0.0 && duopoly_ok,
        &format!(
            "{}; interior min {interior_min:.3e} > 0; N=2 reduction {}",
            r.summary(),
            if duopoly_ok { "holds" } else { "violated" }
        ),
    );
}

#[test]
fn ac05_proposition_2() {
    let n_list: Vec<u32> = (3..=10).collect();
    let unique = verify::check_prop2_unique_inflection(&n_list, 1001, &cfg()).unwrap();
    let root = verify::check_inflection_root(&n_list, &SolverConfig::default(), &cfg()).unwrap();
    let negative = verify::check_g3_negative(&n_list, 1001, &cfg()).unwrap();
    let bound = verify::check_g3_bound(&n_list, 1001, &cfg()).unwrap();
    let passed = unique.passed && root.passed && negative.passed && bound.passed;
    verdict(
        5,
        "proposition 2",
        passed,
        &[
            unique.summary(),
            root.summary(),
            negative.summary(),
            bound.summary(),
        ]
        .join("; "),
    );
}

fn delta_reports() -> &'static Vec<verify::CheckReport> {
    static REPORTS: OnceLock<Vec<verify::CheckReport>> = OnceLock::new();
    REPORTS.get_or_init(|| {
        let dcfg = DeltaCheckConfig {
            n_list: vec![2, 3, 4, 5],
            s_list: vec![0.2, 0.6],
            valuation: 1.0,
            grid_points: 10_000,
            ..DeltaCheckConfig::default()
        };
        verify::delta_checks(&dcfg, &SolverConfig::default(), &cfg()).unwrap()
    })
}

fn delta_report(name: &str) -> &'static verify::CheckReport {
    delta_reports().iter().find(|r| r.name == name).unwrap()
}

#[test]
fn ac06_delta_u_shape() {
    let endpoints = delta_report("delta_endpoints");
    let sign = delta_report("gamma_single_sign_change");
    let argmin = delta_report("delta_tilde_argmin");
    let hat = solvers::lambda_hat(2, 0.2, 1.0, &SolverConfig::default(), &cfg()).unwrap();
    let hat_ok = hat.converged && hat.root > 0.20 && hat.root < 0.25;
    verdict(
        6,
        "delta* U-shape",
        endpoints.passed && sign.passed && argmin.passed && hat_ok,
        &format!(
            "{}; {}; {}; lambda_hat(N=2, s=0.2) = {:.10}",
            endpoints.summary(),
            sign.summary(),
            argmin.summary(),
            hat.root
        ),
    );
}

#[test]
fn ac07_hprime_identity() {
    let r = verify::check_hprime_identity(&(3..=10).collect::<Vec<_>>(), 101, 1e-6, 1.0, &cfg())
        .unwrap();
    verdict(7, "H' identity", r.passed, &r.summary());
}

#[test]
fn ac08_figure3_ordering() {
    let sweep = g_sweep(&[3, 4, 5], &verify::lambda_grid(1001), &cfg()).unwrap();
    let r = column_ordering(&sweep.table);
    verdict(
        8,
        "figure 3 ordering",
        sweep.failures.is_empty() && r.rows == 1001 && r.holds(1e-9),
        &format!(
            "min neighbouring gap {:.3e} at lambda {:.6} over {} rows (>= -1e-9)",
            r.worst_margin, r.worst_lambda, r.rows
        ),
    );
}

#[test]
fn ac09_delta_consistency() {
    let scan = delta_report("delta_profit_form");
    let mut worst: f64 = 0.0;
    let mut evaluated = 0;
    for n in 2..=10 {
        for s in [0.1, 0.2, 0.6] {
            for lambda in verify::lambda_grid(201) {
                let params = MarketParams::new(n, lambda, s, 1.0).unwrap();
                let eq = model::equilibrium_point(&params, &cfg()).unwrap();
                if let Some(d) = eq.delta_star {
                    let pi = model::profits(&params, eq.p_star);
                    worst = worst.max(((d - pi.critical_discount_factor()) / d).abs());
                    evaluated += 1;
                }
            }
        }
    }
    verdict(
        9,
        "delta* consistency",
        scan.passed && worst <= 1e-12,
        &format!(
            "{}; sweep points {evaluated}: max rel {worst:.2e} (<= 1e-12)",
            scan.summary()
        ),
    );
}

fn timed_suite() -> &'static (SuiteReport, Duration) {
    static SUITE: OnceLock<(SuiteReport, Duration)> = OnceLock::new();
    SUITE.get_or_init(|| {
        let start = Instant::now();
        let report = verify::run_suite(&SuiteConfig::default());
        (report, start.elapsed())
    })
}

#[test]
fn ac10_performance() {
    let (report, suite_time) = timed_suite();
    let start = Instant::now();
    let sweep = delta_sweep(5, 0.2, 1.0, &verify::lambda_grid(1001), &cfg()).unwrap();
    let sweep_time = start.elapsed();
    verdict(
        10,
        "performance envelope",
        report.passed
            && *suite_time < Duration::from_secs(60)
            && sweep.failures.is_empty()
            && sweep_time < Duration::from_secs(5),
        &format!(
            "verify suite {suite_time:?} (< 60 s, failing: {:?}); 1001-point sweep {sweep_time:?} (< 5 s)",
            report.failing()
        ),
    );
}

#[test]
fn ac11_determinism() {
    let grid = verify::lambda_grid(1001);
    let render = || {
        let d = delta_sweep(2, 0.6, 1.0, &grid, &cfg()).unwrap().table;
        let g = g_sweep(&[3, 4, 5], &grid, &cfg()).unwrap().table;
        let svg = render_svg(&d.select(&["delta_star"]).unwrap(), Some("delta")).unwrap();
        (
            d.to_csv(),
            d.to_json(),
            g.to_csv(),
            g.to_json(),
            svg,
            render_svg(&g, None).unwrap(),
        )
    };
    let first = render();
    let second = render();

    let (report, _) = timed_suite();
    let again = verify::run_suite(&SuiteConfig::default());

    verdict(
        11,
        "determinism",
        first == second && report.to_json() == again.to_json(),
        "sweep CSV/JSON/SVG and suite JSON byte-identical across runs",
    );
}
