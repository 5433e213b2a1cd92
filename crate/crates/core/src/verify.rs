//! Numerical certification of the model's identities, limits and
//! inequalities.
//!
//! Every check scans a deterministic grid and reports its worst case. A
//! report's margin is read against its tolerance in the report's
//! [`Direction`]: deviations must stay at most the tolerance, slacks at
//! least (or strictly above) it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, MarketParams, MarketShape, Regime};
use crate::quadrature::IntegrationConfig;
use crate::solvers::{self, SolverConfig, ENDPOINT_OFFSET};

pub const GRID_LO: f64 = 1e-4;
pub const GRID_HI: f64 = 1.0 - 1e-4;
pub const DEFAULT_GRID: usize = 1001;
pub const STRESS_GRID: usize = 10_001;
pub const FD_STEP: f64 = 1e-6;

/// Offsets at which the `λ → 0⁺` and `λ → 1⁻` limits are evaluated.
pub const LIMIT_EPS_G: f64 = 1e-7;
pub const LIMIT_EPS_G2: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// margin ≤ tolerance
    AtMost,
    /// margin ≥ tolerance
    AtLeast,
    /// margin > tolerance
    Above,
}

impl Direction {
    fn holds(self, margin: f64, tolerance: f64) -> bool {
        match self {
            Direction::AtMost => margin <= tolerance,
            Direction::AtLeast => margin >= tolerance,
            Direction::Above => margin > tolerance,
        }
    }

    fn is_worse(self, candidate: f64, current: f64) -> bool {
        if candidate.is_nan() {
            return !current.is_nan();
        }
        match self {
            Direction::AtMost => candidate > current,
            Direction::AtLeast | Direction::Above => candidate < current,
        }
    }

    fn initial(self) -> f64 {
        match self {
            Direction::AtMost => f64::NEG_INFINITY,
            Direction::AtLeast | Direction::Above => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub n_firms: u32,
    pub shopper_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub direction: Direction,
    pub worst_case_location: Option<Location>,
    pub worst_case_margin: f64,
    pub tolerance_used: f64,
    pub samples: usize,
    /// Finite-difference step, for checks that use one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckReport {
    fn failed(name: &str, error: &Error) -> Self {
        Self {
            name: name.to_string(),
            passed: false,
            direction: Direction::AtMost,
            worst_case_location: None,
            worst_case_margin: f64::NAN,
            tolerance_used: f64::NAN,
            samples: 0,
            step: None,
            detail: Some(error.to_string()),
        }
    }

    pub fn summary(&self) -> String {
        let loc = self
            .worst_case_location
            .map(|l| format!(" at N={} λ={:.6}", l.n_firms, l.shopper_share))
            .unwrap_or_default();
        let op = match self.direction {
            Direction::AtMost => "<=",
            Direction::AtLeast => ">=",
            Direction::Above => ">",
        };
        format!(
            "{} {}: worst {:.3e} {} {:.1e}{} ({} samples)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst_case_margin,
            op,
            self.tolerance_used,
            loc,
            self.samples
        )
    }
}

/// Running worst case of one check.
struct Tracker {
    name: &'static str,
    direction: Direction,
    tolerance: f64,
    margin: f64,
    location: Option<Location>,
    samples: usize,
    step: Option<f64>,
    detail: Option<String>,
}

impl Tracker {
    fn new(name: &'static str, direction: Direction, tolerance: f64) -> Self {
        Self {
            name,
            direction,
            tolerance,
            margin: direction.initial(),
            location: None,
            samples: 0,
            step: None,
            detail: None,
        }
    }

    fn observe(&mut self, n_firms: u32, shopper_share: f64, margin: f64) {
        self.samples += 1;
        if self.location.is_none() || self.direction.is_worse(margin, self.margin) {
            self.margin = margin;
            self.location = Some(Location {
                n_firms,
                shopper_share,
            });
        }
    }

    fn step(mut self, h: f64) -> Self {
        self.step = Some(h);
        self
    }

    fn finish(self) -> CheckReport {
        CheckReport {
            name: self.name.to_string(),
            passed: self.samples > 0 && self.direction.holds(self.margin, self.tolerance),
            direction: self.direction,
            worst_case_location: self.location,
            worst_case_margin: self.margin,
            tolerance_used: self.tolerance,
            samples: self.samples,
            step: self.step,
            detail: self.detail,
        }
    }
}

/// `points` values evenly spaced on `[lo, hi]`.
pub fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let span = hi - lo;
            let last = (points - 1) as f64;
            (0..points).map(|i| lo + span * (i as f64 / last)).collect()
        }
    }
}

/// The default λ grid on `[1e−4, 1 − 1e−4]`.
pub fn lambda_grid(points: usize) -> Vec<f64> {
    grid(GRID_LO, GRID_HI, points)
}

/// Duopoly `G(λ;2) = ((1−λ)/(2λ))·ln((1+λ)/(1−λ))`.
pub fn closed_form_g_n2(lambda: f64) -> f64 {
    // ln((1+λ)/(1−λ)) = 2·atanh(λ)
    (1.0 - lambda) * lambda.atanh() / lambda
}

/// Central difference `(f(x+h) − f(x−h)) / 2h`.
pub fn finite_difference<F>(mut f: F, x: f64, h: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let up = f(x + h)?;
    let down = f(x - h)?;
    if !up.is_finite() {
        return Err(Error::NonFiniteFunction { x: x + h });
    }
    if !down.is_finite() {
        return Err(Error::NonFiniteFunction { x: x - h });
    }
    Ok((up - down) / (2.0 * h))
}

/// `lim_{λ→0} G″(λ;N) = 2N(N/(2(N−1)+1) − 1/N)`.
pub fn g_double_prime_limit(n_firms: u32) -> f64 {
    let n = f64::from(n_firms);
    2.0 * n * (n / (2.0 * (n - 1.0) + 1.0) - 1.0 / n)
}

/// `N³/(3(N−1)+1) + 1 − 2N²/(2(N−1)+1)`, i.e. `∫₀¹ t(t−1)² dy` with `t = N·y^(N−1)`.
pub fn g3_bound_constant(n_firms: u32) -> f64 {
    let n = f64::from(n_firms);
    n.powi(3) / (3.0 * (n - 1.0) + 1.0) + 1.0 - 2.0 * n * n / (2.0 * (n - 1.0) + 1.0)
}

/// Upper envelope of `G(λ;N)` for `N ≥ 3` obtained by extending the
/// integral to `[0, ∞)`: `w·(π/(N−1))/sin(π/(N−1))` with
/// `w = ((1−λ)/(λN))^(1/(N−1))`. It vanishes as `λ → 1`.
pub fn g_upper_envelope(n_firms: u32, lambda: f64) -> f64 {
    let n = f64::from(n_firms);
    let k = n - 1.0;
    let width = ((1.0 - lambda) / (lambda * n)).powf(1.0 / k);
    width * (PI / k) / (PI / k).sin()
}

fn g_at(n: u32, lambda: f64, cfg: &IntegrationConfig) -> Result<f64> {
    model::g_value(&MarketShape::new(n, lambda)?, cfg)
}

fn h_at(n: u32, lambda: f64, cfg: &IntegrationConfig) -> Result<f64> {
    let shape = MarketShape::new(n, lambda)?;
    Ok(model::h_value(&shape, model::g_value(&shape, cfg)?))
}

/// Duopoly quadrature against the closed form on `{0.01, …, 0.99}`.
pub fn check_duopoly_closed_form(cfg: &IntegrationConfig) -> Result<CheckReport> {
    let mut t = Tracker::new("duopoly_closed_form", Direction::AtMost, 1e-10);
    for i in 1..=99 {
        let lambda = i as f64 / 100.0;
        let dev = (g_at(2, lambda, cfg)? - closed_form_g_n2(lambda)).abs();
        t.observe(2, lambda, dev);
    }
    Ok(t.finish())
}

/// Minimum of `G(λ;N) − (1−λ)` over the grid, required `≥ −1e−12`.
pub fn check_prop3(
    n_list: &[u32],
    grid_size: usize,
    cfg: &IntegrationConfig,
) -> Result<CheckReport> {
    require_grid(grid_size)?;
    let mut t = Tracker::new("prop3_g_above_diagonal", Direction::AtLeast, -1e-12);
    for &n in n_list {
        for lambda in lambda_grid(grid_size) {
            t.observe(n, lambda, g_at(n, lambda, cfg)? - (1.0 - lambda));
        }
    }
    Ok(t.finish())
}

/// `1−λ ≤ G(λ;3) ≤ G(λ;4) ≤ G(λ;5)` pointwise, within 1e−9.
pub fn check_monotone_in_n(grid_size: usize, cfg: &IntegrationConfig) -> Result<CheckReport> {
    require_grid(grid_size)?;
    let mut t = Tracker::new("monotone_in_n", Direction::AtLeast, -1e-9);
    for lambda in lambda_grid(grid_size) {
        let mut below = 1.0 - lambda;
        for n in 3..=5 {
            let g = g_at(n, lambda, cfg)?;
            t.observe(n, lambda, g - below);
            below = g;
        }
    }
    Ok(t.finish())
}

/// Relative gap between quadrature `G′` and its closed form in `G`.
pub fn check_gprime_identity(
    n_list: &[u32],
    grid_size: usize,
    cfg: &IntegrationConfig,
) -> Result<CheckReport> {
    let mut t = Tracker::new("gprime_identity", Direction::AtMost, 1e-8);
    for &n in n_list {
        for lambda in lambda_grid(grid_size) {
            let shape = MarketShape::new(n, lambda)?;
            let g1 = model::g_prime(&shape, cfg)?;
            let closed = model::g_prime_closed(&shape, model::g_value(&shape, cfg)?);
            t.observe(n, lambda, ((g1 - closed) / g1).abs());
        }
    }
    Ok(t.finish())
}

/// `[(N−1)²(1+λ(N−1))²(1−G)²/N²]·H′ = 1 − G/(1−λ)` with a central-difference
/// `H′`, compared where `|1 − G/(1−λ)| > 1e−6`.
///
/// `prefactor_scale` multiplies the left-hand side; anything other than 1
/// must make the check fail.
pub fn check_hprime_identity(
    n_list: &[u32],
    grid_size: usize,
    step: f64,
    prefactor_scale: f64,
    cfg: &IntegrationConfig,
) -> Result<CheckReport> {
    let mut t = Tracker::new("hprime_identity", Direction::AtMost, 1e-4).step(step);
    for &n in n_list {
        let nf = f64::from(n);
        for lambda in lambda_grid(grid_size) {
            let g = g_at(n, lambda, cfg)?;
            let rhs = 1.0 - g / (1.0 - lambda);
            if rhs.abs() <= 1e-6 {
                continue;
            }
            let dh = finite_difference(|x| h_at(n, x, cfg), lambda, step)?;
            let d1 = 1.0 + lambda * (nf - 1.0);
            let pre = (nf - 1.0).powi(2) * d1 * d1 * (1.0 - g).powi(2) / (nf * nf);
            let lhs = prefactor_scale * pre * dh;
            t.observe(n, lambda, ((lhs - rhs) / rhs).abs());
        }
    }
    Ok(t.finish())
}

/// `−G‴/6 > (1/(1+λ(N−1))⁴)·{N³/(3(N−1)+1) + 1 − 2N²/(2(N−1)+1)}` strictly.
pub fn check_g3_bound(
    n_list: &[u32],
    grid_size: usize,
    cfg: &IntegrationConfig,
) -> Result<CheckReport> {
    let mut t = Tracker::new("g3_lower_bound", Direction::Above, 0.0);
    for &n in n_list {
        let constant = g3_bound_constant(n);
        for lambda in lambda_grid(grid_size) {
            let shape = MarketShape::new(n, lambda)?;
            let lhs = -model::g_triple_prime(&shape, cfg)? / 6.0;
            let rhs = constant / (1.0 + lambda * (f64::from(n) - 1.0)).powi(4);
            t.observe(n, lambda, lhs - rhs);
        }
    }
    Ok(t.finish())
}

/// `−G‴ > 0` at every grid point.
pub fn check_g3_negative(
    n_list: &[u32],
    grid_size: usize,
    cfg: &IntegrationConfig,
) -> Result<CheckReport> {
    let mut t = Tracker::new("g3_negative", Direction::Above, 0.0);
    for &n in n_list {
        for lambda in lambda_grid(grid_size) {
            let g3 = model::g_triple_prime(&MarketShape::new(n, lambda)?, cfg)?;
            t.observe(n, lambda, -g3);
        }
    }
    Ok(t.finish())
}

/// The four limit facts, each normalised by its tolerance so the report
/// passes when the worst ratio is at most one.
///
/// | fact | evaluated at | tolerance |
/// |------|--------------|-----------|
/// | `G(0⁺) = 1` | `λ = 1e−7` | `1e−5` |
/// | `G′(0⁺) = −1` | `λ = 1e−7` | `1e−4` |
/// | `G″(0⁺) = 2N(N/(2(N−1)+1) − 1/N)` | `λ = 1e−6` | `1e−3` |
/// | `G(1⁻) = 0` | `λ = 1 − 1e−7` | `1e−3` for `N = 2`, else [`g_upper_envelope`] |
///
/// `G(1⁻)` approaches zero only like `((1−λ)/N)^(1/(N−1))`, so for `N ≥ 3`
/// the check squeezes `G` between zero and the vanishing envelope instead
/// of a fixed band.
pub fn check_limits(n_list: &[u32], cfg: &IntegrationConfig) -> Result<CheckReport> {
    let mut t = Tracker::new("limits", Direction::AtMost, 1.0);
    for &n in n_list {
        let small = MarketShape::new(n, LIMIT_EPS_G)?;
        t.observe(
            n,
            LIMIT_EPS_G,
            (model::g_value(&small, cfg)? - 1.0).abs() / 1e-5,
        );
        t.observe(
            n,
            LIMIT_EPS_G,
            (model::g_prime(&small, cfg)? + 1.0).abs() / 1e-4,
        );

        let g2 = model::g_double_prime(&MarketShape::new(n, LIMIT_EPS_G2)?, cfg)?;
        t.observe(n, LIMIT_EPS_G2, (g2 - g_double_prime_limit(n)).abs() / 1e-3);

        let near_one = 1.0 - LIMIT_EPS_G;
        let g = g_at(n, near_one, cfg)?;
        let band = if n == 2 {
            1e-3
        } else {
            g_upper_envelope(n, near_one)
        };
        let ratio = if g < 0.0 { f64::INFINITY } else { g / band };
        t.observe(n, near_one, ratio);
    }
    Ok(t.finish())
}

/// Exactly one sign change of `G″` on the grid for each `N`; the margin is
/// the worst `|changes − 1|`.
pub fn check_prop2_unique_inflection(
    n_list: &[u32],
    grid_size: usize,
    cfg: &IntegrationConfig,
) -> Result<CheckReport> {
    let mut t = Tracker::new("prop2_unique_inflection", Direction::AtMost, 0.0);
    for &n in n_list {
        let mut changes = 0usize;
        let mut prev: Option<f64> = None;
        let mut first_negative = f64::NAN;
        for lambda in lambda_grid(grid_size) {
            let g2 = model::g_double_prime(&MarketShape::new(n, lambda)?, cfg)?;
            if let Some(p) = prev {
                if (p > 0.0) != (g2 > 0.0) {
                    changes += 1;
                    if first_negative.is_nan() {
                        first_negative = lambda;
                    }
                }
            }
            prev = Some(g2);
        }
        t.observe(n, first_negative, (changes as f64 - 1.0).abs());
    }
    Ok(t.finish())
}

/// `|G″(λ_N^f)|` at the solver's root.
pub fn check_inflection_root(
    n_list: &[u32],
    scfg: &SolverConfig,
    cfg: &IntegrationConfig,
) -> Result<CheckReport> {
    let mut t = Tracker::new("prop2_inflection_root", Direction::AtMost, 1e-10);
    for &n in n_list {
        let r = solvers::lambda_inflection(n, scfg, cfg)?;
        let g2 = model::g_double_prime(&MarketShape::new(n, r.root)?, cfg)?;
        t.observe(
            n,
            r.root,
            if r.converged { g2.abs() } else { f64::INFINITY },
        );
    }
    Ok(t.finish())
}

/// Smoke test for the uniform bound on `t/D²` along `λ_k = 2^−k`: every
/// member stays below `max(sup_{y ≤ N^(−1/(N−1))} f_{λ₁}, N)`.
pub fn check_bounded_integrands(n_list: &[u32]) -> Result<CheckReport> {
    let mut t = Tracker::new("prop1_bounded_integrands", Direction::AtLeast, 0.0);
    let ys = grid(0.0, 1.0, 1001);
    let f = |n: u32, lambda: f64, y: f64| {
        let tv = f64::from(n) * y.powi(n as i32 - 1);
        tv / ((1.0 - lambda) + lambda * tv).powi(2)
    };
    for &n in n_list {
        let first = 0.5;
        let knee = f64::from(n).powf(-1.0 / (f64::from(n) - 1.0));
        let bound = ys
            .iter()
            .filter(|&&y| y <= knee)
            .map(|&y| f(n, first, y))
            .fold(f64::from(n), f64::max);
        for k in 1..=40 {
            let lambda = 0.5f64.powi(k);
            let sup = ys.iter().map(|&y| f(n, lambda, y)).fold(0.0, f64::max);
            t.observe(n, lambda, bound - sup);
        }
    }
    Ok(t.finish())
}

/// δ* and Γ sampled on `(λ̂, 1)` for one `(N, s, v)`.
struct DeltaScan {
    n: u32,
    target: f64,
    hat: f64,
    tilde: solvers::RootResult,
    lambdas: Vec<f64>,
    deltas: Vec<f64>,
    gammas: Vec<f64>,
    profit_form: Vec<f64>,
    endpoint_devs: [(f64, f64); 2],
}

fn delta_scan(
    n: u32,
    s: f64,
    v: f64,
    points: usize,
    scfg: &SolverConfig,
    cfg: &IntegrationConfig,
) -> Result<DeltaScan> {
    let target = (f64::from(n) - 1.0) / f64::from(n);
    let hat = solvers::lambda_hat(n, s, v, scfg, cfg)?;
    // the upper end of the final bracket sits on the reservation-price side
    let at_hat = hat.bracket_final.hi;
    let d_hat = model::delta_star(&MarketParams::new(n, at_hat, s, v)?, cfg)?;
    let near_one = 1.0 - LIMIT_EPS_G;
    let d_one = model::delta_star(&MarketParams::new(n, near_one, s, v)?, cfg)?;

    let tilde = solvers::lambda_tilde(n, s, v, scfg, cfg)?;
    let lambdas = grid(at_hat + ENDPOINT_OFFSET, 1.0 - ENDPOINT_OFFSET, points);
    let mut deltas = Vec::with_capacity(points);
    let mut gammas = Vec::with_capacity(points);
    let mut profit_form = Vec::with_capacity(points);
    for &lambda in &lambdas {
        let params = MarketParams::new(n, lambda, s, v)?;
        let g = model::g_value(&params.shape(), cfg)?;
        let p_star = s / (1.0 - g);
        deltas.push(model::delta_from_price(&params, p_star));
        gammas.push(model::gamma_from_g(&params, g));
        profit_form.push(model::profits(&params, p_star).critical_discount_factor());
    }
    Ok(DeltaScan {
        n,
        target,
        hat: at_hat,
        tilde,
        lambdas,
        deltas,
        gammas,
        profit_form,
        endpoint_devs: [
            (at_hat, (d_hat - target).abs()),
            (near_one, (d_one - target).abs()),
        ],
    })
}

/// Settings for the comparative-statics checks of `δ*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaCheckConfig {
    pub n_list: Vec<u32>,
    pub s_list: Vec<f64>,
    pub valuation: f64,
    /// Points on `(λ̂, 1)` for the argmin and sign-change scans.
    pub grid_points: usize,
    pub fd_step: f64,
}

impl Default for DeltaCheckConfig {
    fn default() -> Self {
        Self {
            n_list: vec![2, 3, 4, 5],
            s_list: vec![0.2, 0.6],
            valuation: 1.0,
            grid_points: 10_000,
            fd_step: FD_STEP,
        }
    }
}

/// All `δ*`/`Γ` checks, sharing one scan per `(N, s)`:
///
/// * `delta_endpoints`: `δ*(λ̂)` and `δ*(1−1e−7)` within 1e−6 of `(N−1)/N`;
/// * `delta_interior_dip`: the grid minimum lies strictly below `(N−1)/N`;
/// * `delta_tilde_argmin`: `λ̃` within one grid spacing of the argmin;
/// * `delta_profit_form`: the closed form of `δ*` against `(π^d−π^c)/(π^d−π*)`, 1e−12 relative;
/// * `gamma_single_sign_change`: `Γ` changes sign exactly once on `(λ̂, 1)`;
/// * `gamma_slope_sign`: the finite-difference slope of `δ*` has the sign
///   of `Γ` wherever `|Γ| > 1e−4`;
/// * `gamma_paths`: `v − p*(1+H)` against `v − p* + λ(1−λ)∂p*/∂λ`, 1e−8
///   relative to `max(|Γ|, v)`.
pub fn delta_checks(
    dcfg: &DeltaCheckConfig,
    scfg: &SolverConfig,
    cfg: &IntegrationConfig,
) -> Result<Vec<CheckReport>> {
    let mut endpoints = Tracker::new("delta_endpoints", Direction::AtMost, 1e-6);
    let mut dip = Tracker::new("delta_interior_dip", Direction::Above, 0.0);
    let mut argmin = Tracker::new("delta_tilde_argmin", Direction::AtMost, 1.0);
    let mut consistency = Tracker::new("delta_profit_form", Direction::AtMost, 1e-12);
    let mut sign_change = Tracker::new("gamma_single_sign_change", Direction::AtMost, 0.0);
    let mut slope_sign =
        Tracker::new("gamma_slope_sign", Direction::AtMost, 0.0).step(dcfg.fd_step);
    let mut paths = Tracker::new("gamma_paths", Direction::AtMost, 1e-8);
    let v = dcfg.valuation;

    for &n in &dcfg.n_list {
        for &s in &dcfg.s_list {
            let scan = delta_scan(n, s, v, dcfg.grid_points, scfg, cfg)?;
            for (lambda, dev) in scan.endpoint_devs {
                endpoints.observe(n, lambda, dev);
            }

            let (i_min, d_min) =
                scan.deltas
                    .iter()
                    .copied()
                    .enumerate()
                    .fold(
                        (0, f64::INFINITY),
                        |best, (i, d)| if d < best.1 { (i, d) } else { best },
                    );
            dip.observe(n, scan.lambdas[i_min], scan.target - d_min);

            let spacing = scan.lambdas[1] - scan.lambdas[0];
            let off = if scan.tilde.converged {
                (scan.tilde.root - scan.lambdas[i_min]).abs() / spacing
            } else {
                f64::INFINITY
            };
            argmin.observe(n, scan.tilde.root, off);

            for ((&lambda, &a), &b) in scan.lambdas.iter().zip(&scan.deltas).zip(&scan.profit_form)
            {
                consistency.observe(n, lambda, ((a - b) / a).abs());
            }

            let changes = scan
                .gammas
                .windows(2)
                .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
                .count();
            sign_change.observe(scan.n, scan.hat, (changes as f64 - 1.0).abs());

            // every 100th grid point keeps the slope and path checks cheap
            let stride = (scan.lambdas.len() / 100).max(1);
            for i in (0..scan.lambdas.len()).step_by(stride) {
                let lambda = scan.lambdas[i];
                let gamma = scan.gammas[i];
                let params = MarketParams::new(n, lambda, s, v)?;
                let other = model::gamma_via_slope(&params, cfg)?;
                paths.observe(n, lambda, (gamma - other).abs() / gamma.abs().max(v));

                if gamma.abs() > 1e-4
                    && lambda - dcfg.fd_step > scan.hat
                    && lambda + dcfg.fd_step < 1.0
                {
                    let slope = finite_difference(
                        |x| {
                            let p = params.with_shopper_share(x)?;
                            let (p_star, _) = model::reservation_price(&p, cfg)?;
                            Ok(model::delta_from_price(&p, p_star))
                        },
                        lambda,
                        dcfg.fd_step,
                    )?;
                    let mismatch = (slope > 0.0) != (gamma > 0.0);
                    slope_sign.observe(n, lambda, if mismatch { 1.0 } else { 0.0 });
                }
            }
        }
    }

    Ok(vec![
        endpoints.finish(),
        dip.finish(),
        argmin.finish(),
        consistency.finish(),
        sign_change.finish(),
        slope_sign.finish(),
        paths.finish(),
    ])
}

/// Endpoint values of `δ*` only; see [`delta_checks`] for the full set.
pub fn check_delta_endpoints(
    n_list: &[u32],
    s_list: &[f64],
    valuation: f64,
    scfg: &SolverConfig,
    cfg: &IntegrationConfig,
) -> Result<CheckReport> {
    let mut t = Tracker::new("delta_endpoints", Direction::AtMost, 1e-6);
    for &n in n_list {
        for &s in s_list {
            let hat = solvers::lambda_hat(n, s, valuation, scfg, cfg)?;
            let target = (f64::from(n) - 1.0) / f64::from(n);
            for lambda in [hat.bracket_final.hi, 1.0 - LIMIT_EPS_G] {
                let params = MarketParams::new(n, lambda, s, valuation)?;
                let (p_star, regime) = model::reservation_price(&params, cfg)?;
                if regime != Regime::ReservationPrice {
                    return Err(Error::NoReservationPrice {
                        shopper_share: lambda,
                        lambda_hat: hat.root,
                    });
                }
                t.observe(
                    n,
                    lambda,
                    (model::delta_from_price(&params, p_star) - target).abs(),
                );
            }
        }
    }
    Ok(t.finish())
}

fn require_grid(grid_size: usize) -> Result<()> {
    if grid_size < 100 {
        return Err(Error::InvalidParameter(format!(
            "grid must have at least 100 points, got {grid_size}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Firm counts for the proposition checks.
    pub n_list: Vec<u32>,
    /// Firm counts for the identity and limit checks, duopoly included.
    pub identity_n_list: Vec<u32>,
    pub grid_points: usize,
    pub identity_grid_points: usize,
    pub delta: DeltaCheckConfig,
    pub fd_step: f64,
    pub hprime_prefactor_scale: f64,
    pub integration: IntegrationConfig,
    pub solver: SolverConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            n_list: (3..=10).collect(),
            identity_n_list: (2..=10).collect(),
            grid_points: DEFAULT_GRID,
            identity_grid_points: 101,
            delta: DeltaCheckConfig::default(),
            fd_step: FD_STEP,
            hprime_prefactor_scale: 1.0,
            integration: IntegrationConfig::default(),
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn failing(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs every check; numerical failures inside a check become failed
/// reports. Reports are ordered by name.
pub fn run_suite(cfg: &SuiteConfig) -> SuiteReport {
    let icfg = &cfg.integration;
    let mut checks = Vec::new();
    let mut push = |name: &str, r: Result<CheckReport>| {
        checks.push(r.unwrap_or_else(|e| CheckReport::failed(name, &e)));
    };

    push("duopoly_closed_form", check_duopoly_closed_form(icfg));
    push(
        "prop3_g_above_diagonal",
        check_prop3(&cfg.n_list, cfg.grid_points, icfg),
    );
    push("monotone_in_n", check_monotone_in_n(cfg.grid_points, icfg));
    push(
        "gprime_identity",
        check_gprime_identity(&cfg.identity_n_list, cfg.identity_grid_points, icfg),
    );
    push(
        "hprime_identity",
        check_hprime_identity(
            &cfg.n_list,
            cfg.identity_grid_points,
            cfg.fd_step,
            cfg.hprime_prefactor_scale,
            icfg,
        ),
    );
    push(
        "g3_lower_bound",
        check_g3_bound(&cfg.n_list, cfg.grid_points, icfg),
    );
    push(
        "g3_negative",
        check_g3_negative(&cfg.n_list, cfg.grid_points, icfg),
    );
    push("limits", check_limits(&cfg.identity_n_list, icfg));
    push(
        "prop2_unique_inflection",
        check_prop2_unique_inflection(&cfg.n_list, cfg.grid_points, icfg),
    );
    push(
        "prop2_inflection_root",
        check_inflection_root(&cfg.n_list, &cfg.solver, icfg),
    );
    push(
        "prop1_bounded_integrands",
        check_bounded_integrands(&cfg.n_list),
    );
    match delta_checks(&cfg.delta, &cfg.solver, icfg) {
        Ok(reports) => checks.extend(reports),
        Err(e) => checks.push(CheckReport::failed("delta_checks", &e)),
    }

    checks.sort_by(|a, b| a.name.cmp(&b.name));
    SuiteReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
