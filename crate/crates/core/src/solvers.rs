//! Bracketing root finder and the model's three thresholds.
//!
//! * `λ̂`: smallest shopper share with a reservation-price equilibrium, the
//!   root of `1 − G(λ;N) = s/v`.
//! * `λ_N^f`: inflection point of `G`, the root of `G″(λ;N)`.
//! * `λ̃`: minimiser of the critical discount factor, the zero of `Γ` on
//!   `(λ̂, 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, check_costs, MarketParams, MarketShape};
use crate::quadrature::IntegrationConfig;

/// Offset keeping threshold searches away from the open-interval endpoints.
pub const ENDPOINT_OFFSET: f64 = 1e-6;

/// Grid used when `λ̃` has to fall back to a direct search over `δ*`.
const FALLBACK_GRID: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub x_tol: f64,
    pub f_tol: f64,
    pub max_iterations: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            x_tol: 1e-12,
            f_tol: 1e-10,
            max_iterations: 200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_tol > 0.0 && self.f_tol > 0.0 && self.max_iterations > 0) {
            return Err(Error::InvalidParameter(format!(
                "solver tolerances and iteration budget must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    /// Requires `lo < hi` and a strict sign change.
    pub fn new(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        let ok = lo < hi && f_lo.is_finite() && f_hi.is_finite() && f_lo * f_hi < 0.0;
        if ok {
            Ok(Self { lo, hi, f_lo, f_hi })
        } else {
            Err(Error::InvalidBracket { lo, hi, f_lo, f_hi })
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootNote {
    /// No sign change was available; the root is the argmin of a grid scan.
    GridArgminFallback,
    /// The function was below `f_tol` across the whole bracket; the root is
    /// the bracket midpoint.
    FlatRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootResult {
    pub root: f64,
    pub residual: f64,
    pub iterations: u32,
    pub converged: bool,
    /// Collapses to a single point when an exact zero is hit.
    pub bracket_final: Bracket,
    pub note: Option<RootNote>,
}

fn finite_at(x: f64, fx: f64) -> Result<f64> {
    if fx.is_finite() {
        Ok(fx)
    } else {
        Err(Error::NonFiniteFunction { x })
    }
}

/// Evaluates `f` at both ends and builds the bracket.
pub fn bracket_from<F>(mut f: F, lo: f64, hi: f64) -> Result<Bracket>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f_lo = finite_at(lo, f(lo)?)?;
    let f_hi = finite_at(hi, f(hi)?)?;
    Bracket::new(lo, hi, f_lo, f_hi)
}

/// Root of `f` inside `bracket`.
pub fn find_root<F>(mut f: F, bracket: Bracket, cfg: &SolverConfig) -> Result<RootResult>
where
    F: FnMut(f64) -> f64,
{
    try_find_root(|x| Ok(f(x)), bracket, cfg)
}

/// Bisection with inverse-quadratic and secant acceleration.
///
/// Accelerated steps are kept a quarter of `x_tol` inside the bracket, and a
/// plain bisection is forced whenever two steps failed to halve the bracket,
/// so the bracket shrinks at least geometrically. Converged means the
/// bracket is no wider than `x_tol` and the better endpoint has
/// `|f| ≤ f_tol`.
pub fn try_find_root<F>(mut f: F, bracket: Bracket, cfg: &SolverConfig) -> Result<RootResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    cfg.validate()?;
    let Bracket {
        lo: mut a,
        hi: mut b,
        f_lo: mut fa,
        f_hi: mut fb,
    } = Bracket::new(bracket.lo, bracket.hi, bracket.f_lo, bracket.f_hi)?;

    let mut dropped: Option<(f64, f64)> = None;
    let mut widths = vec![b - a];
    let mut iterations = 0;

    let finish = |a: f64, b: f64, fa: f64, fb: f64, iterations: u32, converged: bool| {
        let (root, residual) = if fa.abs() <= fb.abs() {
            (a, fa)
        } else {
            (b, fb)
        };
        RootResult {
            root,
            residual,
            iterations,
            converged,
            bracket_final: Bracket {
                lo: a,
                hi: b,
                f_lo: fa,
                f_hi: fb,
            },
            note: None,
        }
    };

    loop {
        let width = b - a;
        if width <= cfg.x_tol && fa.abs().min(fb.abs()) <= cfg.f_tol {
            return Ok(finish(a, b, fa, fb, iterations, true));
        }
        let mid = a + 0.5 * width;
        if iterations >= cfg.max_iterations || mid <= a || mid >= b {
            return Ok(finish(a, b, fa, fb, iterations, false));
        }

        let n = widths.len();
        let stalled = n >= 3 && width > 0.5 * widths[n - 3];
        let guard = 0.25 * cfg.x_tol.min(width);

        let mut x = mid;
        if !stalled && width > 4.0 * guard {
            let candidate = match dropped {
                Some((c, fc)) if fc != fa && fc != fb && fa != fb => {
                    // inverse quadratic interpolation through the three points
                    a * fb * fc / ((fa - fb) * (fa - fc))
                        + b * fa * fc / ((fb - fa) * (fb - fc))
                        + c * fa * fb / ((fc - fa) * (fc - fb))
                }
                _ => a - fa * (b - a) / (fb - fa),
            };
            if candidate.is_finite() && candidate > a && candidate < b {
                x = candidate.clamp(a + guard, b - guard);
            }
        }

        let fx = finite_at(x, f(x)?)?;
        iterations += 1;

        if fx == 0.0 {
            return Ok(RootResult {
                root: x,
                residual: 0.0,
                iterations,
                converged: true,
                bracket_final: Bracket {
                    lo: x,
                    hi: x,
                    f_lo: 0.0,
                    f_hi: 0.0,
                },
                note: None,
            });
        }

        if fx.signum() == fa.signum() {
            dropped = Some((a, fa));
            a = x;
            fa = fx;
        } else {
            dropped = Some((b, fb));
            b = x;
            fb = fx;
        }
        widths.push(b - a);
    }
}

/// `λ̂(N, s, v)`: root of `1 − G(λ;N) − s/v`.
///
/// The bracket starts at `[1e−6, 1 − 1e−6]` and is pushed towards the
/// endpoints when `s/v` is extreme enough that the seed misses the sign
/// change.
pub fn lambda_hat(
    n_firms: u32,
    search_cost: f64,
    valuation: f64,
    cfg: &SolverConfig,
    icfg: &IntegrationConfig,
) -> Result<RootResult> {
    check_costs(search_cost, valuation)?;
    MarketShape::new(n_firms, 0.5)?;
    let ratio = search_cost / valuation;
    let excess = |lambda: f64| -> Result<f64> {
        let g = model::g_value(&MarketShape::new(n_firms, lambda)?, icfg)?;
        Ok(1.0 - g - ratio)
    };

    let mut lo = ENDPOINT_OFFSET;
    let mut f_lo = excess(lo)?;
    while f_lo >= 0.0 && lo > 1e-15 {
        lo *= 1e-3;
        f_lo = excess(lo)?;
    }
    let mut gap = ENDPOINT_OFFSET;
    let mut f_hi = excess(1.0 - gap)?;
    while f_hi <= 0.0 && gap > 1e-15 {
        gap *= 1e-3;
        f_hi = excess(1.0 - gap)?;
    }
    if f_lo >= 0.0 || f_hi <= 0.0 {
        return Err(Error::NoSignChange("lambda_hat"));
    }

    let bracket = Bracket::new(lo, 1.0 - gap, f_lo, f_hi)?;
    try_find_root(excess, bracket, cfg)
}

/// `λ_N^f`: the zero of `G″(·;N)`.
pub fn lambda_inflection(
    n_firms: u32,
    cfg: &SolverConfig,
    icfg: &IntegrationConfig,
) -> Result<RootResult> {
    let curvature = |lambda: f64| -> Result<f64> {
        model::g_double_prime(&MarketShape::new(n_firms, lambda)?, icfg)
    };
    let bracket = match bracket_from(curvature, ENDPOINT_OFFSET, 1.0 - ENDPOINT_OFFSET) {
        Ok(b) => b,
        Err(Error::InvalidBracket { .. }) => return Err(Error::NoSignChange("lambda_inflection")),
        Err(e) => return Err(e),
    };
    try_find_root(curvature, bracket, cfg)
}

/// `λ̃(N, s, v)`: the zero of `Γ` on `(λ̂, 1)`.
///
/// The sign change `Γ(λ̂⁺) < 0 < Γ(1⁻)` is checked, not assumed. Without
/// it the grid argmin of `δ*` is returned with `converged = false` and
/// [`RootNote::GridArgminFallback`].
pub fn lambda_tilde(
    n_firms: u32,
    search_cost: f64,
    valuation: f64,
    cfg: &SolverConfig,
    icfg: &IntegrationConfig,
) -> Result<RootResult> {
    let hat = lambda_hat(n_firms, search_cost, valuation, cfg, icfg)?;
    let lo = hat.bracket_final.hi + ENDPOINT_OFFSET;
    let hi = 1.0 - ENDPOINT_OFFSET;
    if lo >= hi {
        return Err(Error::NoSignChange("lambda_tilde"));
    }
    let params = |lambda: f64| MarketParams::new(n_firms, lambda, search_cost, valuation);
    let gamma = |lambda: f64| -> Result<f64> { model::gamma_value(&params(lambda)?, icfg) };

    let g_lo = gamma(lo)?;
    let g_hi = gamma(hi)?;
    if g_lo.abs() < cfg.f_tol && g_hi.abs() < cfg.f_tol {
        let mid = 0.5 * (lo + hi);
        return Ok(RootResult {
            root: mid,
            residual: gamma(mid)?,
            iterations: 0,
            converged: true,
            bracket_final: Bracket {
                lo,
                hi,
                f_lo: g_lo,
                f_hi: g_hi,
            },
            note: Some(RootNote::FlatRegion),
        });
    }

    if g_lo < 0.0 && g_hi > 0.0 {
        let bracket = Bracket::new(lo, hi, g_lo, g_hi)?;
        return try_find_root(gamma, bracket, cfg);
    }

    let mut best = (lo, f64::INFINITY);
    for i in 0..FALLBACK_GRID {
        let lambda = lo + (hi - lo) * i as f64 / (FALLBACK_GRID - 1) as f64;
        let delta = model::delta_star(&params(lambda)?, icfg)?;
        if delta < best.1 {
            best = (lambda, delta);
        }
    }
    Ok(RootResult {
        root: best.0,
        residual: gamma(best.0)?,
        iterations: FALLBACK_GRID as u32,
        converged: false,
        bracket_final: Bracket {
            lo,
            hi,
            f_lo: g_lo,
            f_hi: g_hi,
        },
        note: Some(RootNote::GridArgminFallback),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn icfg() -> IntegrationConfig {
        IntegrationConfig::default()
    }

    fn g_duopoly(lambda: f64) -> f64 {
        (1.0 - lambda) * lambda.atanh() / lambda
    }

    #[test]
    fn linear_root() {
        let r = find_root(
            |x| x - 0.25,
            Bracket::new(0.0, 1.0, -0.25, 0.75).unwrap(),
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(r.converged);
        assert!((r.root - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sqrt_two() {
        let f = |x: f64| x * x - 2.0;
        let b = bracket_from(|x| Ok(f(x)), 1.0, 2.0).unwrap();
        let r = find_root(f, b, &SolverConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.root - 2f64.sqrt()).abs() < 1e-10);
        assert!(r.bracket_final.width() <= 1e-12);
        assert!(r.residual.abs() <= 1e-10);
    }

    #[test]
    fn model_residual_within_tolerance() {
        let cfg = SolverConfig::default();
        let f = |x: f64| 1.0 - g_duopoly(x) - 0.2;
        let b = bracket_from(|x| Ok(f(x)), 0.2, 0.25).unwrap();
        let r = find_root(f, b, &cfg).unwrap();
        assert!(r.converged && r.residual.abs() <= cfg.f_tol);
    }

    #[test]
    fn invalid_brackets_are_rejected() {
        assert!(Bracket::new(0.0, 1.0, 1.0, 2.0).is_err());
        assert!(Bracket::new(1.0, 0.0, -1.0, 1.0).is_err());
        assert!(Bracket::new(0.0, 1.0, 0.0, 1.0).is_err());
        let bad = Bracket {
            lo: 0.0,
            hi: 1.0,
            f_lo: 1.0,
            f_hi: 1.0,
        };
        assert!(matches!(
            find_root(|x| x, bad, &SolverConfig::default()),
            Err(Error::InvalidBracket { .. })
        ));
    }

    #[test]
    fn budget_exhaustion_reports_unconverged() {
        let cfg = SolverConfig {
            max_iterations: 3,
            ..SolverConfig::default()
        };
        let r = find_root(
            |x| x.powi(3) - 0.3,
            Bracket::new(0.0, 1.0, -0.3, 0.7).unwrap(),
            &cfg,
        )
        .unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
        assert!(r.root >= 0.0 && r.root <= 1.0);
    }

    #[test]
    fn bracket_shrinks_monotonically() {
        let mut seen = Vec::new();
        let r = find_root(
            |x| {
                seen.push(x);
                (x - 0.3).tan()
            },
            Bracket::new(0.0, 1.0, (-0.3f64).tan(), 0.7f64.tan()).unwrap(),
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(r.converged);
        assert!(seen.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn lambda_hat_duopoly_bracket() {
        // sign evaluation of the closed form: 1−G(0.2) < 0.2 < 1−G(0.25)
        assert!(1.0 - g_duopoly(0.2) < 0.2 && 1.0 - g_duopoly(0.25) > 0.2);
        let r = lambda_hat(2, 0.2, 1.0, &SolverConfig::default(), &icfg()).unwrap();
        assert!(r.converged);
        assert!(r.root > 0.20 && r.root < 0.25);

        // plain bisection on the closed form as oracle
        let (mut lo, mut hi) = (0.2, 0.25);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if 1.0 - g_duopoly(mid) < 0.2 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((r.root - lo).abs() < 1e-10);
    }

    #[test]
    fn lambda_hat_increases_with_search_cost() {
        let mut prev = 0.0;
        for i in 1..=9 {
            let s = i as f64 / 10.0;
            let r = lambda_hat(4, s, 1.0, &SolverConfig::default(), &icfg()).unwrap();
            assert!(r.converged && r.root > prev);
            prev = r.root;
        }
    }

    #[test]
    fn lambda_hat_vanishes_with_search_cost() {
        let a = lambda_hat(3, 1e-3, 1.0, &SolverConfig::default(), &icfg()).unwrap();
        let b = lambda_hat(3, 1e-7, 1.0, &SolverConfig::default(), &icfg()).unwrap();
        assert!(b.root < a.root && b.root < 1e-6);
    }

    #[test]
    fn lambda_inflection_is_a_curvature_zero() {
        let cfg = SolverConfig::default();
        for n in 3..=10 {
            let r = lambda_inflection(n, &cfg, &icfg()).unwrap();
            assert!(r.converged, "N={n}");
            assert!(r.residual.abs() <= cfg.f_tol);
            let left = model::g_double_prime(&MarketShape::new(n, r.root * 0.9).unwrap(), &icfg())
                .unwrap();
            let right = model::g_double_prime(
                &MarketShape::new(n, r.root + 0.1 * (1.0 - r.root)).unwrap(),
                &icfg(),
            )
            .unwrap();
            assert!(left > 0.0 && right < 0.0);
        }
    }

    #[test]
    fn lambda_inflection_matches_sign_scan() {
        let r = lambda_inflection(3, &SolverConfig::default(), &icfg()).unwrap();
        let points = 100_000;
        let mut prev: Option<(f64, f64)> = None;
        let mut crossing = None;
        for i in 1..points {
            let lambda = i as f64 / points as f64;
            let g2 = model::g_double_prime(&MarketShape::new(3, lambda).unwrap(), &icfg()).unwrap();
            if let Some((pl, pg)) = prev {
                if pg > 0.0 && g2 <= 0.0 {
                    crossing = Some(0.5 * (pl + lambda));
                    break;
                }
            }
            prev = Some((lambda, g2));
        }
        assert!((crossing.unwrap() - r.root).abs() < 1e-4);
    }

    #[test]
    fn lambda_tilde_duopoly() {
        let cfg = SolverConfig::default();
        let r = lambda_tilde(2, 0.2, 1.0, &cfg, &icfg()).unwrap();
        assert!(r.converged && r.note.is_none());
        assert!(r.residual.abs() <= cfg.f_tol);
        let hat = lambda_hat(2, 0.2, 1.0, &cfg, &icfg()).unwrap();
        assert!(hat.root < r.root && r.root < 0.5);
    }

    #[test]
    fn tighter_tolerance_stays_within_previous() {
        let loose = SolverConfig {
            x_tol: 1e-6,
            f_tol: 1e-5,
            max_iterations: 200,
        };
        let tight = SolverConfig::default();
        let a = lambda_hat(5, 0.3, 1.0, &loose, &icfg()).unwrap();
        let b = lambda_hat(5, 0.3, 1.0, &tight, &icfg()).unwrap();
        assert!((a.root - b.root).abs() <= loose.x_tol);
        let a = lambda_tilde(5, 0.3, 1.0, &loose, &icfg()).unwrap();
        let b = lambda_tilde(5, 0.3, 1.0, &tight, &icfg()).unwrap();
        assert!((a.root - b.root).abs() <= loose.x_tol);
    }
}
