//! Market quantities as pure functions of the firm count `N`, the shopper
//! share `λ`, the search cost `s` and the valuation `v`.
//!
//! Everything is built on
//!
//! ```text
//! G(λ;N) = ∫₀¹ (1−λ) / ((1−λ) + λ·N·y^(N−1)) dy
//! ```
//!
//! and its λ-derivatives, obtained by differentiating under the integral.
//! Writing `t = N·y^(N−1)` and `D = (1−λ) + λ·t`:
//!
//! ```text
//! G′   = −∫ t / D²
//! G″   =  ∫ 2t(t−1) / D³
//! G‴   = −∫ 6t(t−1)² / D⁴
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, IntegralResult, IntegrationConfig};
use crate::solvers::{self, SolverConfig};

pub const MIN_FIRMS: u32 = 2;
pub const MAX_FIRMS: u32 = 64;

fn check_firms(n_firms: u32) -> Result<()> {
    if (MIN_FIRMS..=MAX_FIRMS).contains(&n_firms) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "number of firms must lie in [{MIN_FIRMS}, {MAX_FIRMS}], got {n_firms}"
        )))
    }
}

fn check_share(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "shopper share must lie in the open interval (0, 1), got {lambda}"
        )))
    }
}

/// The part of the market that `G` and its derivatives depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketShape {
    pub n_firms: u32,
    pub shopper_share: f64,
}

impl MarketShape {
    pub fn new(n_firms: u32, shopper_share: f64) -> Result<Self> {
        let shape = Self {
            n_firms,
            shopper_share,
        };
        shape.validate()?;
        Ok(shape)
    }

    pub fn validate(&self) -> Result<()> {
        check_firms(self.n_firms)?;
        check_share(self.shopper_share)
    }

    fn n(&self) -> f64 {
        f64::from(self.n_firms)
    }

    /// `1 + λ(N−1)`, the value of `D` at `y = 1`.
    fn d_at_one(&self) -> f64 {
        1.0 + self.shopper_share * (self.n() - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub n_firms: u32,
    pub shopper_share: f64,
    pub search_cost: f64,
    pub valuation: f64,
}

impl MarketParams {
    pub fn new(n_firms: u32, shopper_share: f64, search_cost: f64, valuation: f64) -> Result<Self> {
        let p = Self {
            n_firms,
            shopper_share,
            search_cost,
            valuation,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_firms(self.n_firms)?;
        check_share(self.shopper_share)?;
        check_costs(self.search_cost, self.valuation)
    }

    pub fn shape(&self) -> MarketShape {
        MarketShape {
            n_firms: self.n_firms,
            shopper_share: self.shopper_share,
        }
    }

    pub fn with_shopper_share(self, shopper_share: f64) -> Result<Self> {
        Self::new(
            self.n_firms,
            shopper_share,
            self.search_cost,
            self.valuation,
        )
    }

    fn n(&self) -> f64 {
        f64::from(self.n_firms)
    }
}

pub(crate) fn check_costs(search_cost: f64, valuation: f64) -> Result<()> {
    if search_cost.is_finite()
        && valuation.is_finite()
        && 0.0 < search_cost
        && search_cost < valuation
    {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "need 0 < search cost < valuation, got s = {search_cost}, v = {valuation}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `p* ≤ v`: the reservation price is the upper end of the price support.
    ReservationPrice,
    NoReservationPrice,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GDerivatives {
    pub g: f64,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    /// Quadrature error estimates for `g`, `g1`, `g2`, `g3` in that order.
    pub errors: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profits {
    pub collusive: f64,
    pub deviation: f64,
    pub nash: f64,
}

impl Profits {
    /// `(π^d − π^c) / (π^d − π*)`.
    pub fn critical_discount_factor(&self) -> f64 {
        (self.deviation - self.collusive) / (self.deviation - self.nash)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub params: MarketParams,
    pub g_family: GDerivatives,
    pub p_star: f64,
    pub profit_collusive: f64,
    pub profit_deviation: f64,
    /// `None` outside the reservation-price regime, as are the fields below.
    pub profit_nash: Option<f64>,
    pub delta_star: Option<f64>,
    pub h: Option<f64>,
    pub gamma: Option<f64>,
    pub regime: Regime,
}

fn converged(quantity: &'static str, r: IntegralResult) -> Result<IntegralResult> {
    if r.converged {
        Ok(r)
    } else {
        Err(Error::QuadratureNotConverged {
            quantity,
            value: r.value,
            error: r.abs_error_estimate,
        })
    }
}

fn g_family_integral(
    shape: &MarketShape,
    cfg: &IntegrationConfig,
    quantity: &'static str,
    kernel: impl Fn(f64, f64, f64) -> f64,
) -> Result<IntegralResult> {
    shape.validate()?;
    let lambda = shape.shopper_share;
    let n = shape.n();
    let power = shape.n_firms as i32 - 1;
    let r = integrate(
        |y| {
            let t = n * y.powi(power);
            let d = (1.0 - lambda) + lambda * t;
            kernel(t, d, lambda)
        },
        cfg,
    )?;
    converged(quantity, r)
}

fn g_integral(shape: &MarketShape, cfg: &IntegrationConfig) -> Result<IntegralResult> {
    g_family_integral(shape, cfg, "G", |_, d, lambda| (1.0 - lambda) / d)
}

fn g1_integral(shape: &MarketShape, cfg: &IntegrationConfig) -> Result<IntegralResult> {
    g_family_integral(shape, cfg, "G'", |t, d, _| -t / (d * d))
}

fn g2_integral(shape: &MarketShape, cfg: &IntegrationConfig) -> Result<IntegralResult> {
    g_family_integral(shape, cfg, "G''", |t, d, _| {
        2.0 * t * (t - 1.0) / (d * d * d)
    })
}

fn g3_integral(shape: &MarketShape, cfg: &IntegrationConfig) -> Result<IntegralResult> {
    g_family_integral(shape, cfg, "G'''", |t, d, _| {
        let d2 = d * d;
        -6.0 * t * (t - 1.0) * (t - 1.0) / (d2 * d2)
    })
}

pub fn g_value(shape: &MarketShape, cfg: &IntegrationConfig) -> Result<f64> {
    g_integral(shape, cfg).map(|r| r.value)
}

pub fn g_prime(shape: &MarketShape, cfg: &IntegrationConfig) -> Result<f64> {
    g1_integral(shape, cfg).map(|r| r.value)
}

pub fn g_double_prime(shape: &MarketShape, cfg: &IntegrationConfig) -> Result<f64> {
    g2_integral(shape, cfg).map(|r| r.value)
}

pub fn g_triple_prime(shape: &MarketShape, cfg: &IntegrationConfig) -> Result<f64> {
    g3_integral(shape, cfg).map(|r| r.value)
}

pub fn g_derivatives(shape: &MarketShape, cfg: &IntegrationConfig) -> Result<GDerivatives> {
    let g = g_integral(shape, cfg)?;
    let g1 = g1_integral(shape, cfg)?;
    let g2 = g2_integral(shape, cfg)?;
    let g3 = g3_integral(shape, cfg)?;
    Ok(GDerivatives {
        g: g.value,
        g1: g1.value,
        g2: g2.value,
        g3: g3.value,
        errors: [
            g.abs_error_estimate,
            g1.abs_error_estimate,
            g2.abs_error_estimate,
            g3.abs_error_estimate,
        ],
    })
}

/// `G′` recovered from `G` alone:
/// `−[G(1+λ(N−1)) − (1−λ)] / [λ(N−1)(1+λ(N−1))(1−λ)]`.
pub fn g_prime_closed(shape: &MarketShape, g: f64) -> f64 {
    let lambda = shape.shopper_share;
    let d1 = shape.d_at_one();
    -(g * d1 - (1.0 - lambda)) / (lambda * (shape.n() - 1.0) * d1 * (1.0 - lambda))
}

/// `H(λ) = [G(1+λ(N−1)) − (1−λ)] / [(N−1)(1+λ(N−1))(1−G)]`, so that
/// `Γ = v − p*(1 + H)`.
pub fn h_value(shape: &MarketShape, g: f64) -> f64 {
    let lambda = shape.shopper_share;
    let d1 = shape.d_at_one();
    (g * d1 - (1.0 - lambda)) / ((shape.n() - 1.0) * d1 * (1.0 - g))
}

fn regime_of(p_star: f64, valuation: f64) -> Regime {
    if p_star <= valuation {
        Regime::ReservationPrice
    } else {
        Regime::NoReservationPrice
    }
}

/// `p* = s / (1 − G)`.
pub fn reservation_price(params: &MarketParams, cfg: &IntegrationConfig) -> Result<(f64, Regime)> {
    params.validate()?;
    let g = g_value(&params.shape(), cfg)?;
    let p_star = params.search_cost / (1.0 - g);
    Ok((p_star, regime_of(p_star, params.valuation)))
}

/// `∂p*/∂λ = s·G′ / (1−G)²`.
pub fn reservation_price_slope(params: &MarketParams, cfg: &IntegrationConfig) -> Result<f64> {
    params.validate()?;
    let shape = params.shape();
    let g = g_value(&shape, cfg)?;
    let g1 = g_prime(&shape, cfg)?;
    Ok(params.search_cost * g1 / ((1.0 - g) * (1.0 - g)))
}

pub fn profits(params: &MarketParams, p_star: f64) -> Profits {
    let n = params.n();
    let lambda = params.shopper_share;
    let v = params.valuation;
    Profits {
        collusive: v / n,
        deviation: v * ((1.0 - lambda) / n + lambda),
        nash: p_star * (1.0 - lambda) / n,
    }
}

/// `δ* = λ(N−1) / (1 + λ(N−1) − p*(1−λ)/v)` for a given reservation price.
pub fn delta_from_price(params: &MarketParams, p_star: f64) -> f64 {
    let lambda = params.shopper_share;
    let spread = lambda * (params.n() - 1.0);
    spread / (1.0 + spread - p_star * (1.0 - lambda) / params.valuation)
}

/// Critical discount factor; only defined in the reservation-price regime.
pub fn delta_star(params: &MarketParams, cfg: &IntegrationConfig) -> Result<f64> {
    let (p_star, regime) = reservation_price(params, cfg)?;
    match regime {
        Regime::ReservationPrice => Ok(delta_from_price(params, p_star)),
        Regime::NoReservationPrice => {
            let lambda_hat = solvers::lambda_hat(
                params.n_firms,
                params.search_cost,
                params.valuation,
                &SolverConfig::default(),
                cfg,
            )
            .map(|r| r.root)
            .unwrap_or(f64::NAN);
            Err(Error::NoReservationPrice {
                shopper_share: params.shopper_share,
                lambda_hat,
            })
        }
    }
}

/// `Γ = v − p*(1 + H)` from a precomputed `G`.
pub fn gamma_from_g(params: &MarketParams, g: f64) -> f64 {
    let p_star = params.search_cost / (1.0 - g);
    params.valuation - p_star * (1.0 + h_value(&params.shape(), g))
}

/// Sign-determining factor of `∂δ*/∂λ`.
pub fn gamma_value(params: &MarketParams, cfg: &IntegrationConfig) -> Result<f64> {
    params.validate()?;
    let g = g_value(&params.shape(), cfg)?;
    Ok(gamma_from_g(params, g))
}

/// `Γ = v − p* + λ(1−λ)·∂p*/∂λ` with the slope taken from the quadrature `G′`.
pub fn gamma_via_slope(params: &MarketParams, cfg: &IntegrationConfig) -> Result<f64> {
    params.validate()?;
    let shape = params.shape();
    let g = g_value(&shape, cfg)?;
    let g1 = g_prime(&shape, cfg)?;
    let lambda = params.shopper_share;
    let p_star = params.search_cost / (1.0 - g);
    let slope = params.search_cost * g1 / ((1.0 - g) * (1.0 - g));
    Ok(params.valuation - p_star + lambda * (1.0 - lambda) * slope)
}

pub fn equilibrium_point(
    params: &MarketParams,
    cfg: &IntegrationConfig,
) -> Result<EquilibriumPoint> {
    params.validate()?;
    let shape = params.shape();
    let g_family = g_derivatives(&shape, cfg)?;
    let g = g_family.g;
    let p_star = params.search_cost / (1.0 - g);
    let regime = regime_of(p_star, params.valuation);
    let pi = profits(params, p_star);

    let (profit_nash, delta_star, h, gamma) = match regime {
        Regime::ReservationPrice => (
            Some(pi.nash),
            Some(delta_from_price(params, p_star)),
            Some(h_value(&shape, g)),
            Some(gamma_from_g(params, g)),
        ),
        Regime::NoReservationPrice => (None, None, None, None),
    };

    Ok(EquilibriumPoint {
        params: *params,
        g_family,
        p_star,
        profit_collusive: pi.collusive,
        profit_deviation: pi.deviation,
        profit_nash,
        delta_star,
        h,
        gamma,
        regime,
    })
}
