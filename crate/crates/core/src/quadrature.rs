//! Adaptive Gauss-Kronrod integration on finite intervals.
//!
//! Each subinterval is integrated with the 15-point Kronrod rule and its
//! embedded 7-point Gauss rule; their difference, rescaled as in QUADPACK,
//! is the local error estimate. The subinterval with the largest estimate is
//! bisected until the summed estimate meets `max(abs_tol, rel_tol * |value|)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections leading to any subinterval.
    pub max_depth: u32,
    /// Subintervals narrower than this are never split.
    pub min_interval: f64,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_depth: 60,
            min_interval: 1e-15,
        }
    }
}

impl IntegrationConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: u32, min_interval: f64) -> Result<Self> {
        let cfg = Self {
            abs_tol,
            rel_tol,
            max_depth,
            min_interval,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same depth limits with different error targets.
    pub fn with_tolerances(self, abs_tol: f64, rel_tol: f64) -> Result<Self> {
        Self::new(abs_tol, rel_tol, self.max_depth, self.min_interval)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.abs_tol) {
            return Err(Error::InvalidParameter(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !positive(self.rel_tol) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidParameter(
                "max_depth must be at least 1".into(),
            ));
        }
        if !positive(self.min_interval) {
            return Err(Error::InvalidParameter(format!(
                "min_interval must be positive, got {}",
                self.min_interval
            )));
        }
        Ok(())
    }

    pub fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

// Kronrod abscissae on [-1, 1] (non-negative half, descending); odd entries
// are the Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
    // error estimate is already at the floating-point floor; bisecting
    // cannot reduce it
    at_roundoff: bool,
}

fn check(y: f64, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteIntegrand { y, value })
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: u32) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = check(center, f(center))?;
    let mut res_k = f_center * WGK[7];
    let mut res_g = f_center * WG[3];
    let mut res_abs = res_k.abs();
    let mut f_lo = [0.0; 7];
    let mut f_hi = [0.0; 7];

    for j in 0..7 {
        let dx = half * XGK[j];
        let (y1, y2) = (center - dx, center + dx);
        let f1 = check(y1, f(y1))?;
        let f2 = check(y2, f(y2))?;
        f_lo[j] = f1;
        f_hi[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((f_lo[j] - mean).abs() + (f_hi[j] - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let raw = ((res_k - res_g) * half).abs();

    let mut error = raw;
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    let at_roundoff = error <= floor;
    if at_roundoff {
        error = floor;
    }

    Ok(Segment {
        a,
        b,
        value,
        error,
        depth,
        at_roundoff,
    })
}

/// Integrates `f` over `[0, 1]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, cfg: &IntegrationConfig) -> Result<IntegralResult> {
    integrate_on(f, 0.0, 1.0, cfg)
}

/// Integrates `f` over `[a, b]` with `a < b`.
///
/// `converged` is false only when the error target is out of reach because
/// every subinterval that still carries error is at the depth limit, below
/// `min_interval`, or at the floating-point error floor.
pub fn integrate_on<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &IntegrationConfig,
) -> Result<IntegralResult> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidParameter(format!(
            "integration limits must be finite with a < b, got [{a}, {b}]"
        )));
    }

    let mut segments = vec![kronrod15(&f, a, b, 0)?];
    let mut evaluations = 15;

    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= cfg.target(value) {
            return Ok(IntegralResult {
                value,
                abs_error_estimate: error,
                evaluations,
                converged: true,
            });
        }

        // first-index tie-break keeps the refinement order deterministic
        let mut pick: Option<usize> = None;
        for (i, s) in segments.iter().enumerate() {
            let splittable =
                !s.at_roundoff && s.depth < cfg.max_depth && 0.5 * (s.b - s.a) >= cfg.min_interval;
            if splittable && pick.is_none_or(|p| s.error > segments[p].error) {
                pick = Some(i);
            }
        }

        let Some(i) = pick else {
            return Ok(IntegralResult {
                value,
                abs_error_estimate: error,
                evaluations,
                converged: false,
            });
        };

        let parent = segments[i];
        let mid = 0.5 * (parent.a + parent.b);
        let left = kronrod15(&f, parent.a, mid, parent.depth + 1)?;
        let right = kronrod15(&f, mid, parent.b, parent.depth + 1)?;
        evaluations += 30;
        segments[i] = left;
        segments.insert(i + 1, right);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn midpoint_oracle<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
        let h = 1.0 / n as f64;
        let mut sum = 0.0;
        let mut comp = 0.0;
        for i in 0..n {
            let term = f((i as f64 + 0.5) * h);
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        (sum + comp) * h
    }

    fn boundary_layer(y: f64) -> f64 {
        1.0 / (1.0 + 999.0 * 5.0 * y.powi(4))
    }

    #[test]
    fn cubic_is_exact() {
        let r = integrate(|y| 3.0 * y * y, &IntegrationConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rational_matches_antiderivative() {
        let exact = 2.0 * 3f64.ln() - 4.0 / 3.0;
        let r = integrate(
            |y| 2.0 * y / (0.5 + y).powi(2),
            &IntegrationConfig::default(),
        )
        .unwrap();
        assert!(r.converged);
        assert!((r.value - exact).abs() < 1e-12);
        assert!((r.value - 0.863_891_244_0).abs() < 1e-10);
    }

    #[test]
    fn boundary_layer_matches_midpoint_oracle() {
        let oracle = midpoint_oracle(boundary_layer, 10_000_000);
        let r = integrate(boundary_layer, &IntegrationConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.value - oracle).abs() < 1e-9, "{} vs {}", r.value, oracle);
    }

    #[test]
    fn exact_on_polynomials() {
        // the 15-point Kronrod rule integrates degree 22 exactly
        for deg in 0..=22 {
            let r = integrate(
                |y| (deg as f64 + 1.0) * y.powi(deg),
                &IntegrationConfig::default(),
            )
            .unwrap();
            assert!(r.converged);
            assert!((r.value - 1.0).abs() < 1e-14, "degree {deg}: {}", r.value);
            // the embedded Gauss rule is exact to degree 13, so the error
            // estimate vanishes and no bisection happens
            if deg <= 13 {
                assert_eq!(r.evaluations, 15, "degree {deg}");
            }
        }
    }

    #[test]
    fn tighter_tolerance_never_moves_away_from_oracle() {
        type Named = (&'static str, fn(f64) -> f64);
        let integrands: [Named; 3] = [
            ("cubic", |y| 3.0 * y * y),
            ("rational", |y| 2.0 * y / (0.5 + y).powi(2)),
            ("layer", boundary_layer),
        ];
        // the midpoint oracle itself is only good to about this level
        let oracle_resolution = 1e-13;
        for (name, f) in integrands {
            let oracle = midpoint_oracle(f, 10_000_000);
            let mut cfg = IntegrationConfig::new(1e-4, 1e-4, 60, 1e-15).unwrap();
            let mut prev = (integrate(f, &cfg).unwrap().value - oracle).abs();
            for _ in 0..20 {
                cfg = cfg
                    .with_tolerances(cfg.abs_tol / 2.0, cfg.rel_tol / 2.0)
                    .unwrap();
                let err = (integrate(f, &cfg).unwrap().value - oracle).abs();
                assert!(err <= prev + oracle_resolution, "{name}: {err} > {prev}");
                prev = err;
            }
        }
    }

    #[test]
    fn linearity_within_error_estimates() {
        let cfg = IntegrationConfig::default();
        let base = integrate(boundary_layer, &cfg).unwrap();
        for alpha in [-1.0, 2.0, 10.0] {
            let scaled = integrate(|y| alpha * boundary_layer(y), &cfg).unwrap();
            let slack = scaled.abs_error_estimate + alpha.abs() * base.abs_error_estimate;
            assert!((scaled.value - alpha * base.value).abs() <= slack + 1e-15);
        }
    }

    #[test]
    fn non_finite_integrand_names_the_node() {
        let err = integrate(
            |y| if y > 0.5 { f64::NAN } else { 1.0 },
            &IntegrationConfig::default(),
        )
        .unwrap_err();
        match err {
            Error::NonFiniteIntegrand { y, .. } => assert!(y > 0.5 && y <= 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn depth_exhaustion_is_reported() {
        let cfg = IntegrationConfig::new(1e-14, 1e-14, 2, 1e-15).unwrap();
        let r = integrate(boundary_layer, &cfg).unwrap();
        assert!(!r.converged);
        assert!(r.abs_error_estimate > cfg.target(r.value));
    }

    #[test]
    fn converged_result_meets_its_target() {
        let cfg = IntegrationConfig::default();
        let r = integrate(boundary_layer, &cfg).unwrap();
        assert!(r.converged && r.abs_error_estimate <= cfg.target(r.value));
    }

    #[test]
    fn rejects_invalid_config() {
        assert!(IntegrationConfig::new(0.0, 1e-10, 60, 1e-15).is_err());
        assert!(IntegrationConfig::new(1e-12, -1.0, 60, 1e-15).is_err());
        assert!(IntegrationConfig::new(1e-12, 1e-10, 0, 1e-15).is_err());
        assert!(IntegrationConfig::new(1e-12, 1e-10, 60, 0.0).is_err());
    }

    #[test]
    fn deterministic() {
        let cfg = IntegrationConfig::default();
        let a = integrate(boundary_layer, &cfg).unwrap();
        let b = integrate(boundary_layer, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.evaluations, b.evaluations);
    }
}
