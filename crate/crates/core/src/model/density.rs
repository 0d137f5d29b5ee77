//! Symmetric densities of the signed error degree `x` on `[-1, 1]`.
//!
//! `x > 0` is a false-alarm error of degree `x`, `x < 0` an undue-optimism
//! error of degree `-x`. Uniform and triangular densities answer every query
//! in closed form; tabulated densities integrate their piecewise-linear pdf
//! with adaptive quadrature.

use serde::{Deserialize, Serialize};

use crate::quadrature;
use crate::{Error, Result};

/// Slack allowed on the support boundary before a query is rejected.
const SUPPORT_SLACK: f64 = 1e-12;
/// Tolerance for the symmetry check on tabulated knots.
const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrorDensity {
    /// `f(x) = 1/2`.
    Uniform,
    /// `f(x) = 1 - |x|`, peaked at zero.
    Triangular,
    /// Piecewise-linear density through the given knots.
    Tabulated(TabulatedDensity),
}

impl ErrorDensity {
    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        TabulatedDensity::new(knots).map(ErrorDensity::Tabulated)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ErrorDensity::Uniform => "uniform",
            ErrorDensity::Triangular => "triangular",
            ErrorDensity::Tabulated(_) => "tabulated",
        }
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        let x = in_support("x", x)?;
        Ok(match self {
            ErrorDensity::Uniform => 0.5,
            ErrorDensity::Triangular => 1.0 - x.abs(),
            ErrorDensity::Tabulated(t) => t.pdf(x),
        })
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        let x = in_support("x", x)?;
        match self {
            ErrorDensity::Uniform => Ok(0.5 * (x + 1.0)),
            ErrorDensity::Triangular => Ok(if x <= 0.0 {
                0.5 * (1.0 + x).powi(2)
            } else {
                1.0 - 0.5 * (1.0 - x).powi(2)
            }),
            ErrorDensity::Tabulated(t) => t.cdf(x),
        }
    }

    /// `∫_{-1}^{t} F(x) dx`.
    pub fn integral_cdf(&self, t: f64) -> Result<f64> {
        let t = in_support("t", t)?;
        match self {
            ErrorDensity::Uniform => Ok(0.25 * (1.0 + t).powi(2)),
            ErrorDensity::Triangular => Ok(if t <= 0.0 {
                (1.0 + t).powi(3) / 6.0
            } else {
                t + (1.0 - t).powi(3) / 6.0
            }),
            // Integration by parts: ∫ F = t F(t) - ∫ x f, since F(-1) = 0.
            ErrorDensity::Tabulated(tab) => Ok(t * tab.cdf(t)? - tab.moment_from_left(t)?),
        }
    }

    /// `∫_a^b x f(x) dx`.
    pub fn partial_x_moment(&self, a: f64, b: f64) -> Result<f64> {
        let a = in_support("a", a)?;
        let b = in_support("b", b)?;
        if a > b {
            return Err(Error::OutOfRange {
                what: "a (must not exceed b)",
                value: a,
                lo: -1.0,
                hi: b,
            });
        }
        match self {
            ErrorDensity::Uniform => Ok(0.25 * (b * b - a * a)),
            ErrorDensity::Triangular => {
                let g = |x: f64| 0.5 * x * x - x.abs() * x * x / 3.0;
                Ok(g(b) - g(a))
            }
            ErrorDensity::Tabulated(t) => Ok(t.moment_from_left(b)? - t.moment_from_left(a)?),
        }
    }

    /// Points in `[-1, 1]` where the density may kink: the ends, zero, and
    /// every knot of a tabulated density.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            ErrorDensity::Tabulated(t) => {
                let mut xs = t.xs.clone();
                if let Err(i) = xs.binary_search_by(|v| v.total_cmp(&0.0)) {
                    xs.insert(i, 0.0);
                }
                xs
            }
            _ => vec![-1.0, 0.0, 1.0],
        }
    }

    /// `∫_a^b g(x) f(x) dx` by quadrature split at every breakpoint, so
    /// integrands that kink at zero stay smooth on each piece.
    pub fn expectation<F: Fn(f64) -> f64>(&self, g: F, a: f64, b: f64) -> Result<f64> {
        let a = in_support("lower limit", a)?;
        let b = in_support("upper limit", b)?;
        if a >= b {
            return if a == b {
                Ok(0.0)
            } else {
                Err(Error::OutOfRange {
                    what: "lower limit",
                    value: a,
                    lo: -1.0,
                    hi: b,
                })
            };
        }
        let mut cuts: Vec<f64> = vec![a];
        cuts.extend(self.breakpoints().into_iter().filter(|&x| x > a && x < b));
        cuts.push(b);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += quadrature::integrate(|x| g(x) * self.pdf(x).unwrap_or(0.0), w[0], w[1])?;
        }
        Ok(total)
    }

    /// `∫_0^1 x f(x) dx`, the mean false-alarm degree times its mass.
    pub fn half_moment(&self) -> Result<f64> {
        self.partial_x_moment(0.0, 1.0)
    }

    /// Maps a uniform draw `u ∈ [0, 1)` to an error degree.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            ErrorDensity::Uniform => 2.0 * u - 1.0,
            ErrorDensity::Triangular => {
                if u <= 0.5 {
                    -1.0 + (2.0 * u).sqrt()
                } else {
                    1.0 - (2.0 * (1.0 - u)).sqrt()
                }
            }
            ErrorDensity::Tabulated(t) => t.inverse_cdf(u),
        }
    }

    /// Checks support, normalization, symmetry and monotone cdf.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDensity(m));
        let total = self.cdf(1.0)?;
        if (total - 1.0).abs() > 1e-9 || self.cdf(-1.0)?.abs() > 1e-12 {
            return bad(format!("cdf(-1), cdf(1) = {}, {total}", self.cdf(-1.0)?));
        }
        let mut prev = 0.0;
        for i in 0..=200 {
            let x = -1.0 + i as f64 / 100.0;
            let x = x.min(1.0);
            let f = self.pdf(x)?;
            if !(f.is_finite() && f >= 0.0) {
                return bad(format!("pdf({x}) = {f}"));
            }
            if (f - self.pdf(-x)?).abs() > SYMMETRY_TOL {
                return bad(format!("pdf is not symmetric at x = {x}"));
            }
            let c = self.cdf(x)?;
            if c < prev - 1e-12 {
                return bad(format!("cdf decreases at x = {x}"));
            }
            prev = c;
        }
        Ok(())
    }
}

fn in_support(what: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() && (-1.0 - SUPPORT_SLACK..=1.0 + SUPPORT_SLACK).contains(&x) {
        Ok(x.clamp(-1.0, 1.0))
    } else {
        Err(Error::OutOfRange {
            what,
            value: x,
            lo: -1.0,
            hi: 1.0,
        })
    }
}

/// Piecewise-linear symmetric density, normalized to unit mass on
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TabulatedKnots", into = "TabulatedKnots")]
pub struct TabulatedDensity {
    xs: Vec<f64>,
    fs: Vec<f64>,
    /// `F` at each knot.
    cum_mass: Vec<f64>,
    /// `∫_{-1}^{x_k} s f(s) ds` at each knot.
    cum_moment: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TabulatedKnots {
    knots: Vec<(f64, f64)>,
}

impl TryFrom<TabulatedKnots> for TabulatedDensity {
    type Error = Error;

    fn try_from(raw: TabulatedKnots) -> Result<Self> {
        TabulatedDensity::new(raw.knots)
    }
}

impl From<TabulatedDensity> for TabulatedKnots {
    fn from(t: TabulatedDensity) -> Self {
        TabulatedKnots { knots: t.knots() }
    }
}

impl TabulatedDensity {
    /// Knots must start at -1, end at 1, increase strictly, carry finite
    /// non-negative densities and describe a symmetric shape. The densities
    /// are rescaled to integrate to one.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidDensity(m.to_string()));
        if knots.len() < 2 {
            return bad("need at least two knots");
        }
        if knots[0].0 != -1.0 || knots[knots.len() - 1].0 != 1.0 {
            return bad("knots must span exactly [-1, 1]");
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return bad("knot positions must increase strictly");
        }
        if knots
            .iter()
            .any(|&(x, f)| !x.is_finite() || !f.is_finite() || f < 0.0)
        {
            return bad("densities must be finite and non-negative");
        }
        let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let raw_fs: Vec<f64> = knots.iter().map(|k| k.1).collect();
        let scale = raw_fs.iter().cloned().fold(0.0, f64::max);
        if scale <= 0.0 {
            return bad("density is identically zero");
        }
        let unnormalized = Self::assemble(xs.clone(), raw_fs.clone())?;
        for &x in &xs {
            if (unnormalized.pdf(x) - unnormalized.pdf(-x)).abs() > SYMMETRY_TOL * scale {
                return bad("density is not symmetric about zero");
            }
        }
        let mass = *unnormalized.cum_mass.last().unwrap();
        let fs = raw_fs.iter().map(|f| f / mass).collect();
        Self::assemble(xs, fs)
    }

    fn assemble(xs: Vec<f64>, fs: Vec<f64>) -> Result<Self> {
        let mut t = Self {
            cum_mass: vec![0.0; xs.len()],
            cum_moment: vec![0.0; xs.len()],
            xs,
            fs,
        };
        for k in 1..t.xs.len() {
            let (a, b) = (t.xs[k - 1], t.xs[k]);
            let mass = quadrature::integrate(|s| t.pdf(s), a, b)?;
            let moment = quadrature::integrate(|s| s * t.pdf(s), a, b)?;
            t.cum_mass[k] = t.cum_mass[k - 1] + mass;
            t.cum_moment[k] = t.cum_moment[k - 1] + moment;
        }
        Ok(t)
    }

    pub fn knots(&self) -> Vec<(f64, f64)> {
        self.xs
            .iter()
            .cloned()
            .zip(self.fs.iter().cloned())
            .collect()
    }

    /// Index `k` of the segment `[x_k, x_{k+1}]` containing `x`.
    fn segment(&self, x: f64) -> usize {
        let k = self.xs.partition_point(|&xk| xk <= x);
        k.saturating_sub(1).min(self.xs.len() - 2)
    }

    fn pdf(&self, x: f64) -> f64 {
        let k = self.segment(x);
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let w = (x - x0) / (x1 - x0);
        self.fs[k] + w * (self.fs[k + 1] - self.fs[k])
    }

    fn cdf(&self, x: f64) -> Result<f64> {
        let k = self.segment(x);
        let part = quadrature::integrate(|s| self.pdf(s), self.xs[k], x)?;
        Ok((self.cum_mass[k] + part).clamp(0.0, 1.0))
    }

    fn moment_from_left(&self, x: f64) -> Result<f64> {
        let k = self.segment(x);
        let part = quadrature::integrate(|s| s * self.pdf(s), self.xs[k], x)?;
        Ok(self.cum_moment[k] + part)
    }

    fn inverse_cdf(&self, u: f64) -> f64 {
        let n = self.xs.len();
        let k = self.cum_mass.partition_point(|&c| c <= u).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let f0 = self.fs[k];
        let slope = (self.fs[k + 1] - f0) / (x1 - x0);
        let r = (u - self.cum_mass[k]).max(0.0);
        // Solve f0 d + slope d^2 / 2 = r for the offset d into the segment.
        let d = if slope.abs() < 1e-14 {
            if f0 > 0.0 {
                r / f0
            } else {
                0.0
            }
        } else {
            let disc = (f0 * f0 + 2.0 * slope * r).max(0.0);
            2.0 * r / (f0 + disc.sqrt())
        };
        (x0 + d).clamp(x0, x1)
    }
}
