//! Bracketing and bisection.
//!
//! A sign is "non-negative" or "negative"; a bracket is any grid cell whose
//! endpoints fall in different classes. Bisection keeps that invariant, so it
//! converges to a point where the function crosses from one class to the
//! other even when the function is only piecewise smooth.

/// A grid cell `[lo, hi]` across which `f` changes sign class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

/// Uniform grid scan of `f` over `[a, b]` with `cells` cells.
#[derive(Debug, Clone)]
pub struct GridScan {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridScan {
    pub fn new<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cells: usize) -> Self {
        match Self::try_new(|x| Ok::<f64, std::convert::Infallible>(f(x)), a, b, cells) {
            Ok(scan) => scan,
            Err(never) => match never {},
        }
    }

    /// Like [`GridScan::new`] for a fallible function; stops at the first error.
    pub fn try_new<E, F>(mut f: F, a: f64, b: f64, cells: usize) -> Result<Self, E>
    where
        F: FnMut(f64) -> Result<f64, E>,
    {
        assert!(cells >= 1, "grid needs at least one cell");
        let xs: Vec<f64> = (0..=cells)
            .map(|i| {
                if i == cells {
                    b
                } else {
                    a + (b - a) * i as f64 / cells as f64
                }
            })
            .collect();
        let values = xs.iter().map(|&x| f(x)).collect::<Result<_, E>>()?;
        Ok(Self { xs, values })
    }

    /// Cells whose endpoints differ in sign class, in ascending order.
    pub fn brackets(&self) -> Vec<Bracket> {
        self.xs
            .windows(2)
            .zip(self.values.windows(2))
            .filter(|(_, v)| (v[0] >= 0.0) != (v[1] >= 0.0))
            .map(|(x, v)| Bracket {
                lo: x[0],
                hi: x[1],
                f_lo: v[0],
                f_hi: v[1],
            })
            .collect()
    }

    /// Whether the sampled values are strictly increasing.
    pub fn strictly_increasing(&self) -> bool {
        self.values.windows(2).all(|v| v[1] > v[0])
    }
}

/// Bisects `bracket` until its width is at most `tol`; returns the midpoint.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, bracket: Bracket, tol: f64) -> f64 {
    match try_bisect(|x| Ok::<f64, std::convert::Infallible>(f(x)), bracket, tol) {
        Ok(x) => x,
        Err(never) => match never {},
    }
}

/// [`bisect`] for a fallible function.
pub fn try_bisect<E, F>(mut f: F, bracket: Bracket, tol: f64) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let Bracket {
        mut lo,
        mut hi,
        f_lo,
        ..
    } = bracket;
    let lo_class = f_lo >= 0.0;
    // 200 halvings exhaust f64 resolution on any finite interval.
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid)? >= 0.0) == lo_class {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
