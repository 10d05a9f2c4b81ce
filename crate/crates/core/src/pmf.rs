//! Finite-support probability mass functions over non-negative integer
//! epochs.
//!
//! A [`Pmf`] is a dense array of probabilities starting at `offset`. All
//! distributions appearing in the delay calculus (geometrics, their
//! convolutions and mixtures) have contiguous support, so a dense
//! representation avoids sparse bookkeeping entirely.
//!
//! Infinite-support generators (the geometric) are truncated against an
//! explicit tail tolerance, and every value carries the cumulative mass it
//! has dropped so far, so long convolution chains can assert their total
//! truncation error.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::cell::RefCell;

use crate::error::{Error, Result};

/// Default bound on the probability mass dropped by a truncating operation.
pub const DEFAULT_TAIL_TOL: f64 = 1e-9;

/// Products larger than this switch convolution to the transform path.
const DIRECT_CONV_LIMIT: usize = 1 << 15;

/// Hard cap on a generated support; reaching the tail tolerance would need
/// an unreasonable amount of memory beyond it.
const MAX_SUPPORT: usize = 1 << 24;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// A finite-support PMF over non-negative integers (epochs).
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    /// Smallest support point.
    offset: usize,
    /// `mass[i]` is the probability of `offset + i`.
    mass: Vec<f64>,
    /// Upper bound on the total mass dropped by truncation so far.
    dropped: f64,
}

impl Pmf {
    /// Unit mass at `n`. The identity element of convolution is `delta(0)`.
    pub fn delta(n: usize) -> Pmf {
        Pmf {
            offset: n,
            mass: vec![1.0],
            dropped: 0.0,
        }
    }

    /// Geometric law of the number of epochs until the first success when
    /// each epoch fails independently with probability `lambda`:
    /// `P(n) = lambda^(n-1) * (1 - lambda)` for `n >= 1`, mean
    /// `1 / (1 - lambda)`. The support is truncated once the remaining tail
    /// is below `tail_tol`.
    pub fn geometric(lambda: f64, tail_tol: f64) -> Result<Pmf> {
        if !(0.0..=1.0).contains(&lambda) || lambda.is_nan() {
            return Err(Error::InvalidConfig(format!(
                "geometric parameter {lambda} outside [0, 1)"
            )));
        }
        if lambda >= 1.0 {
            return Err(Error::DegenerateGeometric);
        }
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "tail tolerance {tail_tol} outside (0, 1)"
            )));
        }
        if lambda == 0.0 {
            return Ok(Pmf {
                offset: 1,
                mass: vec![1.0],
                dropped: 0.0,
            });
        }
        // Tail after n support points is lambda^n; stop once it is small.
        let len_f = (tail_tol.ln() / lambda.ln()).ceil().max(1.0);
        if len_f > MAX_SUPPORT as f64 {
            return Err(Error::InvalidConfig(format!(
                "geometric({lambda}) needs {len_f:.0} support points to reach \
                 tail tolerance {tail_tol} (cap {MAX_SUPPORT})"
            )));
        }
        let len = len_f as usize;
        let p = 1.0 - lambda;
        let mut mass = Vec::with_capacity(len);
        let mut tail = 1.0; // lambda^i
        for _ in 0..len {
            mass.push(tail * p);
            tail *= lambda;
        }
        Ok(Pmf {
            offset: 1,
            mass,
            dropped: tail,
        })
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    /// One past the largest support point.
    pub fn end(&self) -> usize {
        self.offset + self.mass.len()
    }

    pub fn support_len(&self) -> usize {
        self.mass.len()
    }

    /// Probability of exactly `n`.
    pub fn mass_at(&self, n: usize) -> f64 {
        if n < self.offset {
            0.0
        } else {
            self.mass.get(n - self.offset).copied().unwrap_or(0.0)
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Upper bound on the mass lost to truncation along this value's history.
    pub fn dropped_mass(&self) -> f64 {
        self.dropped
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.mass.iter().enumerate().map(|(i, &p)| (self.offset + i, p))
    }

    /// Distribution of the sum of two independent variables.
    ///
    /// Exact on the given supports (nothing is truncated); the output offset
    /// is the sum of the input offsets. Small operands use direct
    /// summation, large ones an FFT; the two paths agree within 1e-12.
    pub fn convolve(&self, other: &Pmf) -> Pmf {
        let la = self.mass.len();
        let lb = other.mass.len();
        let mass = if la.saturating_mul(lb) <= DIRECT_CONV_LIMIT {
            convolve_direct(&self.mass, &other.mass)
        } else {
            convolve_fft(&self.mass, &other.mass)
        };
        let mut out = Pmf {
            offset: self.offset + other.offset,
            mass,
            dropped: self.dropped + other.dropped,
        };
        out.strip_trailing_zeros();
        out
    }

    /// `l`-fold convolution of `self` with itself; `l = 0` yields `delta(0)`
    /// (empty product). Computed as `l - 1` repeated convolutions so the
    /// result is bit-identical to folding [`Pmf::convolve`] by hand.
    pub fn convolve_n(&self, l: usize) -> Pmf {
        if l == 0 {
            return Pmf::delta(0);
        }
        let mut out = self.clone();
        for _ in 1..l {
            out = out.convolve(self);
        }
        out
    }

    /// Pointwise convex combination. Weights must sum to 1 within 1e-9.
    pub fn mix(weights: &[f64], pmfs: &[Pmf]) -> Result<Pmf> {
        if weights.len() != pmfs.len() {
            return Err(Error::MixLength {
                weights: weights.len(),
                pmfs: pmfs.len(),
            });
        }
        if pmfs.is_empty() {
            return Err(Error::MixLength { weights: 0, pmfs: 0 });
        }
        let sum: f64 = weights.iter().sum();
        const WEIGHT_TOL: f64 = 1e-9;
        if (sum - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::WeightSum {
                sum,
                tol: WEIGHT_TOL,
            });
        }
        let offset = pmfs.iter().map(|p| p.offset).min().unwrap();
        let end = pmfs.iter().map(|p| p.end()).max().unwrap();
        let mut mass = vec![0.0; end - offset];
        let mut dropped = 0.0;
        for (&w, pmf) in weights.iter().zip(pmfs) {
            for (n, p) in pmf.iter() {
                mass[n - offset] += w * p;
            }
            dropped += w * pmf.dropped;
        }
        let mut out = Pmf {
            offset,
            mass,
            dropped,
        };
        out.strip_trailing_zeros();
        Ok(out)
    }

    /// Mean and standard deviation of the renormalized PMF.
    pub fn stats(&self) -> Result<(f64, f64)> {
        let total = self.total_mass();
        if total <= 0.0 || total.is_nan() {
            return Err(Error::EmptyPmf);
        }
        let mean = self
            .iter()
            .map(|(n, p)| n as f64 * p)
            .sum::<f64>()
            / total;
        let var = self
            .iter()
            .map(|(n, p)| (n as f64 - mean).powi(2) * p)
            .sum::<f64>()
            / total;
        Ok((mean, var.max(0.0).sqrt()))
    }

    /// `(1/2) * sum |a(n) - b(n)|` over the union of supports.
    pub fn total_variation(&self, other: &Pmf) -> f64 {
        let lo = self.offset.min(other.offset);
        let hi = self.end().max(other.end());
        let mut acc = 0.0;
        for n in lo..hi {
            acc += (self.mass_at(n) - other.mass_at(n)).abs();
        }
        acc / 2.0
    }

    /// Drop trailing support points worth at most `tail_tol` total mass,
    /// recording the dropped amount. Keeps at least one point.
    pub fn truncate_tail(mut self, tail_tol: f64) -> Pmf {
        let mut cut = 0.0;
        let mut keep = self.mass.len();
        while keep > 1 {
            let next = cut + self.mass[keep - 1];
            if next > tail_tol {
                break;
            }
            cut = next;
            keep -= 1;
        }
        if keep < self.mass.len() {
            self.mass.truncate(keep);
            self.dropped += cut;
        }
        self
    }

    /// Construct from raw parts. Intended for converting empirical
    /// histograms into PMFs for comparison.
    pub fn from_parts(offset: usize, mass: Vec<f64>) -> Result<Pmf> {
        if mass.is_empty() {
            return Err(Error::EmptyPmf);
        }
        if mass.iter().any(|&p| p < 0.0 || p.is_nan()) {
            return Err(Error::InvalidConfig("negative or NaN mass entry".into()));
        }
        Ok(Pmf {
            offset,
            mass,
            dropped: 0.0,
        })
    }

    fn strip_trailing_zeros(&mut self) {
        while self.mass.len() > 1 && *self.mass.last().unwrap() == 0.0 {
            self.mass.pop();
        }
    }
}

fn convolve_direct(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn convolve_fft(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut fa: Vec<Complex<f64>> = a.iter().map(|&x| Complex::new(x, 0.0)).collect();
    let mut fb: Vec<Complex<f64>> = b.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fa.resize(n, Complex::new(0.0, 0.0));
    fb.resize(n, Complex::new(0.0, 0.0));
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let fwd = planner.plan_fft_forward(n);
        fwd.process(&mut fa);
        fwd.process(&mut fb);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x *= y;
        }
        let inv = planner.plan_fft_inverse(n);
        inv.process(&mut fa);
    });
    let scale = 1.0 / n as f64;
    fa.truncate(out_len);
    // Round-off can leave tiny negative values; masses are non-negative.
    fa.iter().map(|c| (c.re * scale).max(0.0)).collect()
}
