use num_complex::Complex64;

use crate::dynamics::analytic_trajectory;
use crate::error::{Error, Result};
use crate::model::{ModelParams, PhaseSpacePoint};

/// Padding around the orbits, in units of √ħ.
pub const PADDING: f64 = 5.0;
/// Node spacing, in units of √ħ.
pub const SPACING: f64 = 1.0 / 8.0;

const SLACK: f64 = 1e-9;

/// Rectangular lattice of phase-space nodes `re_min + i·Δre + i(im_min + j·Δim)`
/// with Riemann weight `Δre·Δim/(πħ)` per node. Nodes are stored row-major
/// over `(im, re)`: the real index runs fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    re_min: f64,
    im_min: f64,
    d_re: f64,
    d_im: f64,
    n_re: usize,
    n_im: usize,
    hbar: f64,
}

impl Grid {
    /// Grid with `n_re × n_im` nodes spanning the closed box
    /// `[re_min, re_max] × [im_min, im_max]`.
    pub fn new(
        re_min: f64,
        re_max: f64,
        im_min: f64,
        im_max: f64,
        n_re: usize,
        n_im: usize,
        hbar: f64,
    ) -> Result<Self> {
        if !(re_min.is_finite() && re_max.is_finite() && im_min.is_finite() && im_max.is_finite()) {
            return Err(Error::NonFinite("grid bounds"));
        }
        if re_max <= re_min || im_max <= im_min || n_re < 2 || n_im < 2 {
            return Err(Error::GridTooCoarse(
                "need re_max > re_min, im_max > im_min and at least 2 nodes per axis".into(),
            ));
        }
        if !(hbar > 0.0) {
            return Err(Error::NonPositiveHbar(hbar));
        }
        Ok(Self {
            re_min,
            im_min,
            d_re: (re_max - re_min) / (n_re - 1) as f64,
            d_im: (im_max - im_min) / (n_im - 1) as f64,
            n_re,
            n_im,
            hbar,
        })
    }

    /// Default grid: bounding box of every branch orbit up to `t_max`
    /// (the full circle when ν > 0), padded by 5√ħ and snapped outward to
    /// multiples of the spacing √ħ/8 so that the origin is a node.
    pub fn auto(params: &ModelParams, t_max: f64) -> Self {
        let (lo, hi) = orbit_bounds(params, t_max);
        let hbar = params.hbar();
        let step = SPACING * hbar.sqrt();
        let pad = PADDING * hbar.sqrt();
        let snap_lo = |x: f64| ((x - pad) / step + SLACK).floor() as i64;
        let snap_hi = |x: f64| ((x + pad) / step - SLACK).ceil() as i64;
        let (r0, r1) = (snap_lo(lo.re), snap_hi(hi.re));
        let (i0, i1) = (snap_lo(lo.im), snap_hi(hi.im));
        Self {
            re_min: r0 as f64 * step,
            im_min: i0 as f64 * step,
            d_re: step,
            d_im: step,
            n_re: (r1 - r0) as usize + 1,
            n_im: (i1 - i0) as usize + 1,
            hbar,
        }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn n_re(&self) -> usize {
        self.n_re
    }

    pub fn n_im(&self) -> usize {
        self.n_im
    }

    pub fn len(&self) -> usize {
        self.n_re * self.n_im
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> (f64, f64) {
        (self.d_re, self.d_im)
    }

    pub fn re_range(&self) -> (f64, f64) {
        (self.re_min, self.re_min + (self.n_re - 1) as f64 * self.d_re)
    }

    pub fn im_range(&self) -> (f64, f64) {
        (self.im_min, self.im_min + (self.n_im - 1) as f64 * self.d_im)
    }

    /// Quadrature weight per node, `Δre·Δim/(πħ)`.
    pub fn weight(&self) -> f64 {
        self.d_re * self.d_im / (std::f64::consts::PI * self.hbar)
    }

    pub fn index(&self, i_re: usize, i_im: usize) -> usize {
        i_im * self.n_re + i_re
    }

    /// `(i_re, i_im)` of a flat node index.
    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.n_re, k / self.n_re)
    }

    pub fn node(&self, k: usize) -> PhaseSpacePoint {
        let (i, j) = self.coords(k);
        Complex64::new(
            self.re_min + i as f64 * self.d_re,
            self.im_min + j as f64 * self.d_im,
        )
    }

    pub fn nodes(&self) -> impl Iterator<Item = PhaseSpacePoint> + '_ {
        (0..self.len()).map(move |k| self.node(k))
    }

    /// Flat index of the node closest to `omega`, clamped to the grid.
    pub fn nearest(&self, omega: PhaseSpacePoint) -> usize {
        let clamp = |x: f64, n: usize| x.round().clamp(0.0, (n - 1) as f64) as usize;
        let i = clamp((omega.re - self.re_min) / self.d_re, self.n_re);
        let j = clamp((omega.im - self.im_min) / self.d_im, self.n_im);
        self.index(i, j)
    }

    /// 4-neighbours of a node.
    pub fn neighbours(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.coords(k);
        let steps: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
        steps.into_iter().filter_map(move |(di, dj)| {
            let ni = i as isize + di;
            let nj = j as isize + dj;
            (ni >= 0 && nj >= 0 && (ni as usize) < self.n_re && (nj as usize) < self.n_im)
                .then(|| self.index(ni as usize, nj as usize))
        })
    }

    /// Checks the quadrature contract for evaluating the field at time `t`:
    /// spacing at most √ħ/8, and the orbit bounding box padded by 5√ħ
    /// inside the grid.
    pub fn check_covers(&self, params: &ModelParams, t: f64) -> Result<()> {
        let sq = self.hbar.sqrt();
        if (self.hbar - params.hbar()).abs() > 0.0 {
            return Err(Error::GridTooCoarse(format!(
                "grid built for hbar = {}, model has {}",
                self.hbar,
                params.hbar()
            )));
        }
        let max_step = SPACING * sq * (1.0 + SLACK);
        if self.d_re > max_step || self.d_im > max_step {
            return Err(Error::GridTooCoarse(format!(
                "spacing ({}, {}) exceeds √ħ/8 = {}",
                self.d_re,
                self.d_im,
                SPACING * sq
            )));
        }
        let (lo, hi) = orbit_bounds(params, t);
        let pad = PADDING * sq - SLACK;
        let (r0, r1) = self.re_range();
        let (i0, i1) = self.im_range();
        if lo.re - pad < r0 || hi.re + pad > r1 || lo.im - pad < i0 || hi.im + pad > i1 {
            return Err(Error::GridTooCoarse(format!(
                "bounds [{r0}, {r1}] × [{i0}, {i1}] do not cover the orbits \
                 [{}, {}] × [{}, {}] with padding 5√ħ",
                lo.re, hi.re, lo.im, hi.im
            )));
        }
        Ok(())
    }
}

/// Bounding box `(lower-left, upper-right)` of every branch orbit: whole
/// circles for ν > 0, the drift segment on `[0, t_max]` for ν = 0.
fn orbit_bounds(params: &ModelParams, t_max: f64) -> (Complex64, Complex64) {
    let mut lo = Complex64::new(0.0, 0.0);
    let mut hi = Complex64::new(0.0, 0.0);
    for gamma in 0..params.levels() {
        let (a, b) = if params.nu() > 0.0 {
            let r = params.coupling(gamma) / params.nu();
            let centre = -r;
            let r = r.abs();
            (Complex64::new(centre - r, -r), Complex64::new(centre + r, r))
        } else {
            let end = analytic_trajectory(params, gamma, t_max);
            (
                Complex64::new(end.re.min(0.0), end.im.min(0.0)),
                Complex64::new(end.re.max(0.0), end.im.max(0.0)),
            )
        };
        lo = Complex64::new(lo.re.min(a.re), lo.im.min(a.im));
        hi = Complex64::new(hi.re.max(b.re), hi.im.max(b.im));
    }
    (lo, hi)
}
