//! Discrete Wigner transform and Weyl quantization on a rectangular grid (d = 1).
//!
//! `f_A(x, v) = ∫ e^{−iyv/ħ} A(x + y/2, x − y/2) dy` is evaluated by
//! expanding the kernel in Hermite functions and applying the rectangle
//! rule in `y` with spacing `πħ/v_max`, which places the DFT output exactly
//! on the `v` grid. Weyl quantization is the adjoint map scaled by `1/h`,
//! projected onto the truncated basis.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{hermite_functions, PhaseSpaceRep};
use crate::error::{Error, Result};
use crate::scalar::{abs2, fft_in_place, CMatrix, Real};

/// Uniform periodic grid `x_j = x_min + jΔx`, `v_l = v_min + lΔv`, symmetric about 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WignerGrid<T: Real> {
    pub x_min: T,
    pub x_max: T,
    pub n_x: usize,
    pub v_min: T,
    pub v_max: T,
    pub n_v: usize,
}

/// Sidecar metadata written next to a field CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub x_range: [f64; 2],
    pub v_range: [f64; 2],
    pub counts: [usize; 2],
    pub hbar: f64,
}

impl<T: Real> WignerGrid<T> {
    /// `[−x_half, x_half) × [−v_half, v_half)` with even point counts.
    pub fn symmetric(x_half: T, n_x: usize, v_half: T, n_v: usize) -> Result<Self> {
        if n_x < 2 || n_v < 2 || !n_x.is_multiple_of(2) || !n_v.is_multiple_of(2) {
            return Err(Error::InvalidArgument("grid counts must be even and >= 2".into()));
        }
        if !(x_half > T::zero() && v_half > T::zero()) {
            return Err(Error::InvalidArgument("grid half-widths must be positive".into()));
        }
        Ok(Self { x_min: -x_half, x_max: x_half, n_x, v_min: -v_half, v_max: v_half, n_v })
    }

    pub fn dx(&self) -> T {
        (self.x_max - self.x_min) / T::count(self.n_x)
    }

    pub fn dv(&self) -> T {
        (self.v_max - self.v_min) / T::count(self.n_v)
    }

    pub fn x(&self, j: usize) -> T {
        self.x_min + T::count(j) * self.dx()
    }

    pub fn v(&self, l: usize) -> T {
        self.v_min + T::count(l) * self.dv()
    }

    pub fn cell_area(&self) -> T {
        self.dx() * self.dv()
    }

    /// Enforces `Δx ≤ πħ / v_max`.
    pub fn nyquist_check(&self, hbar: T) -> Result<()> {
        let max_spacing = T::pi() * hbar / self.v_max;
        if self.dx() > max_spacing {
            return Err(Error::GridTooCoarse { spacing: self.dx().as_f64(), max_spacing: max_spacing.as_f64() });
        }
        Ok(())
    }

    /// `y` spacing that maps the DFT onto the `v` grid.
    fn dy(&self, hbar: T) -> T {
        T::pi() * hbar / self.v_max
    }

    pub fn metadata(&self, hbar: T) -> GridMetadata {
        GridMetadata {
            x_range: [self.x_min.as_f64(), self.x_max.as_f64()],
            v_range: [self.v_min.as_f64(), self.v_max.as_f64()],
            counts: [self.n_x, self.n_v],
            hbar: hbar.as_f64(),
        }
    }

    pub fn from_metadata(meta: &GridMetadata) -> Result<Self> {
        let g = Self::symmetric(T::lit(meta.x_range[1]), meta.counts[0], T::lit(meta.v_range[1]), meta.counts[1])?;
        if meta.x_range[0] != -meta.x_range[1] || meta.v_range[0] != -meta.v_range[1] {
            return Err(Error::InvalidArgument("only symmetric grids are supported".into()));
        }
        Ok(g)
    }
}

/// Complex samples `f(x_j, v_l)`, stored x-major (`j * n_v + l`).
#[derive(Clone, Debug)]
pub struct WignerField<T: Real> {
    pub grid: WignerGrid<T>,
    pub hbar: T,
    pub values: Vec<Complex<T>>,
}

fn sign(k: usize) -> i32 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

impl<T: Real> WignerField<T> {
    pub fn from_fn(grid: WignerGrid<T>, hbar: T, f: impl Fn(T, T) -> Complex<T>) -> Self {
        let mut values = Vec::with_capacity(grid.n_x * grid.n_v);
        for j in 0..grid.n_x {
            for l in 0..grid.n_v {
                values.push(f(grid.x(j), grid.v(l)));
            }
        }
        Self { grid, hbar, values }
    }

    pub fn at(&self, j: usize, l: usize) -> Complex<T> {
        self.values[j * self.grid.n_v + l]
    }

    /// `(∫∫ |f|² dx dv)^{1/2}` by the rectangle rule.
    pub fn l2_norm(&self) -> T {
        (self.values.iter().fold(T::zero(), |a, z| a + abs2(*z)) * self.grid.cell_area()).sqrt()
    }

    /// `‖self − other‖_{L²} / ‖other‖_{L²}`.
    pub fn relative_l2_distance(&self, other: &Self) -> T {
        let diff = self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |a, (x, y)| a + abs2(*x - *y));
        (diff * self.grid.cell_area()).sqrt() / other.l2_norm()
    }

    /// Largest `|Im f| / max |f|`.
    pub fn max_relative_imaginary(&self) -> T {
        let max = self.values.iter().fold(T::zero(), |a, z| a.max(z.re.abs().max(z.im.abs())));
        let im = self.values.iter().fold(T::zero(), |a, z| a.max(z.im.abs()));
        if max == T::zero() {
            T::zero()
        } else {
            im / max
        }
    }

    /// `(∂ₓf, ∂ᵥf)` by spectral differentiation.
    pub fn gradient(&self) -> (Self, Self) {
        (spectral_derivative(self, 0), spectral_derivative(self, 1))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,v,re,im\n");
        for j in 0..self.grid.n_x {
            for l in 0..self.grid.n_v {
                let z = self.at(j, l);
                out.push_str(&format!("{:e},{:e},{:e},{:e}\n", self.grid.x(j), self.grid.v(l), z.re, z.im));
            }
        }
        out
    }

    pub fn metadata(&self) -> GridMetadata {
        self.grid.metadata(self.hbar)
    }

    /// Reads the CSV written by [`Self::to_csv`]; the grid comes from the sidecar.
    pub fn from_csv(text: &str, meta: &GridMetadata) -> Result<Self> {
        let grid = WignerGrid::from_metadata(meta)?;
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("x,v,re,im") {
            return Err(Error::Parse { line: 1, message: "expected header `x,v,re,im`".into() });
        }
        let mut values = Vec::with_capacity(grid.n_x * grid.n_v);
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let toks: Vec<&str> = line.split(',').collect();
            if toks.len() != 4 {
                return Err(Error::Parse { line: i + 2, message: "expected 4 columns".into() });
            }
            let parse = |s: &str| {
                s.trim().parse::<T>().map_err(|_| Error::Parse { line: i + 2, message: format!("bad number `{s}`") })
            };
            values.push(Complex::new(parse(toks[2])?, parse(toks[3])?));
        }
        if values.len() != grid.n_x * grid.n_v {
            return Err(Error::Parse { line: 0, message: format!("expected {} rows, got {}", grid.n_x * grid.n_v, values.len()) });
        }
        Ok(Self { grid, hbar: T::lit(meta.hbar), values })
    }
}

fn wavenumbers<T: Real>(n: usize, length: T) -> Vec<T> {
    (0..n)
        .map(|k| {
            if k < n / 2 {
                T::two_pi() * T::count(k) / length
            } else if k == n / 2 {
                T::zero()
            } else {
                -T::two_pi() * T::count(n - k) / length
            }
        })
        .collect()
}

/// Spectral derivative along `axis` (0 = x, 1 = v), Nyquist mode dropped.
pub fn spectral_derivative<T: Real>(field: &WignerField<T>, axis: usize) -> WignerField<T> {
    let g = field.grid;
    let (n, m, length) = if axis == 0 {
        (g.n_x, g.n_v, g.x_max - g.x_min)
    } else {
        (g.n_v, g.n_x, g.v_max - g.v_min)
    };
    let k = wavenumbers(n, length);
    let mut out = field.values.clone();
    let idx = |line: usize, t: usize| if axis == 0 { t * g.n_v + line } else { line * g.n_v + t };
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
    let inv_n = T::one() / T::count(n);
    for line in 0..m {
        for t in 0..n {
            buf[t] = field.values[idx(line, t)];
        }
        fft_in_place(&mut buf, false);
        for t in 0..n {
            buf[t] *= Complex::new(T::zero(), k[t]);
        }
        fft_in_place(&mut buf, true);
        for t in 0..n {
            out[idx(line, t)] = buf[t] * inv_n;
        }
    }
    WignerField { grid: g, hbar: field.hbar, values: out }
}

fn require_1d<T: Real>(rep: &PhaseSpaceRep<T>) -> Result<()> {
    if rep.d() != 1 {
        return Err(Error::InvalidArgument("Wigner grids are only available for d = 1".into()));
    }
    Ok(())
}

/// `y_k = (k − n/2) Δy`.
fn y_nodes<T: Real>(grid: &WignerGrid<T>, hbar: T) -> Vec<T> {
    let dy = grid.dy(hbar);
    let half = T::count(grid.n_v / 2);
    (0..grid.n_v).map(|k| (T::count(k) - half) * dy).collect()
}

/// Wigner transform of a (not necessarily Hermitian) matrix.
pub fn wigner_transform<T: Real>(a: &CMatrix<T>, rep: &PhaseSpaceRep<T>, grid: &WignerGrid<T>) -> Result<WignerField<T>> {
    require_1d(rep)?;
    rep.check_dim(a)?;
    let hbar = rep.hbar();
    grid.nyquist_check(hbar)?;
    let n = rep.n();
    let nv = grid.n_v;
    let ys = y_nodes(grid, hbar);
    let dy = grid.dy(hbar);
    let global = T::lit(sign(nv / 2) as f64) * dy;

    let rows: Vec<Vec<Complex<T>>> = (0..grid.n_x)
        .into_par_iter()
        .map(|j| {
            let x = grid.x(j);
            let mut buf = Vec::with_capacity(nv);
            for (k, &y) in ys.iter().enumerate() {
                let pa = hermite_functions(x + y / T::lit(2.0), n, hbar);
                let pb = hermite_functions(x - y / T::lit(2.0), n, hbar);
                let mut g = Complex::new(T::zero(), T::zero());
                for m in 0..n {
                    if pa[m] == T::zero() {
                        continue;
                    }
                    let mut inner = Complex::new(T::zero(), T::zero());
                    for q in 0..n {
                        inner += a[(m, q)] * pb[q];
                    }
                    g += inner * pa[m];
                }
                buf.push(g * T::lit(sign(k) as f64));
            }
            fft_in_place(&mut buf, false);
            buf.iter().enumerate().map(|(l, z)| *z * (global * T::lit(sign(l) as f64))).collect()
        })
        .collect();
    Ok(WignerField { grid: *grid, hbar, values: rows.concat() })
}

/// Weyl quantization projected onto the truncated basis:
/// `A_mn = (1/h) ∫∫ f(x, v) conj(W_mn(x, v)) dx dv`.
pub fn weyl_quantize<T: Real>(field: &WignerField<T>, rep: &PhaseSpaceRep<T>) -> Result<CMatrix<T>> {
    require_1d(rep)?;
    let grid = &field.grid;
    let hbar = rep.hbar();
    if (field.hbar - hbar).abs() > T::tol(1e-12) * hbar {
        return Err(Error::InvalidArgument("field and representation use different ħ".into()));
    }
    grid.nyquist_check(hbar)?;
    let n = rep.n();
    let nv = grid.n_v;
    let ys = y_nodes(grid, hbar);
    let global = T::lit(sign(nv / 2) as f64);
    let weight = grid.dx() / T::count(nv);

    let partials: Vec<CMatrix<T>> = (0..grid.n_x)
        .into_par_iter()
        .map(|j| {
            let x = grid.x(j);
            let mut buf: Vec<Complex<T>> =
                (0..nv).map(|l| field.at(j, l) * T::lit(sign(l) as f64)).collect();
            fft_in_place(&mut buf, true);
            let mut acc = CMatrix::<T>::zeros(n, n);
            for (k, &y) in ys.iter().enumerate() {
                let fk = buf[k] * (global * T::lit(sign(k) as f64));
                let pa = hermite_functions(x + y / T::lit(2.0), n, hbar);
                let pb = hermite_functions(x - y / T::lit(2.0), n, hbar);
                for m in 0..n {
                    let s = fk * pa[m];
                    for q in 0..n {
                        acc[(m, q)] += s * pb[q];
                    }
                }
            }
            acc
        })
        .collect();
    let mut out = CMatrix::<T>::zeros(n, n);
    for p in partials {
        out += p;
    }
    Ok(out * Complex::new(weight, T::zero()))
}
