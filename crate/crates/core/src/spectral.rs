//! Centered 2-D DFT and the spectrum operations the watermark is built on.
//!
//! Conventions:
//!
//! - Forward transform is unnormalized, `X[u,v] = Σ x[m,n]·e^(−j2π(um+vn)/N)`;
//!   the inverse carries `1/N²`. A unit-variance Gaussian plane therefore
//!   maps to coefficients with complex variance `N²`.
//! - Spectra are stored centered: frequency `(u, v)` lives at index
//!   `((u + N/2) mod N, (v + N/2) mod N)`, so DC sits at `(N/2, N/2)`.
//! - The conjugate partner of centered index `i` is `(N − i) mod N`.
//! - Chessboard parity is `(−1)^(i+j)` in centered indices with `(0, 0)`
//!   at the top-left. DC has parity `N`, which is even, so DC never flips.
//!   For `N ≡ 0 (mod 4)` the modulation is exactly a circular spatial shift
//!   by `(N/2, N/2)`; for `N ≡ 2 (mod 4)` it is that shift negated.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
#[allow(unused_imports)]
use num_traits::Float;

use crate::rng::Xoshiro256StarStar;
use crate::{Error, Result};

/// Real `rows × cols` plane in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values for a {rows}x{cols} plane",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(n: usize) -> Self {
        Self { rows: n, cols: n, data: vec![0.0; n * n] }
    }

    pub fn filled(n: usize, value: f64) -> Self {
        Self { rows: n, cols: n, data: vec![value; n * n] }
    }

    /// Unit-variance i.i.d. Gaussian plane.
    pub fn gaussian(n: usize, seed: u64) -> Self {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        Self { rows: n, cols: n, data: (0..n * n).map(|_| rng.gaussian()).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Side length; only meaningful for square planes.
    pub fn size(&self) -> usize {
        self.rows
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn sum_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

/// Real `channels × N × N` tensor standing in for the initial diffusion noise.
#[derive(Clone, Debug, PartialEq)]
pub struct Latent {
    planes: Vec<Plane>,
}

impl Latent {
    pub fn from_planes(planes: Vec<Plane>) -> Result<Self> {
        let Some(first) = planes.first() else {
            return Err(Error::Dimension("latent needs at least one channel".into()));
        };
        let n = first.rows;
        for p in &planes {
            check_square_even(p.rows, p.cols)?;
            if p.rows != n {
                return Err(Error::Dimension(format!("mixed plane sizes {n} and {}", p.rows)));
            }
            if p.data.iter().any(|v| !v.is_finite()) {
                return Err(Error::Dimension("non-finite latent value".into()));
            }
        }
        Ok(Self { planes })
    }

    /// Channel-major, row-major flat data.
    pub fn from_flat(channels: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != channels * n * n {
            return Err(Error::Dimension(format!(
                "{} values for a {channels}x{n}x{n} latent",
                data.len()
            )));
        }
        let planes = data
            .chunks(n * n)
            .map(|c| Plane { rows: n, cols: n, data: c.to_vec() })
            .collect();
        Self::from_planes(planes)
    }

    /// Unit-variance Gaussian latent; channel `c` uses sub-seed `mix64(seed, c)`.
    pub fn gaussian(channels: usize, n: usize, seed: u64) -> Self {
        let planes = (0..channels)
            .map(|c| Plane::gaussian(n, crate::rng::mix64(seed, c as u64)))
            .collect();
        Self { planes }
    }

    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    pub fn size(&self) -> usize {
        self.planes[0].rows
    }

    pub fn plane(&self, c: usize) -> &Plane {
        &self.planes[c]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut Plane {
        &mut self.planes[c]
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn set_plane(&mut self, c: usize, plane: Plane) -> Result<()> {
        if plane.rows != self.size() || plane.cols != self.size() {
            return Err(Error::Dimension("replacement plane has the wrong size".into()));
        }
        self.planes[c] = plane;
        Ok(())
    }

    pub fn map_planes(&self, mut f: impl FnMut(usize, &Plane) -> Plane) -> Self {
        Self { planes: self.planes.iter().enumerate().map(|(c, p)| f(c, p)).collect() }
    }

    /// Flat channel-major copy.
    pub fn to_flat(&self) -> Vec<f64> {
        self.planes.iter().flat_map(|p| p.data.iter().copied()).collect()
    }
}

/// Centered complex `N × N` spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    n: usize,
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::zero(); n * n] }
    }

    pub fn from_data(n: usize, data: Vec<Complex64>) -> Result<Self> {
        check_square_even(n, n)?;
        if data.len() != n * n {
            return Err(Error::Dimension(format!("{} coefficients for size {n}", data.len())));
        }
        Ok(Self { n, data })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.n + c] = v;
    }

    /// Sum of `|X|²` over all coefficients.
    pub fn total_energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Set of centered spectrum indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PixelMask {
    n: usize,
    members: BTreeSet<(usize, usize)>,
}

impl PixelMask {
    pub fn new(n: usize) -> Self {
        Self { n, members: BTreeSet::new() }
    }

    pub fn from_members(n: usize, members: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut mask = Self::new(n);
        for (r, c) in members {
            if r >= n || c >= n {
                return Err(Error::Dimension(format!("mask member ({r}, {c}) outside size {n}")));
            }
            mask.members.insert((r, c));
        }
        Ok(mask)
    }

    /// Every index of the plane.
    pub fn full(n: usize) -> Self {
        Self { n, members: (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).collect() }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Inserts `(r, c)`; out-of-range indices are ignored.
    pub fn insert(&mut self, r: usize, c: usize) -> bool {
        r < self.n && c < self.n && self.members.insert((r, c))
    }

    pub fn contains(&self, r: usize, c: usize) -> bool {
        self.members.contains(&(r, c))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.members.iter().copied()
    }

    /// Union with the point reflection about the Fourier center.
    pub fn symmetrized(&self) -> Self {
        let mut out = self.clone();
        for (r, c) in self.iter() {
            out.members.insert(conjugate_index(self.n, r, c));
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|(r, c)| {
            let (pr, pc) = conjugate_index(self.n, r, c);
            self.contains(pr, pc)
        })
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.members.is_disjoint(&other.members)
    }

    pub fn intersection_len(&self, other: &Self) -> usize {
        self.members.intersection(&other.members).count()
    }

    /// Removes every member of `other`.
    pub fn subtract(&mut self, other: &Self) {
        for m in other.members.iter() {
            self.members.remove(m);
        }
    }

    pub fn union_with(&mut self, other: &Self) {
        self.members.extend(other.members.iter().copied());
    }

    /// Jaccard similarity `|A ∩ B| / |A ∪ B|`; two empty masks score 1.
    pub fn jaccard(&self, other: &Self) -> f64 {
        let inter = self.intersection_len(other);
        let union = self.len() + other.len() - inter;
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }
}

/// Centered index of the conjugate partner `(−u, −v)`.
#[inline]
pub fn conjugate_index(n: usize, r: usize, c: usize) -> (usize, usize) {
    ((n - r) % n, (n - c) % n)
}

/// `(−1)^(r+c)` in centered indices.
#[inline]
pub fn chessboard_sign(r: usize, c: usize) -> f64 {
    if (r + c) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_square_even(rows: usize, cols: usize) -> Result<()> {
    if rows != cols {
        return Err(Error::Dimension(format!("plane is {rows}x{cols}, expected square")));
    }
    if rows == 0 || rows % 2 != 0 {
        return Err(Error::Dimension(format!("plane size {rows} must be even and non-zero")));
    }
    Ok(())
}

/// Forward centered DFT of a real plane.
pub fn dft2(plane: &Plane) -> Result<Spectrum> {
    check_square_even(plane.rows, plane.cols)?;
    if plane.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Dimension("non-finite input value".into()));
    }
    let n = plane.rows;
    let mut buf: Vec<Complex64> = plane.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_2d(&mut buf, n, false);
    Ok(Spectrum { n, data: fftshift(&buf, n) })
}

/// Complex inverse of [`dft2`] (with the `1/N²` factor).
pub fn idft2(spec: &Spectrum) -> Vec<Complex64> {
    let n = spec.n;
    // For even N the centering shift is an involution.
    let mut buf = fftshift(&spec.data, n);
    transform_2d(&mut buf, n, true);
    let scale = 1.0 / (n * n) as f64;
    for z in &mut buf {
        *z *= scale;
    }
    buf
}

/// Inverse DFT keeping only the real part of the spatial result.
pub fn idft2_real(spec: &Spectrum) -> Plane {
    let n = spec.n;
    Plane { rows: n, cols: n, data: idft2(spec).into_iter().map(|z| z.re).collect() }
}

/// `X_cs[u,v] = (X[u,v] + X*[−u,−v]) / 2`.
pub fn conjugate_symmetric_part(spec: &Spectrum) -> Spectrum {
    let n = spec.n;
    let mut out = Spectrum::zeros(n);
    for r in 0..n {
        for c in 0..n {
            let (pr, pc) = conjugate_index(n, r, c);
            out.set(r, c, (spec.get(r, c) + spec.get(pr, pc).conj()) * 0.5);
        }
    }
    out
}

/// Multiplies every coefficient by `(−1)^(r+c)`.
pub fn chessboard_modulate(spec: &Spectrum) -> Spectrum {
    let n = spec.n;
    let mut out = spec.clone();
    for r in 0..n {
        for c in 0..n {
            if (r + c) % 2 == 1 {
                out.data[r * n + c] = -out.data[r * n + c];
            }
        }
    }
    out
}

/// `Σ |X[u,v]|²` over the mask.
pub fn energy(spec: &Spectrum, mask: &PixelMask) -> f64 {
    mask.iter().map(|(r, c)| spec.get(r, c).norm_sqr()).sum()
}

fn fftshift(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let h = n / 2;
    let mut out = vec![Complex64::zero(); n * n];
    for r in 0..n {
        for c in 0..n {
            out[r * n + c] = data[((r + h) % n) * n + (c + h) % n];
        }
    }
    out
}

/// Row-column 2-D transform, in place. `inverse` flips the exponent sign
/// but does not normalize.
fn transform_2d(buf: &mut [Complex64], n: usize, inverse: bool) {
    let plan = Plan1d::new(n, inverse);
    let mut line = vec![Complex64::zero(); n];
    for row in buf.chunks_mut(n) {
        plan.run(row, &mut line);
    }
    for c in 0..n {
        for r in 0..n {
            line[r] = buf[r * n + c];
        }
        let mut col = line.clone();
        plan.run(&mut col, &mut line);
        for r in 0..n {
            buf[r * n + c] = col[r];
        }
    }
}

/// 1-D transform plan: iterative radix-2 for powers of two, direct
/// summation for other even lengths.
struct Plan1d {
    n: usize,
    twiddles: Vec<Complex64>,
    radix2: bool,
}

impl Plan1d {
    fn new(n: usize, inverse: bool) -> Self {
        let sign = if inverse { 1.0 } else { -1.0 };
        let twiddles = (0..n)
            .map(|k| {
                let (s, c) = (2.0 * PI * k as f64 / n as f64).sin_cos();
                Complex64::new(c, sign * s)
            })
            .collect();
        Self { n, twiddles, radix2: n.is_power_of_two() }
    }

    fn run(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        if self.radix2 {
            self.radix2(data);
        } else {
            self.direct(data, scratch);
        }
    }

    fn direct(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        let n = self.n;
        for (k, out) in scratch.iter_mut().enumerate().take(n) {
            let mut acc = Complex64::zero();
            for (m, x) in data.iter().enumerate() {
                acc += x * self.twiddles[(k * m) % n];
            }
            *out = acc;
        }
        data.copy_from_slice(&scratch[..n]);
    }

    fn radix2(&self, data: &mut [Complex64]) {
        let n = self.n;
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..len / 2 {
                    let w = self.twiddles[k * stride];
                    let a = data[start + k];
                    let b = data[start + k + len / 2] * w;
                    data[start + k] = a + b;
                    data[start + k + len / 2] = a - b;
                }
            }
            len <<= 1;
        }
    }
}
