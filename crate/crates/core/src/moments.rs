//! Region moments, Hu invariants and log-magnitude shape similarity.
//!
//! Raw moments are exact integer sums over foreground pixels. Central
//! moments are carried as exact integers scaled by a power of `m00`
//! ([`MomentSet::central_scaled`]), so symmetric regions produce exact zeros
//! rather than rounding noise.

use serde::{Deserialize, Serialize};

use crate::contour::Contour;
use crate::error::{Error, Result};
use crate::raster::GrayMap;

/// `(p, q)` pairs with `p + q <= 3`, in storage order.
pub const ORDERS: [(u32, u32); 10] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)];

fn slot(p: u32, q: u32) -> usize {
    ORDERS.iter().position(|&o| o == (p, q)).unwrap_or_else(|| panic!("moment order ({p}, {q}) exceeds 3"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentSet {
    raw: [i128; 10],
}

impl MomentSet {
    /// Moments of the given pixel coordinates, each counted once per
    /// occurrence.
    pub fn from_pixels(pixels: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut raw = [0i128; 10];
        for (x, y) in pixels {
            let (x, y) = (x as i128, y as i128);
            let (x2, y2) = (x * x, y * y);
            raw[0] += 1;
            raw[1] += x;
            raw[2] += y;
            raw[3] += x2;
            raw[4] += x * y;
            raw[5] += y2;
            raw[6] += x2 * x;
            raw[7] += x2 * y;
            raw[8] += x * y2;
            raw[9] += y2 * y;
        }
        if raw[0] == 0 {
            return Err(Error::EmptyMoments);
        }
        Ok(Self { raw })
    }

    /// Moments of every 255 pixel in `mask`.
    pub fn from_mask(mask: &GrayMap) -> Result<Self> {
        let w = mask.width();
        Self::from_pixels(mask.as_raw().iter().enumerate().filter(|(_, &v)| v == 255).map(|(i, _)| (i % w, i / w)))
    }

    /// Exact raw moment `m_pq`.
    pub fn raw(&self, p: u32, q: u32) -> i128 {
        self.raw[slot(p, q)]
    }

    pub fn m(&self, p: u32, q: u32) -> f64 {
        self.raw(p, q) as f64
    }

    pub fn area(&self) -> i128 {
        self.raw[0]
    }

    pub fn centroid(&self) -> (f64, f64) {
        let m00 = self.m(0, 0);
        (self.m(1, 0) / m00, self.m(0, 1) / m00)
    }

    /// `mu_pq * m00^(p+q-1)` as an exact integer, for `p + q >= 1`.
    ///
    /// Expands `sum C(p,i) C(q,j) (-m10)^(p-i) (-m01)^(q-j) m_ij m00^(i+j-1)`;
    /// the `i = j = 0` term contributes `(-m10)^p (-m01)^q` since
    /// `m_00 / m00 = 1`.
    pub fn central_scaled(&self, p: u32, q: u32) -> i128 {
        assert!(p + q >= 1, "central_scaled needs p + q >= 1");
        let (m00, m10, m01) = (self.raw[0], self.raw[1], self.raw[2]);
        let mut total = 0i128;
        for i in 0..=p {
            for j in 0..=q {
                let coeff = binomial(p, i) * binomial(q, j);
                let shift = (-m10).pow(p - i) * (-m01).pow(q - j);
                let term = if i + j == 0 { 1 } else { self.raw(i, j) * m00.pow(i + j - 1) };
                total += coeff * shift * term;
            }
        }
        total
    }

    /// Central moment `mu_pq`.
    pub fn mu(&self, p: u32, q: u32) -> f64 {
        if p + q == 0 {
            return self.m(0, 0);
        }
        self.central_scaled(p, q) as f64 / self.m(0, 0).powi((p + q - 1) as i32)
    }

    /// Normalized central moment `eta_pq = mu_pq / m00^(1 + (p+q)/2)`, for
    /// `p + q >= 2`.
    pub fn eta(&self, p: u32, q: u32) -> f64 {
        // mu_pq / m00^(1+k/2) = scaled / m00^(k-1+1+k/2) = scaled / m00^(3k/2)
        let k = f64::from(p + q);
        self.central_scaled(p, q) as f64 / self.m(0, 0).powf(1.5 * k)
    }
}

fn binomial(n: u32, k: u32) -> i128 {
    match (n, k) {
        (_, 0) => 1,
        _ if k == n => 1,
        (2, 1) => 2,
        (3, 1) | (3, 2) => 3,
        _ => unreachable!("orders never exceed 3"),
    }
}

/// Moments of the foreground component that owns `contour`.
///
/// The region is the 8-connected set of 255 pixels reachable from the
/// contour's first point, so holes are excluded and nothing outside the
/// border is counted.
pub fn region_moments(binary: &GrayMap, contour: &Contour) -> Result<MomentSet> {
    MomentSet::from_pixels(region_pixels(binary, contour)?)
}

/// The 8-connected 255 pixels reachable from the contour's first point.
pub fn region_pixels(binary: &GrayMap, contour: &Contour) -> Result<Vec<(usize, usize)>> {
    let start = contour.points.first().ok_or(Error::EmptyMoments)?;
    let (w, h) = (binary.width(), binary.height());
    let (sx, sy) = (start.x, start.y);
    if sx < 0 || sy < 0 || sx as usize >= w || sy as usize >= h || binary.get(sx as usize, sy as usize) != 255 {
        return Err(Error::EmptyMoments);
    }
    let mut seen = vec![false; w * h];
    let mut stack = vec![(sx as usize, sy as usize)];
    seen[sy as usize * w + sx as usize] = true;
    let mut pixels = Vec::new();
    while let Some((x, y)) = stack.pop() {
        pixels.push((x, y));
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                if !seen[ny * w + nx] && binary.get(nx, ny) == 255 {
                    seen[ny * w + nx] = true;
                    stack.push((nx, ny));
                }
            }
        }
    }
    Ok(pixels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HuSignature {
    pub phi: [f64; 7],
    pub log_phi: [f64; 7],
}

/// The seven Hu invariants of a region.
pub fn hu_signature(ms: &MomentSet) -> HuSignature {
    let e = |p, q| ms.eta(p, q);
    let (n20, n02, n11) = (e(2, 0), e(0, 2), e(1, 1));
    let (n30, n03, n21, n12) = (e(3, 0), e(0, 3), e(2, 1), e(1, 2));
    let (a, b) = (n30 + n12, n21 + n03);
    let phi = [
        n20 + n02,
        (n20 - n02).powi(2) + 4.0 * n11 * n11,
        (n30 - 3.0 * n12).powi(2) + (3.0 * n21 - n03).powi(2),
        a * a + b * b,
        (n30 - 3.0 * n12) * a * (a * a - 3.0 * b * b) + (3.0 * n21 - n03) * b * (3.0 * a * a - b * b),
        (n20 - n02) * (a * a - b * b) + 4.0 * n11 * a * b,
        (3.0 * n21 - n03) * a * (a * a - 3.0 * b * b) - (n30 - 3.0 * n12) * b * (3.0 * a * a - b * b),
    ];
    HuSignature { phi, log_phi: phi.map(log_magnitude) }
}

fn log_magnitude(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.signum() * v.abs().log10()
    }
}

/// `1 / (1 + sum |log_phi_a - log_phi_b|)`.
pub fn shape_similarity(a: &HuSignature, b: &HuSignature) -> f64 {
    1.0 / (1.0 + log_distance(a, b))
}

pub fn log_distance(a: &HuSignature, b: &HuSignature) -> f64 {
    a.log_phi.iter().zip(&b.log_phi).map(|(x, y)| (x - y).abs()).sum()
}
