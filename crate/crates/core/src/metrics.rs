//! Image similarity metrics: L1, PSNR, SSIM, with optional coverage
//! masks.
//!
//! Metrics run on [0,1] float values; texture entry points convert the
//! 8-bit data once and defer to the float cores. PSNR peaks at 1.0 in
//! these units (identical to using 255 on raw bytes). SSIM uses the
//! canonical parameterization: Rec.601 luminance, 11x11 Gaussian window
//! with sigma 1.5, K1 = 0.01, K2 = 0.03, L = 1.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::texture::Texture;

pub const SSIM_WINDOW: u32 = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// One evaluation run's numbers. `lpips` is an extension slot and stays
/// absent unless an external scorer fills it in.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub l1: f64,
    pub ssim: f64,
    #[serde(serialize_with = "serialize_db")]
    pub psnr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lpips: Option<f64>,
    pub mask_coverage: f64,
    pub timings: BTreeMap<String, f64>,
}

/// JSON has no infinity; +inf serializes as the string "inf".
fn serialize_db<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn check_shapes(a: &Texture, b: &Texture, mask: Option<&[u8]>) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.width, a.height, a.channels, b.width, b.height, b.channels
        )));
    }
    if let Some(m) = mask {
        if m.len() != (a.width * a.height) as usize {
            return Err(Error::ShapeMismatch(format!(
                "mask length {} vs {} pixels",
                m.len(),
                a.width * a.height
            )));
        }
    }
    Ok(())
}

fn to_f64(t: &Texture) -> Vec<f64> {
    t.data.iter().map(|&v| v as f64 / 255.0).collect()
}

/// Mean absolute difference over (masked) values; `channels` values per
/// mask pixel. Fixed left-to-right summation order.
pub fn l1_values(a: &[f64], b: &[f64], channels: usize, mask: Option<&[u8]>) -> f64 {
    let mut sum = 0.0f64;
    let mut count = 0u64;
    for (pix, (pa, pb)) in a.chunks(channels).zip(b.chunks(channels)).enumerate() {
        if let Some(m) = mask {
            if m[pix] == 0 {
                continue;
            }
        }
        for (&x, &y) in pa.iter().zip(pb) {
            sum += (x - y).abs();
            count += 1;
        }
    }
    if count == 0 {
        return 0.0;
    }
    sum / count as f64
}

/// 10*log10(1 / MSE) in dB; +infinity when the inputs match exactly.
pub fn psnr_values(a: &[f64], b: &[f64], channels: usize, mask: Option<&[u8]>) -> f64 {
    let mut sum = 0.0f64;
    let mut count = 0u64;
    for (pix, (pa, pb)) in a.chunks(channels).zip(b.chunks(channels)).enumerate() {
        if let Some(m) = mask {
            if m[pix] == 0 {
                continue;
            }
        }
        for (&x, &y) in pa.iter().zip(pb) {
            let d = x - y;
            sum += d * d;
            count += 1;
        }
    }
    if count == 0 || sum == 0.0 {
        return f64::INFINITY;
    }
    let mse = sum / count as f64;
    10.0 * (1.0 / mse).log10()
}

/// Mean absolute error over (masked) pixels and channels, in [0,1].
pub fn l1_distance(a: &Texture, b: &Texture, mask: Option<&[u8]>) -> Result<f64> {
    check_shapes(a, b, mask)?;
    Ok(l1_values(
        &to_f64(a),
        &to_f64(b),
        a.channels as usize,
        mask,
    ))
}

pub fn psnr(a: &Texture, b: &Texture, mask: Option<&[u8]>) -> Result<f64> {
    check_shapes(a, b, mask)?;
    Ok(psnr_values(
        &to_f64(a),
        &to_f64(b),
        a.channels as usize,
        mask,
    ))
}

/// Rec.601 luminance plane of an RGB(A) texture, in [0,1].
pub fn luminance(t: &Texture) -> Vec<f64> {
    let c = t.channels as usize;
    t.data
        .chunks(c)
        .map(|px| (0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64) / 255.0)
        .collect()
}

fn gaussian_kernel() -> Vec<f64> {
    let n = SSIM_WINDOW as i32;
    let half = n / 2;
    let mut k: Vec<f64> = (-half..=half)
        .map(|i| (-((i * i) as f64) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

// Separable convolution; output only meaningful where the window fits.
fn convolve(src: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let half = kernel.len() / 2;
    let mut tmp = vec![0.0f64; w * h];
    for y in 0..h {
        for x in half..w.saturating_sub(half) {
            let mut acc = 0.0;
            for (ki, &kv) in kernel.iter().enumerate() {
                acc += kv * src[y * w + x + ki - half];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0f64; w * h];
    for y in half..h.saturating_sub(half) {
        for x in 0..w {
            let mut acc = 0.0;
            for (ki, &kv) in kernel.iter().enumerate() {
                acc += kv * tmp[(y + ki - half) * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Mean local SSIM over luminance planes `la`/`lb`, counting only
/// window centers whose full 11x11 window lies inside the image (and
/// inside the mask, when given).
pub fn ssim_values(
    w: usize,
    h: usize,
    la: &[f64],
    lb: &[f64],
    mask: Option<&[u8]>,
) -> Result<f64> {
    if w < SSIM_WINDOW as usize || h < SSIM_WINDOW as usize {
        return Err(Error::ImageTooSmall(SSIM_WINDOW));
    }
    let half = (SSIM_WINDOW / 2) as usize;
    let kernel = gaussian_kernel();

    let mu_a = convolve(la, w, h, &kernel);
    let mu_b = convolve(lb, w, h, &kernel);
    let aa: Vec<f64> = la.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = lb.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = la.iter().zip(lb).map(|(x, y)| x * y).collect();
    let e_aa = convolve(&aa, w, h, &kernel);
    let e_bb = convolve(&bb, w, h, &kernel);
    let e_ab = convolve(&ab, w, h, &kernel);

    // Window-validity counts under the mask, via summed-area table.
    let valid_count: Option<Vec<i64>> = mask.map(|m| {
        let mut sat = vec![0i64; (w + 1) * (h + 1)];
        for y in 0..h {
            for x in 0..w {
                sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1]
                    + sat[(y + 1) * (w + 1) + x]
                    - sat[y * (w + 1) + x]
                    + (m[y * w + x] != 0) as i64;
            }
        }
        let win = SSIM_WINDOW as usize;
        let mut counts = vec![0i64; w * h];
        for y in half..h - half {
            for x in half..w - half {
                let x0 = x - half;
                let y0 = y - half;
                counts[y * w + x] = sat[(y0 + win) * (w + 1) + x0 + win]
                    - sat[y0 * (w + 1) + x0 + win]
                    - sat[(y0 + win) * (w + 1) + x0]
                    + sat[y0 * (w + 1) + x0];
            }
        }
        counts
    });
    let full_window = (SSIM_WINDOW * SSIM_WINDOW) as i64;

    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let mut sum = 0.0f64;
    let mut count = 0u64;
    for y in half..h - half {
        for x in half..w - half {
            if let Some(counts) = &valid_count {
                if counts[y * w + x] != full_window {
                    continue;
                }
            }
            let i = y * w + x;
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = e_aa[i] - ma * ma;
            let vb = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            let s = ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            sum += s;
            count += 1;
        }
    }
    if count == 0 {
        return Ok(1.0);
    }
    Ok(sum / count as f64)
}

pub fn ssim(a: &Texture, b: &Texture, mask: Option<&[u8]>) -> Result<f64> {
    check_shapes(a, b, mask)?;
    ssim_values(
        a.width as usize,
        a.height as usize,
        &luminance(a),
        &luminance(b),
        mask,
    )
}
