//! 8-bit RGB/RGBA texture storage and PNG I/O.
//!
//! Pixel math elsewhere runs on a floating-point [0,1] view of the
//! data; quantization back to 8 bits rounds half away from zero and
//! happens exactly once, at texture construction from floats.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Texture {
    pub width: u32,
    pub height: u32,
    /// 3 (RGB) or 4 (RGBA).
    pub channels: u32,
    /// Row-major, row 0 is the image top.
    pub data: Vec<u8>,
}

impl Texture {
    pub fn new(width: u32, height: u32, channels: u32) -> Self {
        assert!(channels == 3 || channels == 4, "channels must be 3 or 4");
        Texture {
            width,
            height,
            channels,
            data: vec![0; (width * height * channels) as usize],
        }
    }

    /// Builds a texture from per-pixel float texels in [0,1].
    pub fn from_f32<F>(width: u32, height: u32, channels: u32, mut texel: F) -> Self
    where
        F: FnMut(u32, u32) -> [f32; 4],
    {
        let mut t = Texture::new(width, height, channels);
        for y in 0..height {
            for x in 0..width {
                let v = texel(x, y);
                t.put_f32(x, y, v);
            }
        }
        t
    }

    #[inline]
    pub fn idx(&self, x: u32, y: u32) -> usize {
        ((y * self.width + x) * self.channels) as usize
    }

    /// Texel as floats in [0,1]; missing alpha reads as 1.
    #[inline]
    pub fn get_f32(&self, x: u32, y: u32) -> [f32; 4] {
        const INV: f32 = 1.0 / 255.0;
        let i = self.idx(x, y);
        let mut out = [0.0, 0.0, 0.0, 1.0];
        for (c, slot) in out.iter_mut().enumerate().take(self.channels as usize) {
            *slot = self.data[i + c] as f32 * INV;
        }
        out
    }

    /// Quantizes floats in [0,1] to 8 bits, rounding half away from zero.
    #[inline]
    pub fn put_f32(&mut self, x: u32, y: u32, v: [f32; 4]) {
        let i = self.idx(x, y);
        for c in 0..self.channels as usize {
            self.data[i + c] = (v[c].clamp(0.0, 1.0) * 255.0).round() as u8;
        }
    }

    pub fn same_shape(&self, other: &Texture) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }
}

pub fn load_png(path: impl AsRef<Path>) -> Result<Texture> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| Error::Png {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    let (width, height) = (img.width(), img.height());
    match img {
        image::DynamicImage::ImageRgba8(buf) => Ok(Texture {
            width,
            height,
            channels: 4,
            data: buf.into_raw(),
        }),
        other => Ok(Texture {
            width,
            height,
            channels: 3,
            data: other.to_rgb8().into_raw(),
        }),
    }
}

pub fn save_png(tex: &Texture, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let color = if tex.channels == 4 {
        image::ExtendedColorType::Rgba8
    } else {
        image::ExtendedColorType::Rgb8
    };
    image::save_buffer(path, &tex.data, tex.width, tex.height, color).map_err(|e| Error::Png {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}
