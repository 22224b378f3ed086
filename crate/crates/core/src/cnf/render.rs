//! Three-colour raster view of a [`DenseEncoding`], written as binary PPM (P6).

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::DenseEncoding;

pub type Rgb = [u8; 3];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("palette colours must be pairwise distinct")]
    PaletteNotDistinct,
    #[error("scale factor must be at least 1")]
    ZeroScale,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Palette {
    pub negative: Rgb,
    pub absent: Rgb,
    pub positive: Rgb,
}

impl Default for Palette {
    fn default() -> Self {
        Palette { negative: [220, 40, 40], absent: [0, 0, 0], positive: [40, 200, 60] }
    }
}

impl Palette {
    pub fn color(&self, cell: i8) -> Rgb {
        match cell {
            1 => self.positive,
            -1 => self.negative,
            _ => self.absent,
        }
    }

    fn is_distinct(&self) -> bool {
        self.negative != self.absent && self.negative != self.positive && self.absent != self.positive
    }
}

/// RGB raster, row-major, 3 bytes per pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Raster {
    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        let o = (y * self.width + x) * 3;
        [self.pixels[o], self.pixels[o + 1], self.pixels[o + 2]]
    }

    pub fn write_ppm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.pixels)
    }

    pub fn to_ppm_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.pixels.len() + 32);
        self.write_ppm(&mut buf).expect("writing to Vec cannot fail");
        buf
    }
}

/// Each cell becomes a `scale × scale` block; the raster is `(cols·scale) × (rows·scale)`.
pub fn render_image(enc: &DenseEncoding, palette: &Palette, scale: usize) -> Result<Raster, RenderError> {
    if !palette.is_distinct() {
        return Err(RenderError::PaletteNotDistinct);
    }
    if scale == 0 {
        return Err(RenderError::ZeroScale);
    }
    let width = enc.cols() * scale;
    let height = enc.rows() * scale;
    let mut pixels = Vec::with_capacity(width * height * 3);
    for i in 0..enc.rows() {
        let mut line = Vec::with_capacity(width * 3);
        for &cell in enc.row(i) {
            let c = palette.color(cell);
            for _ in 0..scale {
                line.extend_from_slice(&c);
            }
        }
        for _ in 0..scale {
            pixels.extend_from_slice(&line);
        }
    }
    Ok(Raster { width, height, pixels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Cnf;
    use crate::testutil::arb_cnf;
    use proptest::prelude::*;
    use std::collections::HashMap;

    #[test]
    fn single_green_pixel() {
        let pal = Palette { positive: [0, 255, 0], ..Palette::default() };
        let enc = DenseEncoding::from_cells(1, 1, vec![1]).unwrap();
        let r = render_image(&enc, &pal, 1).unwrap();
        assert_eq!((r.width, r.height), (1, 1));
        assert_eq!(r.pixel(0, 0), [0, 255, 0]);
        assert_eq!(r.to_ppm_bytes(), b"P6\n1 1\n255\n\x00\xff\x00".to_vec());
    }

    #[test]
    fn two_by_two_has_three_colours() {
        let enc = DenseEncoding::from_cells(2, 2, vec![1, -1, 0, 1]).unwrap();
        let pal = Palette::default();
        let r = render_image(&enc, &pal, 1).unwrap();
        let mut seen: Vec<Rgb> = (0..2).flat_map(|y| (0..2).map(move |x| (x, y))).map(|(x, y)| r.pixel(x, y)).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 3);
        assert_eq!(r.pixel(1, 0), pal.negative);
        assert_eq!(r.pixel(0, 1), pal.absent);
    }

    #[test]
    fn scaled() {
        let enc = DenseEncoding::from_cells(1, 2, vec![1, -1]).unwrap();
        let pal = Palette::default();
        let r = render_image(&enc, &pal, 3).unwrap();
        assert_eq!((r.width, r.height), (6, 3));
        assert_eq!(r.pixel(2, 2), pal.positive);
        assert_eq!(r.pixel(3, 0), pal.negative);
    }

    #[test]
    fn rejects_bad_palette() {
        let enc = DenseEncoding::zeros(1, 1);
        let pal = Palette { negative: [1, 2, 3], absent: [1, 2, 3], positive: [0, 0, 0] };
        assert_eq!(render_image(&enc, &pal, 1), Err(RenderError::PaletteNotDistinct));
        assert_eq!(render_image(&enc, &Palette::default(), 0), Err(RenderError::ZeroScale));
    }

    proptest! {
        #[test]
        fn colour_counts_match_cells(f in arb_cnf(12, 20)) {
            let enc = Cnf::to_dense(&f);
            let pal = Palette::default();
            let r = render_image(&enc, &pal, 1).unwrap();
            let mut want: HashMap<Rgb, usize> = HashMap::new();
            for &c in enc.cells() {
                *want.entry(pal.color(c)).or_default() += 1;
            }
            let mut got: HashMap<Rgb, usize> = HashMap::new();
            for px in r.pixels.chunks(3) {
                *got.entry([px[0], px[1], px[2]]).or_default() += 1;
            }
            prop_assert_eq!(got, want);
        }
    }
}
