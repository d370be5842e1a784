//! Population pictures as binary portable pixmaps (PPM, `P6`).
//!
//! One band of pixels per agent, one cell per attribute. Attribute values map
//! linearly onto gray levels, 1 darkest and 100 lightest. Cells past the end of
//! a shorter agent are filled with a dark red so they cannot be mistaken for
//! an attribute. Agents are ordered by descending raw fitness, then
//! lexicographically, which groups identical agents together.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evolution::{deviation, Agent, Population, Request, ATTR_MAX, ATTR_MIN};

/// Fill for cells beyond an agent's last attribute.
pub const EMPTY_CELL: [u8; 3] = [96, 0, 0];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PixmapStyle {
    pub cell_width: usize,
    pub cell_height: usize,
}

impl Default for PixmapStyle {
    fn default() -> Self {
        Self {
            cell_width: 8,
            cell_height: 2,
        }
    }
}

/// RGB image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pixmap {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u8; 3]>,
}

impl Pixmap {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[[u8; 3]] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    pub fn write_ppm<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        for px in &self.pixels {
            out.write_all(px)?;
        }
        out.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_ppm(std::io::BufWriter::new(f))
            .map_err(|e| Error::io(path, e))
    }
}

/// Gray level of an attribute value.
pub fn shade(value: u8) -> u8 {
    let span = f64::from(ATTR_MAX - ATTR_MIN);
    (f64::from(value.saturating_sub(ATTR_MIN)) / span * 255.0).round() as u8
}

/// Agents in display order: fittest first, ties broken lexicographically.
pub fn display_order<'a>(population: &'a Population, request: &Request) -> Vec<&'a Agent> {
    let mut keyed: Vec<(u32, &Agent)> = population
        .agents()
        .iter()
        .map(|a| (deviation(a, request), a))
        .collect();
    keyed.sort();
    keyed.into_iter().map(|(_, a)| a).collect()
}

pub fn render_population(
    population: &Population,
    request: &Request,
    style: PixmapStyle,
) -> Result<Pixmap> {
    if population.is_empty() {
        return Err(Error::invalid("cannot draw an empty population"));
    }
    if style.cell_width == 0 || style.cell_height == 0 {
        return Err(Error::invalid("pixmap cells must be at least 1x1"));
    }
    let agents = display_order(population, request);
    let columns = agents.iter().map(|a| a.len()).max().unwrap_or(1);
    let width = columns * style.cell_width;
    let height = agents.len() * style.cell_height;
    let mut pixels = Vec::with_capacity(width * height);
    for a in agents {
        let mut line = Vec::with_capacity(width);
        for c in 0..columns {
            let px = a.attributes().get(c).map_or(EMPTY_CELL, |&v| [shade(v); 3]);
            line.extend(std::iter::repeat_n(px, style.cell_width));
        }
        for _ in 0..style.cell_height {
            pixels.extend_from_slice(&line);
        }
    }
    Ok(Pixmap {
        width,
        height,
        pixels,
    })
}
