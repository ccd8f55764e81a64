//! Figure-style images from cluster grid files: 2D overlays and 3D
//! cross-section projections, emitted as binary portable pixmaps or a
//! minimal scalable-vector subset. No image libraries; bytes are a pure
//! function of the inputs.

use std::path::Path;

use crate::error::{DreError, Result};
use crate::grid::GridFile;

/// Hard cap on output pixels; jobs above this are refused.
pub const MAX_RENDER_PIXELS: usize = 1 << 26;

pub type Rgb = [u8; 3];

const BACKGROUND: Rgb = [255, 255, 255];

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Palette {
    /// Blue base, orange overlay.
    Classic,
    /// Grayscale.
    Gray,
}

impl Palette {
    pub fn parse(s: &str) -> Result<Palette> {
        match s {
            "classic" => Ok(Palette::Classic),
            "gray" => Ok(Palette::Gray),
            other => Err(DreError::InvalidInput(format!(
                "unknown palette {other:?}; expected classic or gray"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Palette::Classic => "classic",
            Palette::Gray => "gray",
        }
    }

    fn base(&self) -> Rgb {
        match self {
            Palette::Classic => [31, 119, 180],
            Palette::Gray => [96, 96, 96],
        }
    }

    fn overlay(&self) -> Rgb {
        match self {
            Palette::Classic => [255, 127, 14],
            Palette::Gray => [160, 160, 160],
        }
    }
}

/// Translucency: integer average, componentwise.
fn blend(a: Rgb, b: Rgb) -> Rgb {
    [
        ((a[0] as u16 + b[0] as u16) / 2) as u8,
        ((a[1] as u16 + b[1] as u16) / 2) as u8,
        ((a[2] as u16 + b[2] as u16) / 2) as u8,
    ]
}

/// Cross-section highlight: half-intensity shade.
fn darken(c: Rgb) -> Rgb {
    [c[0] / 2, c[1] / 2, c[2] / 2]
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum ImageFormat {
    Ppm,
    Svg,
}

impl ImageFormat {
    pub fn parse(s: &str) -> Result<ImageFormat> {
        match s {
            "ppm" => Ok(ImageFormat::Ppm),
            "svg" => Ok(ImageFormat::Svg),
            other => Err(DreError::InvalidInput(format!(
                "unknown image format {other:?}; expected ppm or svg"
            ))),
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            ImageFormat::Ppm => "ppm",
            ImageFormat::Svg => "svg",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RenderJob {
    pub base: GridFile,
    pub overlay: Option<GridFile>,
    pub palette: Palette,
    /// Cell edge in pixels.
    pub scale: u32,
}

impl RenderJob {
    fn check_scale(&self) -> Result<u32> {
        if self.scale == 0 {
            return Err(DreError::InvalidInput("scale must be at least 1".into()));
        }
        Ok(self.scale)
    }
}

/// Flat pixel buffer; rows top to bottom.
#[derive(Clone, Debug)]
pub struct Raster {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl Raster {
    fn new(width: usize, height: usize) -> Result<Raster> {
        let n = width
            .checked_mul(height)
            .filter(|&n| n > 0 && n <= MAX_RENDER_PIXELS)
            .ok_or_else(|| {
                DreError::Resource(format!(
                    "render size {width}x{height} exceeds the {MAX_RENDER_PIXELS}-pixel cap"
                ))
            })?;
        Ok(Raster { width, height, pixels: vec![BACKGROUND; n] })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    fn fill_rect(&mut self, x: usize, y: usize, w: usize, h: usize, color: Rgb) {
        for row in y..(y + h).min(self.height) {
            let base = row * self.width;
            for col in x..(x + w).min(self.width) {
                self.pixels[base + col] = color;
            }
        }
    }

    /// Binary portable pixmap (P6, 8-bit).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(self.pixels.len() * 3);
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }

    /// Minimal scalable-vector emitter: one rect per horizontal run of
    /// non-background color.
    pub fn to_svg(&self) -> Vec<u8> {
        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
             shape-rendering=\"crispEdges\">\n",
            self.width, self.height
        ));
        out.push_str(&format!(
            "<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
            self.width, self.height
        ));
        for y in 0..self.height {
            let mut x = 0usize;
            while x < self.width {
                let c = self.pixel(x, y);
                if c == BACKGROUND {
                    x += 1;
                    continue;
                }
                let mut run = 1usize;
                while x + run < self.width && self.pixel(x + run, y) == c {
                    run += 1;
                }
                out.push_str(&format!(
                    "<rect x=\"{x}\" y=\"{y}\" width=\"{run}\" height=\"1\" \
                     fill=\"#{:02x}{:02x}{:02x}\"/>\n",
                    c[0], c[1], c[2]
                ));
                x += run;
            }
        }
        out.push_str("</svg>\n");
        out.into_bytes()
    }

    pub fn encode(&self, format: ImageFormat) -> Vec<u8> {
        match format {
            ImageFormat::Ppm => self.to_ppm(),
            ImageFormat::Svg => self.to_svg(),
        }
    }

    pub fn write_to(&self, path: &Path, format: ImageFormat) -> Result<()> {
        std::fs::write(path, self.encode(format))?;
        Ok(())
    }
}

/// Plane overlay: the box's axis 1 runs right, axis 2 runs up. The
/// overlay cluster is drawn translucent over the base so shared
/// boundaries match up visually.
pub fn render_2d(job: &RenderJob) -> Result<Raster> {
    let s = job.check_scale()? as usize;
    let bbox = job.base.bbox();
    if bbox.dim() != 2 {
        return Err(DreError::InvalidInput(format!(
            "plane render needs a 2-dimensional grid, got {}",
            bbox.dim()
        )));
    }
    if let Some(over) = &job.overlay {
        if over.bbox() != bbox {
            return Err(DreError::InvalidInput(
                "overlay render needs both grids over the same box".into(),
            ));
        }
    }
    let n1 = bbox.extent(1);
    let n2 = bbox.extent(2);
    let mut raster = Raster::new(n1 * s, n2 * s)?;
    let base_color = job.palette.base();
    let over_color = job.palette.overlay();
    let (lo1, _) = bbox.axis_range(1);
    let (_, hi2) = bbox.axis_range(2);
    let mut site = vec![0i64; 2];
    for idx in 0..bbox.len() {
        let in_base = job.base.contains_index(idx);
        let in_over = job.overlay.as_ref().is_some_and(|g| g.contains_index(idx));
        if !in_base && !in_over {
            continue;
        }
        bbox.site_of(idx, &mut site);
        let x = (site[0] - lo1) as usize * s;
        let y = (hi2 - site[1]) as usize * s;
        let mut color = if in_base { base_color } else { BACKGROUND };
        if in_over {
            color = blend(color, over_color);
        }
        raster.fill_rect(x, y, s, s, color);
    }
    Ok(raster)
}

/// Axis roles for the 3D projection: which box axis recedes into depth
/// and which two span the picture plane.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct AxonometricPreset {
    pub depth_axis: usize,
    pub right_axis: usize,
    pub up_axis: usize,
}

/// The three cyclic axis assignments; preset 0 sends axis 1 into depth.
pub fn axonometric_preset(preset: u8) -> Result<AxonometricPreset> {
    match preset {
        0 => Ok(AxonometricPreset { depth_axis: 1, right_axis: 2, up_axis: 3 }),
        1 => Ok(AxonometricPreset { depth_axis: 2, right_axis: 3, up_axis: 1 }),
        2 => Ok(AxonometricPreset { depth_axis: 3, right_axis: 1, up_axis: 2 }),
        v => Err(DreError::InvalidInput(format!("preset {v} out of range 0..=2"))),
    }
}

/// Axonometric projection of a 3D grid with one axis-1 cross-section
/// drawn in a darker shade. Depth recedes up and to the right: a cell at
/// depth step a is offset by (a*s/2, a*s/4) pixels, and nearer cells are
/// drawn last so they occlude.
pub fn render_3d_section(job: &RenderJob, plane: i64, preset: u8) -> Result<Raster> {
    let s = job.check_scale()? as usize;
    if job.overlay.is_some() {
        return Err(DreError::InvalidInput(
            "cross-section render takes a single grid".into(),
        ));
    }
    let bbox = job.base.bbox();
    if bbox.dim() != 3 {
        return Err(DreError::InvalidInput(format!(
            "cross-section render needs a 3-dimensional grid, got {}",
            bbox.dim()
        )));
    }
    let (lo1, hi1) = bbox.axis_range(1);
    if plane < lo1 || plane > hi1 {
        return Err(DreError::InvalidInput(format!(
            "section plane {plane} outside axis-1 range [{lo1}, {hi1}]"
        )));
    }
    let axes = axonometric_preset(preset)?;
    let na = bbox.extent(axes.depth_axis);
    let nb = bbox.extent(axes.right_axis);
    let nc = bbox.extent(axes.up_axis);
    let width = nb * s + (na - 1) * (s / 2) + s / 2;
    let height = nc * s + (na - 1) * (s / 4) + s / 4;
    let mut raster = Raster::new(width.max(1), height.max(1))?;
    let color = job.palette.base();
    let section = darken(color);
    let (alo, _) = bbox.axis_range(axes.depth_axis);
    let (blo, _) = bbox.axis_range(axes.right_axis);
    let (_, chi) = bbox.axis_range(axes.up_axis);
    // bucket member cells by depth layer, then paint far to near so near
    // cells occlude
    let mut layers: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); na];
    let mut site = vec![0i64; 3];
    for idx in 0..bbox.len() {
        if !job.base.contains_index(idx) {
            continue;
        }
        bbox.site_of(idx, &mut site);
        let a = (site[axes.depth_axis - 1] - alo) as usize;
        let b = (site[axes.right_axis - 1] - blo) as usize;
        let c = (chi - site[axes.up_axis - 1]) as usize;
        layers[a].push((b, c, site[0] == plane));
    }
    for a in (0..na).rev() {
        for &(b, c, on_plane) in &layers[a] {
            let x = b * s + a * (s / 2);
            let y = c * s + (na - 1 - a) * (s / 4);
            raster.fill_rect(x, y, s, s, if on_plane { section } else { color });
        }
    }
    Ok(raster)
}
