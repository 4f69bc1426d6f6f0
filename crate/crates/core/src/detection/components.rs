//! 8-connected component labelling into blobs.

use crate::frames::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
}

impl BoundingBox {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= f64::from(self.x_min)
            && x <= f64::from(self.x_max)
            && y >= f64::from(self.y_min)
            && y <= f64::from(self.y_max)
    }
}

/// A connected foreground region detected in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub frame_index: usize,
    /// Member pixels as (x, y), in raster order.
    pub pixels: Vec<(u32, u32)>,
    /// Mean of the member pixel coordinates, (x, y).
    pub centroid: (f64, f64),
    pub bbox: BoundingBox,
}

impl Blob {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    fn from_pixels(frame_index: usize, mut pixels: Vec<(u32, u32)>) -> Self {
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        let n = pixels.len() as f64;
        let (mut sx, mut sy) = (0.0, 0.0);
        let mut bbox = BoundingBox {
            x_min: u32::MAX,
            y_min: u32::MAX,
            x_max: 0,
            y_max: 0,
        };
        for &(x, y) in &pixels {
            sx += f64::from(x);
            sy += f64::from(y);
            bbox.x_min = bbox.x_min.min(x);
            bbox.y_min = bbox.y_min.min(y);
            bbox.x_max = bbox.x_max.max(x);
            bbox.y_max = bbox.y_max.max(y);
        }
        Self {
            frame_index,
            pixels,
            centroid: (sx / n, sy / n),
            bbox,
        }
    }
}

/// Label the 8-connected components of `mask`, dropping those smaller than
/// `min_area`. Blobs are ordered by the top-left corner of their bounding
/// box, `(y_min, x_min)`.
pub fn connected_components(mask: &BinaryMask, frame_index: usize, min_area: usize) -> Vec<Blob> {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let mut visited = vec![false; bits.len()];
    let mut stack = Vec::new();
    let mut blobs = Vec::new();

    for start in 0..bits.len() {
        if !bits[start] || visited[start] {
            continue;
        }
        visited[start] = true;
        stack.push(start);
        let mut members = Vec::new();
        while let Some(idx) = stack.pop() {
            let (x, y) = (idx % w, idx / w);
            members.push((x as u32, y as u32));
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let n = ny * w + nx;
                    if bits[n] && !visited[n] {
                        visited[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
        if members.len() >= min_area {
            blobs.push(Blob::from_pixels(frame_index, members));
        }
    }
    // raster discovery order is already sorted by first pixel; the stable
    // sort then orders by bounding box corner
    blobs.sort_by_key(|b| (b.bbox.y_min, b.bbox.x_min));
    blobs
}
