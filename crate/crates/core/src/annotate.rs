//! Draws detected triangles and their similarity labels onto a frame.

use crate::contour::Point;
use crate::pipeline::Detection;
use crate::raster::RgbImage;

pub const EDGE_COLOUR: [u8; 3] = [255, 0, 255];
const BOX_COLOUR: [u8; 3] = [0, 0, 0];
const TEXT_COLOUR: [u8; 3] = [255, 255, 255];
const GLYPH_W: usize = 5;
const GLYPH_H: usize = 7;
const SCALE: usize = 2;
const PAD: usize = 2;

/// 5x7 bitmaps, one row per byte, high bit of the low five on the left.
fn glyph(c: char) -> [u8; GLYPH_H] {
    match c {
        '0' => [0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e],
        '1' => [0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e],
        '2' => [0x0e, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1f],
        '3' => [0x1f, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0e],
        '4' => [0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02],
        '5' => [0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e],
        '6' => [0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e],
        '7' => [0x1f, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e],
        '9' => [0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c],
        '.' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x0c, 0x0c],
        _ => [0x1f; GLYPH_H],
    }
}

/// Label text for a similarity score, e.g. `0.86`.
pub fn label(similarity: f64) -> String {
    format!("{similarity:.2}")
}

/// Rectangle `(x, y, width, height)` that the label for `detection` occupies
/// in a `width` x `height` frame. It sits just above the triangle's topmost
/// vertex when there is room, below it otherwise, and is clipped to the frame.
pub fn label_box(detection: &Detection, width: usize, height: usize) -> (usize, usize, usize, usize) {
    let text = label(detection.similarity);
    let bw = text.len() * (GLYPH_W + 1) * SCALE - SCALE + 2 * PAD;
    let bh = GLYPH_H * SCALE + 2 * PAD;
    let top = detection.triangle.vertices.iter().min_by_key(|p| (p.y, p.x)).copied().expect("three vertices");
    let x = (top.x.max(0) as usize).min(width.saturating_sub(bw));
    let y = if top.y as usize >= bh + 2 { top.y as usize - bh - 2 } else { (top.y.max(0) as usize + 2).min(height.saturating_sub(bh)) };
    (x, y, bw.min(width - x), bh.min(height - y))
}

/// Pixels on the closed Bresenham outline of the triangle, clipped to the
/// frame.
pub fn edge_pixels(detection: &Detection, width: usize, height: usize) -> Vec<(usize, usize)> {
    let v = detection.triangle.vertices;
    let mut out = Vec::new();
    for i in 0..3 {
        line(v[i], v[(i + 1) % 3], |x, y| {
            if x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height {
                out.push((x as usize, y as usize));
            }
        });
    }
    out
}

fn line(a: Point, b: Point, mut plot: impl FnMut(i32, i32)) {
    let (dx, dy) = ((b.x - a.x).abs(), -(b.y - a.y).abs());
    let (sx, sy) = ((b.x - a.x).signum(), (b.y - a.y).signum());
    let (mut x, mut y, mut err) = (a.x, a.y, dx + dy);
    loop {
        plot(x, y);
        if x == b.x && y == b.y {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Copy of `image` with every triangle outlined and labelled.
pub fn annotate(image: &RgbImage, detections: &[Detection]) -> RgbImage {
    let mut out = image.clone();
    let (w, h) = (image.width(), image.height());
    for d in detections {
        for (x, y) in edge_pixels(d, w, h) {
            out.put(x, y, EDGE_COLOUR);
        }
    }
    // Labels go on top so edges never hide them.
    for d in detections {
        let (bx, by, bw, bh) = label_box(d, w, h);
        for y in by..by + bh {
            for x in bx..bx + bw {
                out.put(x, y, BOX_COLOUR);
            }
        }
        for (i, c) in label(d.similarity).chars().enumerate() {
            let rows = glyph(c);
            let gx = bx + PAD + i * (GLYPH_W + 1) * SCALE;
            for (r, bits) in rows.iter().enumerate() {
                for col in 0..GLYPH_W {
                    if bits >> (GLYPH_W - 1 - col) & 1 == 0 {
                        continue;
                    }
                    for s in 0..SCALE * SCALE {
                        let (x, y) = (gx + col * SCALE + s % SCALE, by + PAD + r * SCALE + s / SCALE);
                        if x < bx + bw && y < by + bh {
                            out.put(x, y, TEXT_COLOUR);
                        }
                    }
                }
            }
        }
    }
    out
}
