//! Rotation about the image centre onto an enlarged canvas.
//!
//! A positive angle turns content clockwise as displayed (y points down): a
//! horizontal stroke rotated by `+θ` descends to the right with slope
//! `tan θ`. The skew estimator reports angles in the same convention, so
//! correcting a page means rotating by the negated estimate.

use super::{BinaryImage, GrayImage, BACKGROUND};

/// Canvas size that holds a `width`×`height` image rotated by `theta` degrees.
pub fn rotated_size(width: usize, height: usize, theta: f64) -> (usize, usize) {
    if theta == 0.0 {
        return (width, height);
    }
    let (s, c) = theta.to_radians().sin_cos();
    let (s, c) = (s.abs(), c.abs());
    let (w, h) = (width as f64, height as f64);
    let nw = (w * c + h * s - 1e-9).ceil().max(1.0) as usize;
    let nh = (w * s + h * c - 1e-9).ceil().max(1.0) as usize;
    (nw, nh)
}

/// Geometry of one rotation: maps points between source and output frames.
#[derive(Debug, Clone, Copy)]
pub struct RotationFrame {
    pub src_size: (usize, usize),
    pub dst_size: (usize, usize),
    cos: f64,
    sin: f64,
}

impl RotationFrame {
    pub fn new(width: usize, height: usize, theta: f64) -> Self {
        let (sin, cos) = if theta == 0.0 { (0.0, 1.0) } else { theta.to_radians().sin_cos() };
        RotationFrame { src_size: (width, height), dst_size: rotated_size(width, height, theta), cos, sin }
    }

    fn centers(&self) -> ((f64, f64), (f64, f64)) {
        let c = |(w, h): (usize, usize)| ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
        (c(self.src_size), c(self.dst_size))
    }

    /// Source point to output point.
    pub fn forward(&self, x: f64, y: f64) -> (f64, f64) {
        let ((sx, sy), (dx, dy)) = self.centers();
        let (u, v) = (x - sx, y - sy);
        (u * self.cos - v * self.sin + dx, u * self.sin + v * self.cos + dy)
    }

    /// Output point to source point.
    pub fn inverse(&self, x: f64, y: f64) -> (f64, f64) {
        let ((sx, sy), (dx, dy)) = self.centers();
        let (u, v) = (x - dx, y - dy);
        (u * self.cos + v * self.sin + sx, -u * self.sin + v * self.cos + sy)
    }
}

// Catmull-Rom (a = -0.5).
fn cubic_weight(t: f64) -> f64 {
    const A: f64 = -0.5;
    let t = t.abs();
    if t <= 1.0 {
        (A + 2.0) * t * t * t - (A + 3.0) * t * t + 1.0
    } else if t < 2.0 {
        A * t * t * t - 5.0 * A * t * t + 8.0 * A * t - 4.0 * A
    } else {
        0.0
    }
}

fn sample_bicubic(img: &GrayImage, sx: f64, sy: f64) -> u8 {
    let (w, h) = (img.width() as f64, img.height() as f64);
    if sx < -0.5 || sy < -0.5 || sx > w - 0.5 || sy > h - 0.5 {
        return BACKGROUND;
    }
    let x0 = sx.floor();
    let y0 = sy.floor();
    let (fx, fy) = (sx - x0, sy - y0);
    let (x0, y0) = (x0 as isize, y0 as isize);
    let mut acc = 0.0;
    for j in -1..=2isize {
        let wy = cubic_weight(fy - j as f64);
        if wy == 0.0 {
            continue;
        }
        let yy = y0 + j;
        let mut row = 0.0;
        for i in -1..=2isize {
            let wx = cubic_weight(fx - i as f64);
            if wx == 0.0 {
                continue;
            }
            let xx = x0 + i;
            let v = if xx >= 0 && yy >= 0 && (xx as usize) < img.width() && (yy as usize) < img.height() {
                img.get(xx as usize, yy as usize)
            } else {
                BACKGROUND
            };
            row += wx * f64::from(v);
        }
        acc += wy * row;
    }
    acc.round().clamp(0.0, 255.0) as u8
}

/// Bicubic rotation by `theta` degrees (|θ| ≤ 45) onto an enlarged canvas.
pub fn rotate_gray(img: &GrayImage, theta: f64) -> GrayImage {
    if theta == 0.0 {
        return img.clone();
    }
    let frame = RotationFrame::new(img.width(), img.height(), theta);
    let (w, h) = frame.dst_size;
    let mut out = GrayImage::new(w, h, BACKGROUND);
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = frame.inverse(x as f64, y as f64);
            out.set(x, y, sample_bicubic(img, sx, sy));
        }
    }
    out
}

/// Nearest-neighbour rotation; samples outside the source are background.
pub fn rotate_binary(img: &BinaryImage, theta: f64) -> BinaryImage {
    if theta == 0.0 {
        return img.clone();
    }
    let frame = RotationFrame::new(img.width(), img.height(), theta);
    let (w, h) = frame.dst_size;
    let mut out = BinaryImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = frame.inverse(x as f64, y as f64);
            let (rx, ry) = (sx.round(), sy.round());
            if rx >= 0.0 && ry >= 0.0 && (rx as usize) < img.width() && (ry as usize) < img.height() {
                out.set(x, y, img.is_ink(rx as usize, ry as usize));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn centroid_offset(pts: impl Iterator<Item = (usize, usize)>, w: usize, h: usize) -> (f64, f64) {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
        for (x, y) in pts {
            sx += x as f64;
            sy += y as f64;
            n += 1.0;
        }
        (sx / n - (w as f64 - 1.0) / 2.0, sy / n - (h as f64 - 1.0) / 2.0)
    }

    #[test]
    fn zero_is_identity() {
        let img = GrayImage::from_fn(9, 5, |x, y| (x * 17 + y * 31) as u8);
        assert_eq!(rotate_gray(&img, 0.0), img);
        let b = BinaryImage::from_fn(9, 5, |x, y| (x + y) % 3 == 0);
        assert_eq!(rotate_binary(&b, 0.0), b);
    }

    #[test]
    fn constant_interior_stays_constant() {
        let img = GrayImage::new(40, 30, 128);
        for theta in [-30.0, -7.5, 3.0, 45.0] {
            let r = rotate_gray(&img, theta);
            let frame = RotationFrame::new(40, 30, theta);
            for y in 0..r.height() {
                for x in 0..r.width() {
                    let (sx, sy) = frame.inverse(x as f64, y as f64);
                    if sx >= 2.0 && sy >= 2.0 && sx <= 37.0 && sy <= 27.0 {
                        assert_eq!(r.get(x, y), 128, "theta {theta} at {x},{y}");
                    }
                }
            }
        }
    }

    #[test]
    fn round_trip_centroid() {
        let img =
            GrayImage::from_fn(80, 60, |x, y| if (20..35).contains(&x) && (10..22).contains(&y) { 0 } else { 255 });
        let ink = |g: &GrayImage| {
            let w = g.width();
            g.data().iter().enumerate().filter(|(_, &v)| v < 128).map(move |(i, _)| (i % w, i / w)).collect::<Vec<_>>()
        };
        let back = rotate_gray(&rotate_gray(&img, 10.0), -10.0);
        let a = centroid_offset(ink(&img).into_iter(), 80, 60);
        let b = centroid_offset(ink(&back).into_iter(), back.width(), back.height());
        assert!((a.0 - b.0).hypot(a.1 - b.1) < 1.0, "{a:?} vs {b:?}");

        let bin = img.threshold_below(128);
        let back = rotate_binary(&rotate_binary(&bin, 10.0), -10.0);
        let pts = |b: &BinaryImage| {
            (0..b.height())
                .flat_map(move |y| (0..b.width()).map(move |x| (x, y)))
                .filter(|&(x, y)| b.is_ink(x, y))
                .collect::<Vec<_>>()
        };
        let a = centroid_offset(pts(&bin).into_iter(), 80, 60);
        let b = centroid_offset(pts(&back).into_iter(), back.width(), back.height());
        assert!((a.0 - b.0).hypot(a.1 - b.1) < 1.0, "{a:?} vs {b:?}");
    }

    #[test]
    fn positive_angle_descends_to_the_right() {
        let f = RotationFrame::new(100, 100, 10.0);
        let (ax, ay) = f.forward(10.0, 50.0);
        let (bx, by) = f.forward(90.0, 50.0);
        assert!(bx > ax && by > ay);
        let (x, y) = f.inverse(bx, by);
        assert!((x - 90.0).abs() < 1e-9 && (y - 50.0).abs() < 1e-9);
    }
}
