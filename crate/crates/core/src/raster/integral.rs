use super::GrayImage;

/// Mean and population standard deviation of a pixel window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    pub mean: f64,
    pub stddev: f64,
}

impl WindowStats {
    /// Stats from an exact pixel count, sum and sum of squares.
    ///
    /// The variance numerator `n·Σv² − (Σv)²` is formed in integers so that
    /// `stddev` is zero exactly when every pixel is equal.
    pub fn from_moments(count: u64, sum: u64, sum_sq: u64) -> Self {
        let n = count as u128;
        let numer = n * sum_sq as u128 - (sum as u128) * (sum as u128);
        WindowStats { mean: sum as f64 / count as f64, stddev: (numer as f64).sqrt() / count as f64 }
    }
}

/// Summed-area tables of intensity and squared intensity.
#[derive(Debug, Clone)]
pub struct IntegralTables {
    width: usize,
    height: usize,
    // (width+1)*(height+1), first row and column zero.
    sum: Vec<u64>,
    sum_sq: Vec<u64>,
}

impl IntegralTables {
    pub fn new(img: &GrayImage) -> Self {
        let (w, h) = (img.width(), img.height());
        let stride = w + 1;
        let mut sum = vec![0u64; stride * (h + 1)];
        let mut sum_sq = vec![0u64; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0u64;
            let mut row_sq = 0u64;
            for x in 0..w {
                let v = u64::from(img.get(x, y));
                row += v;
                row_sq += v * v;
                let i = (y + 1) * stride + x + 1;
                sum[i] = sum[i - stride] + row;
                sum_sq[i] = sum_sq[i - stride] + row_sq;
            }
        }
        IntegralTables { width: w, height: h, sum, sum_sq }
    }

    /// Window of half-size `half` centred on `(x, y)`, clipped at the borders.
    pub fn stats(&self, x: usize, y: usize, half: usize) -> WindowStats {
        let x0 = x.saturating_sub(half);
        let y0 = y.saturating_sub(half);
        let x1 = (x + half + 1).min(self.width);
        let y1 = (y + half + 1).min(self.height);
        let stride = self.width + 1;
        let at = |t: &[u64], xx: usize, yy: usize| t[yy * stride + xx];
        let rect = |t: &[u64]| at(t, x1, y1) + at(t, x0, y0) - at(t, x0, y1) - at(t, x1, y0);
        let count = ((x1 - x0) * (y1 - y0)) as u64;
        WindowStats::from_moments(count, rect(&self.sum), rect(&self.sum_sq))
    }
}

/// Stats of the `(2·half+1)²` window around `center`, clipped at borders.
///
/// Builds the integral tables on every call; hot loops should build
/// [`IntegralTables`] once instead.
pub fn window_stats(img: &GrayImage, center: (usize, usize), half: usize) -> WindowStats {
    IntegralTables::new(img).stats(center.0, center.1, half.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image() {
        let img = GrayImage::new(7, 5, 100);
        let s = window_stats(&img, (3, 2), 2);
        assert_eq!(s.mean, 100.0);
        assert_eq!(s.stddev, 0.0);
    }

    #[test]
    fn two_point() {
        let img = GrayImage::from_vec(2, 1, vec![0, 255]).unwrap();
        let s = window_stats(&img, (0, 0), 1);
        assert_eq!(s.mean, 127.5);
        assert_eq!(s.stddev, 127.5);
    }
}
