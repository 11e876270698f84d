use super::{BinaryImage, Rect};

/// A maximal 8-connected set of ink pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub id: usize,
    pub pixel_count: usize,
    pub bbox: Rect,
    /// Raster order.
    pub pixels: Vec<(usize, usize)>,
}

/// Per-pixel component labels. Label 0 is background; component `id` has
/// label `id + 1`.
#[derive(Debug, Clone)]
pub struct Labeling {
    pub width: usize,
    pub labels: Vec<u32>,
    pub sizes: Vec<usize>,
    pub bboxes: Vec<Rect>,
}

impl Labeling {
    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }
}

/// Labels 8-connected ink components; ids follow the raster order of each
/// component's first pixel.
pub fn label_components(img: &BinaryImage) -> Labeling {
    let (w, h) = (img.width(), img.height());
    let mut labels = vec![0u32; w * h];
    let mut sizes = Vec::new();
    let mut bboxes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !img.data()[start] || labels[start] != 0 {
            continue;
        }
        let label = sizes.len() as u32 + 1;
        labels[start] = label;
        stack.push(start);
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        let mut size = 0;
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            size += 1;
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if img.data()[j] && labels[j] == 0 {
                        labels[j] = label;
                        stack.push(j);
                    }
                }
            }
        }
        sizes.push(size);
        bboxes.push(Rect::from_corners(x0, y0, x1, y1));
    }
    Labeling { width: w, labels, sizes, bboxes }
}

/// Partition of all ink pixels into maximal 8-connected components.
pub fn connected_components(img: &BinaryImage) -> Vec<Component> {
    let lab = label_components(img);
    let mut comps: Vec<Component> = lab
        .sizes
        .iter()
        .zip(&lab.bboxes)
        .enumerate()
        .map(|(id, (&size, &bbox))| Component { id, pixel_count: size, bbox, pixels: Vec::with_capacity(size) })
        .collect();
    for (i, &l) in lab.labels.iter().enumerate() {
        if l != 0 {
            comps[l as usize - 1].pixels.push((i % lab.width, i / lab.width));
        }
    }
    comps
}
