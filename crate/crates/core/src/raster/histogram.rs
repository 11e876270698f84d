use super::{check_region, BinaryImage, Rect};
use crate::Result;

/// Ink count of each row of `region`, top to bottom.
pub fn row_histogram(img: &BinaryImage, region: Rect) -> Result<Vec<usize>> {
    check_region(region, img.width(), img.height())?;
    Ok((region.y..region.bottom())
        .map(|y| {
            let row = &img.data()[y * img.width() + region.x..y * img.width() + region.right()];
            row.iter().filter(|&&b| b).count()
        })
        .collect())
}

/// Ink count of each column of `region`, left to right.
pub fn column_histogram(img: &BinaryImage, region: Rect) -> Result<Vec<usize>> {
    check_region(region, img.width(), img.height())?;
    let mut counts = vec![0usize; region.w];
    for y in region.y..region.bottom() {
        let row = &img.data()[y * img.width() + region.x..y * img.width() + region.right()];
        for (c, &ink) in counts.iter_mut().zip(row) {
            *c += usize::from(ink);
        }
    }
    Ok(counts)
}
