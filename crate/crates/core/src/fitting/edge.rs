use crate::imagery::BinaryMask;
use crate::{Error, Result};

/// Horizontal line at the top of a garment opening.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeLine {
    pub row: usize,
    /// Image `y` of the line: the top edge of `row`.
    pub y: f64,
    pub occupancy: usize,
}

/// Topmost row whose foreground count reaches `fraction` of the busiest
/// row's count.
pub fn detect_edge_line(mask: &BinaryMask, fraction: f64) -> Result<EdgeLine> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument("edge fraction must lie in (0, 1]".into()));
    }
    let w = mask.width();
    let counts: alloc::vec::Vec<usize> = mask.data().chunks(w.max(1)).map(|r| r.iter().filter(|b| **b).count()).collect();
    let max = counts.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Err(Error::Empty("silhouette for edge detection"));
    }
    let need = fraction * max as f64;
    let row = counts.iter().position(|&c| c as f64 >= need).unwrap_or(0);
    Ok(EdgeLine { row, y: row as f64, occupancy: counts[row] })
}
