use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::imagery::BinaryMask;
use crate::{Error, Result};

// Clockwise with y pointing down, starting west.
const RING: [(i64, i64); 8] = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];

/// 8-connected component labels; returns the pixels of the largest one
/// (earliest in raster order on ties) as a membership mask.
fn largest_component(mask: &BinaryMask) -> Option<BinaryMask> {
    let (w, h) = (mask.width(), mask.height());
    let mut label = vec![usize::MAX; w * h];
    let mut best: Option<(usize, usize)> = None;
    let mut next = 0;
    let mut queue = VecDeque::new();
    for (x, y) in mask.foreground() {
        if label[y * w + x] != usize::MAX {
            continue;
        }
        let mut size = 0;
        label[y * w + x] = next;
        queue.push_back((x, y));
        while let Some((cx, cy)) = queue.pop_front() {
            size += 1;
            for (dx, dy) in RING {
                let (nx, ny) = (cx as i64 + dx, cy as i64 + dy);
                if mask.get_or_false(nx, ny) && label[ny as usize * w + nx as usize] == usize::MAX {
                    label[ny as usize * w + nx as usize] = next;
                    queue.push_back((nx as usize, ny as usize));
                }
            }
        }
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((next, size));
        }
        next += 1;
    }
    let (id, _) = best?;
    Some(BinaryMask::from_fn(w, h, |x, y| label[y * w + x] == id))
}

/// Moore-neighbour trace of the outer boundary of the largest foreground
/// component, clockwise from its first pixel in raster order. Pixels on
/// one-pixel necks are listed once.
pub fn trace_boundary(mask: &BinaryMask) -> Result<Vec<[i64; 2]>> {
    let comp = largest_component(mask).ok_or(Error::Empty("mask foreground"))?;
    let (sx, sy) = comp.foreground().next().map(|(x, y)| (x as i64, y as i64)).ok_or(Error::Empty("mask foreground"))?;
    let start = [sx, sy];
    let start_back = [sx - 1, sy];
    let mut seen = vec![false; comp.width() * comp.height()];
    let mut out = Vec::new();
    let mut cur = start;
    let mut back = start_back;
    let limit = 4 * comp.width() * comp.height() + 8;
    for _ in 0..limit {
        let k = cur[1] as usize * comp.width() + cur[0] as usize;
        if !seen[k] {
            seen[k] = true;
            out.push(cur);
        }
        let d0 = RING.iter().position(|&(dx, dy)| [cur[0] + dx, cur[1] + dy] == back).unwrap_or(0);
        let mut moved = false;
        for s in 1..=8 {
            let (dx, dy) = RING[(d0 + s) % 8];
            let n = [cur[0] + dx, cur[1] + dy];
            if comp.get_or_false(n[0], n[1]) {
                let (bx, by) = RING[(d0 + s - 1) % 8];
                back = [cur[0] + bx, cur[1] + by];
                cur = n;
                moved = true;
                break;
            }
        }
        if !moved || (cur == start && back == start_back) {
            break;
        }
    }
    Ok(out)
}

/// `n` farthest-point samples of the outer boundary, returned in contour
/// order as `(x, y)` pixel coordinates. Sampling starts at the first
/// traced pixel; ties go to the earlier pixel.
pub fn sample_contour(mask: &BinaryMask, n: usize) -> Result<Vec<[f64; 2]>> {
    let boundary = trace_boundary(mask)?;
    if n == 0 || n > boundary.len() {
        return Err(Error::InvalidArgument(alloc::format!(
            "cannot take {n} samples from a boundary of {} pixels",
            boundary.len()
        )));
    }
    let pts: Vec<[f64; 2]> = boundary.iter().map(|p| [p[0] as f64, p[1] as f64]).collect();
    let mut chosen = vec![false; pts.len()];
    let mut dist = vec![f64::INFINITY; pts.len()];
    let mut pick = 0;
    for _ in 0..n {
        chosen[pick] = true;
        let p = pts[pick];
        let mut far = (usize::MAX, -1.0);
        for (k, q) in pts.iter().enumerate() {
            let d = (q[0] - p[0]) * (q[0] - p[0]) + (q[1] - p[1]) * (q[1] - p[1]);
            if d < dist[k] {
                dist[k] = d;
            }
            if !chosen[k] && dist[k] > far.1 {
                far = (k, dist[k]);
            }
        }
        pick = far.0;
    }
    Ok(pts.iter().zip(&chosen).filter(|(_, c)| **c).map(|(p, _)| *p).collect())
}
