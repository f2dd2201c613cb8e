use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Collocation points split by role.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollocationSet {
    pub interior: Vec<(f64, f64)>,
    pub wall: Vec<(f64, f64)>,
    pub lid: Vec<(f64, f64)>,
    pub reference_point: (f64, f64),
}

impl CollocationSet {
    pub fn len(&self) -> usize {
        self.interior.len() + self.wall.len() + self.lid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Node coordinate `k` of `n` evenly spaced nodes on `[0, 1]`.
pub fn grid_coord(k: usize, n: usize) -> f64 {
    if k + 1 == n {
        1.0
    } else {
        k as f64 / (n - 1) as f64
    }
}

/// Uniform `nx × ny` grid on the unit square. The top row, corners
/// included, is the lid; the rest of the boundary is wall.
pub fn make_collocation(nx: usize, ny: usize) -> Result<CollocationSet> {
    if nx < 3 || ny < 3 {
        return Err(Error::Config(format!(
            "collocation grid needs at least 3×3 points, got {nx}×{ny}"
        )));
    }
    let mut set = CollocationSet {
        interior: Vec::with_capacity((nx - 2) * (ny - 2)),
        wall: Vec::with_capacity(nx + 2 * (ny - 1) - 2),
        lid: Vec::with_capacity(nx),
        reference_point: (0.0, 0.0),
    };
    for j in 0..ny {
        let y = grid_coord(j, ny);
        for i in 0..nx {
            let x = grid_coord(i, nx);
            let pt = (x, y);
            if j == ny - 1 {
                set.lid.push(pt);
            } else if j == 0 || i == 0 || i == nx - 1 {
                set.wall.push(pt);
            } else {
                set.interior.push(pt);
            }
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_grid_counts() {
        let c = make_collocation(50, 50).unwrap();
        assert_eq!((c.lid.len(), c.wall.len(), c.interior.len()), (50, 146, 2304));
        let c = make_collocation(3, 3).unwrap();
        assert_eq!((c.lid.len(), c.wall.len(), c.interior.len()), (3, 5, 1));
        assert_eq!(c.interior[0], (0.5, 0.5));
        assert_eq!(c.reference_point, (0.0, 0.0));
    }

    #[test]
    fn degenerate_grid_rejected() {
        assert!(matches!(make_collocation(2, 10), Err(Error::Config(_))));
    }

    #[test]
    fn partition_covers_grid() {
        for (nx, ny) in [(3, 7), (5, 4), (20, 20), (11, 3)] {
            let c = make_collocation(nx, ny).unwrap();
            assert_eq!(c.len(), nx * ny);
            assert!(c.lid.iter().all(|p| p.1 == 1.0));
            assert!(c.wall.iter().all(|p| p.1 < 1.0 && (p.0 == 0.0 || p.0 == 1.0 || p.1 == 0.0)));
            assert!(c
                .interior
                .iter()
                .all(|p| p.0 > 0.0 && p.0 < 1.0 && p.1 > 0.0 && p.1 < 1.0));
        }
    }
}
