//! Connected-component labeling on the scale grid.

/// Grid adjacency used when joining thresholded cells into regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

fn find_root(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let grand = parent[parent[x as usize] as usize];
        parent[x as usize] = grand;
        x = grand;
    }
    x
}

/// Labels of the `n x n` row-major `mask`. Returns one label per cell
/// (`0` for background, components numbered from 1 in order of their first
/// cell in row-major order) and the size of each component (index 0 unused).
///
/// Two raster passes with union-find over provisional labels.
pub fn label_components(mask: &[bool], n: usize, connectivity: Connectivity) -> (Vec<u32>, Vec<usize>) {
    debug_assert_eq!(mask.len(), n * n);
    let mut labels = vec![0u32; n * n];
    let mut parent: Vec<u32> = vec![0];
    for r in 0..n {
        for c in 0..n {
            let idx = r * n + c;
            if !mask[idx] {
                continue;
            }
            let up = if r > 0 { labels[idx - n] } else { 0 };
            let left = if c > 0 { labels[idx - 1] } else { 0 };
            let (a, b) = match connectivity {
                Connectivity::Four => (up, left),
                // An occupied cell above touches every other earlier
                // neighbor, so those already share its set.
                Connectivity::Eight if up != 0 => (up, 0),
                Connectivity::Eight => {
                    let up_left = if r > 0 && c > 0 { labels[idx - n - 1] } else { 0 };
                    let up_right = if r > 0 && c + 1 < n { labels[idx - n + 1] } else { 0 };
                    (if left != 0 { left } else { up_left }, up_right)
                }
            };
            labels[idx] = match (a, b) {
                (0, 0) => {
                    let fresh = parent.len() as u32;
                    parent.push(fresh);
                    fresh
                }
                (l, 0) | (0, l) => l,
                (a, b) => {
                    let (ra, rb) = (find_root(&mut parent, a), find_root(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb) as usize] = ra.min(rb);
                    }
                    ra.min(rb)
                }
            };
        }
    }
    let mut final_label = vec![0u32; parent.len()];
    let mut sizes = vec![0usize];
    for cell in labels.iter_mut().filter(|l| **l != 0) {
        let root = find_root(&mut parent, *cell) as usize;
        if final_label[root] == 0 {
            final_label[root] = sizes.len() as u32;
            sizes.push(0);
        }
        *cell = final_label[root];
        sizes[*cell as usize] += 1;
    }
    (labels, sizes)
}

/// Union of all components of maximal size, as a cell mask, together with
/// that maximal size.
pub fn largest_region(mask: &[bool], n: usize, connectivity: Connectivity) -> (Vec<bool>, usize) {
    let (labels, sizes) = label_components(mask, n, connectivity);
    let largest = sizes.iter().skip(1).copied().max().unwrap_or(0);
    if largest == 0 {
        return (vec![false; n * n], 0);
    }
    let region = labels
        .iter()
        .map(|&l| l != 0 && sizes[l as usize] == largest)
        .collect();
    (region, largest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(rows: &[&str]) -> (Vec<bool>, usize) {
        let n = rows.len();
        let mask = rows
            .iter()
            .flat_map(|r| r.chars().map(|c| c == '#'))
            .collect();
        (mask, n)
    }

    #[test]
    fn diagonal_touch_depends_on_connectivity() {
        let (mask, n) = grid(&["#..", ".#.", "..#"]);
        let (_, four) = label_components(&mask, n, Connectivity::Four);
        assert_eq!(&four[1..], &[1, 1, 1]);
        let (_, eight) = label_components(&mask, n, Connectivity::Eight);
        assert_eq!(&eight[1..], &[3]);
    }

    #[test]
    fn ties_take_the_union() {
        let (mask, n) = grid(&["##..", "....", "..##", "#..."]);
        let (region, largest) = largest_region(&mask, n, Connectivity::Eight);
        assert_eq!(largest, 2);
        assert_eq!(region.iter().filter(|&&b| b).count(), 4);
        assert!(!region[12]);
    }

    /// Flood fill over all neighbors, numbering components in scan order.
    fn flood_fill(mask: &[bool], n: usize, eight: bool) -> (Vec<u32>, Vec<usize>) {
        let mut labels = vec![0u32; n * n];
        let mut sizes = vec![0usize];
        for start in 0..n * n {
            if !mask[start] || labels[start] != 0 {
                continue;
            }
            let label = sizes.len() as u32;
            let mut stack = vec![start];
            labels[start] = label;
            let mut size = 0;
            while let Some(cell) = stack.pop() {
                size += 1;
                let (r, c) = ((cell / n) as isize, (cell % n) as isize);
                for dr in -1..=1isize {
                    for dc in -1..=1isize {
                        if (dr == 0 && dc == 0) || (!eight && dr != 0 && dc != 0) {
                            continue;
                        }
                        let (nr, nc) = (r + dr, c + dc);
                        if nr < 0 || nc < 0 || nr >= n as isize || nc >= n as isize {
                            continue;
                        }
                        let next = nr as usize * n + nc as usize;
                        if mask[next] && labels[next] == 0 {
                            labels[next] = label;
                            stack.push(next);
                        }
                    }
                }
            }
            sizes.push(size);
        }
        (labels, sizes)
    }

    #[test]
    fn union_find_matches_flood_fill() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for trial in 0..300 {
            let n = rng.random_range(1..25);
            let density = [0.2, 0.45, 0.6, 0.85][trial % 4];
            let mask: Vec<bool> = (0..n * n).map(|_| rng.random_bool(density)).collect();
            for (conn, eight) in [(Connectivity::Four, false), (Connectivity::Eight, true)] {
                assert_eq!(label_components(&mask, n, conn), flood_fill(&mask, n, eight));
            }
        }
    }

    #[test]
    fn u_shape_merges_late() {
        let (mask, n) = grid(&["#.#", "#.#", "###"]);
        let (labels, sizes) = label_components(&mask, n, Connectivity::Four);
        assert_eq!(&sizes[1..], &[7]);
        assert!(labels.iter().zip(&mask).all(|(&l, &m)| (l == 1) == m));
    }

    #[test]
    fn empty_mask() {
        let (region, largest) = largest_region(&[false; 9], 3, Connectivity::Eight);
        assert_eq!(largest, 0);
        assert!(region.iter().all(|&b| !b));
    }
}
