//! Zhang–Suen thinning, spur pruning and crack-length measurement.

use std::collections::BinaryHeap;
use std::path::Path;

use thiserror::Error;

use super::raster::{ContourRaster, RasterError};

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Error)]
pub enum SkeletonError {
    #[error("empty foreground")]
    EmptyForeground,
    #[error("skeleton vanished during thinning")]
    Degenerate,
    #[error("mouth edge {0:?} does not reach the skeleton (gap {1:.1} px)")]
    MouthNotReached(MouthEdge, f64),
}

/// Binary image with the same georeferencing as [`ContourRaster`].
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryGrid {
    pub width: usize,
    pub height: usize,
    pub scale: f64,
    pub origin: (f64, f64),
    pub data: Vec<bool>,
}

impl BinaryGrid {
    pub fn new(width: usize, height: usize) -> Self {
        BinaryGrid {
            width,
            height,
            scale: 1.0,
            origin: (0.0, 0.0),
            data: vec![false; width * height],
        }
    }

    pub fn with_georef(width: usize, height: usize, scale: f64, origin: (f64, f64)) -> Self {
        BinaryGrid {
            scale,
            origin,
            ..BinaryGrid::new(width, height)
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn get_i(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            false
        } else {
            self.data[y as usize * self.width + x as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height)
            .flat_map(move |y| (0..self.width).map(move |x| (x, y)))
            .filter(move |&(x, y)| self.get(x, y))
    }

    pub fn pixel_center(&self, x: usize, y: usize) -> (f64, f64) {
        (
            self.origin.0 + (x as f64 + 0.5) * self.scale,
            self.origin.1 + (y as f64 + 0.5) * self.scale,
        )
    }
}

/// Which image edge the crack mouth sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MouthEdge {
    Left,
    Right,
    Bottom,
    Top,
}

impl MouthEdge {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "left" => Some(MouthEdge::Left),
            "right" => Some(MouthEdge::Right),
            "bottom" => Some(MouthEdge::Bottom),
            "top" => Some(MouthEdge::Top),
            _ => None,
        }
    }

    /// Pixel distance from a pixel to this edge.
    fn distance(&self, x: usize, y: usize, grid: &BinaryGrid) -> f64 {
        match self {
            MouthEdge::Left => x as f64 + 0.5,
            MouthEdge::Right => grid.width as f64 - x as f64 - 0.5,
            MouthEdge::Bottom => y as f64 + 0.5,
            MouthEdge::Top => grid.height as f64 - y as f64 - 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SkeletonParams {
    /// Branches shorter than this many pixels are pruned as spurs.
    pub prune_len: usize,
    /// Cap on the end-extension walk through the original foreground.
    pub max_end_extension: usize,
}

impl Default for SkeletonParams {
    fn default() -> Self {
        SkeletonParams {
            prune_len: 5,
            max_end_extension: 15,
        }
    }
}

/// Thinned crack geometry.
#[derive(Debug, Clone)]
pub struct CrackSkeleton {
    /// The 1-px-wide skeleton.
    pub grid: BinaryGrid,
    /// Longest geodesic path through the skeleton, ordered end to end.
    pub path: Vec<(usize, usize)>,
    /// Geodesic length of `path` in pixels (1 per orthogonal step, √2 per
    /// diagonal step).
    pub path_px: f64,
    /// Extension beyond each path end through the pre-thinning foreground,
    /// in pixels. Thinning erodes blob ends by about half the local width;
    /// these recover the true extent.
    pub end_extension_px: (f64, f64),
    /// Number of connected foreground components seen before selection.
    /// More than one means the longest component was used.
    pub component_count: usize,
}

impl CrackSkeleton {
    /// Measured length including both end extensions, in physical units.
    pub fn length(&self) -> f64 {
        (self.path_px + self.end_extension_px.0 + self.end_extension_px.1) * self.grid.scale
    }

    /// Write a grayscale overlay: foreground skeleton at 255 over the
    /// source raster dimmed to 0..=96.
    pub fn save_overlay(&self, source: &ContourRaster, path: &Path) -> Result<(), RasterError> {
        let mut img = ContourRaster::new(
            self.grid.width,
            self.grid.height,
            self.grid.scale,
            self.grid.origin,
        );
        for y in 0..self.grid.height.min(source.height) {
            for x in 0..self.grid.width.min(source.width) {
                img.set(x, y, source.get(x, y) / 3 + source.get(x, y) % 3);
            }
        }
        for (x, y) in self.grid.iter_set() {
            img.set(x, y, 255);
        }
        img.save(path)
    }
}

const NEIGHBORS8: [(i64, i64); 8] = [
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
];

fn neighbor_count(grid: &BinaryGrid, x: usize, y: usize) -> usize {
    NEIGHBORS8
        .iter()
        .filter(|(dx, dy)| grid.get_i(x as i64 + dx, y as i64 + dy))
        .count()
}

/// P2..P9 clockwise from north, in image coordinates where "north" is +y.
fn ring(grid: &BinaryGrid, x: i64, y: i64) -> [bool; 8] {
    [
        grid.get_i(x, y + 1),
        grid.get_i(x + 1, y + 1),
        grid.get_i(x + 1, y),
        grid.get_i(x + 1, y - 1),
        grid.get_i(x, y - 1),
        grid.get_i(x - 1, y - 1),
        grid.get_i(x - 1, y),
        grid.get_i(x - 1, y + 1),
    ]
}

fn zhang_suen(grid: &mut BinaryGrid) {
    let mut to_delete: Vec<(usize, usize)> = Vec::new();
    loop {
        let mut changed = false;
        for phase in 0..2 {
            to_delete.clear();
            for (x, y) in grid.iter_set() {
                let n = ring(grid, x as i64, y as i64);
                let b = n.iter().filter(|&&v| v).count();
                if !(2..=6).contains(&b) {
                    continue;
                }
                let a = (0..8).filter(|&i| !n[i] && n[(i + 1) % 8]).count();
                if a != 1 {
                    continue;
                }
                let ok = if phase == 0 {
                    (!n[0] || !n[2] || !n[4]) && (!n[2] || !n[4] || !n[6])
                } else {
                    (!n[0] || !n[2] || !n[6]) && (!n[0] || !n[4] || !n[6])
                };
                if ok {
                    to_delete.push((x, y));
                }
            }
            for &(x, y) in &to_delete {
                grid.set(x, y, false);
            }
            changed |= !to_delete.is_empty();
        }
        if !changed {
            break;
        }
    }
}

/// Remove spur branches shorter than `prune_len` that end at a junction.
fn prune_spurs(grid: &mut BinaryGrid, prune_len: usize) {
    loop {
        let endpoints: Vec<(usize, usize)> = grid
            .iter_set()
            .filter(|&(x, y)| neighbor_count(grid, x, y) == 1)
            .collect();
        let mut removed_any = false;
        for (ex, ey) in endpoints {
            if !grid.get(ex, ey) || neighbor_count(grid, ex, ey) != 1 {
                continue;
            }
            let mut branch = vec![(ex, ey)];
            let mut prev = (ex as i64, ey as i64);
            let mut cur = prev;
            'walk: while branch.len() < prune_len {
                let deg = neighbor_count(grid, cur.0 as usize, cur.1 as usize);
                if deg > 2 {
                    // reached a junction: everything before it is a spur
                    branch.pop();
                    for &(x, y) in &branch {
                        grid.set(x, y, false);
                    }
                    removed_any = !branch.is_empty() || removed_any;
                    break 'walk;
                }
                let mut next = None;
                for (dx, dy) in NEIGHBORS8 {
                    let nx = cur.0 + dx;
                    let ny = cur.1 + dy;
                    if (nx, ny) != prev && grid.get_i(nx, ny) {
                        next = Some((nx, ny));
                        break;
                    }
                }
                match next {
                    Some(n) => {
                        prev = cur;
                        cur = n;
                        branch.push((cur.0 as usize, cur.1 as usize));
                    }
                    None => break 'walk, // free-standing segment, keep it
                }
            }
        }
        if !removed_any {
            break;
        }
    }
}

/// Dijkstra over skeleton pixels with 8-connectivity; returns distance map
/// and predecessor map.
fn geodesic(
    grid: &BinaryGrid,
    start: (usize, usize),
) -> (Vec<f64>, Vec<Option<(usize, usize)>>) {
    let n = grid.width * grid.height;
    let mut dist = vec![f64::INFINITY; n];
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
    let at = |x: usize, y: usize| y * grid.width + x;
    // max-heap on negated distance
    let mut heap: BinaryHeap<(std::cmp::Reverse<ordered_float_bits>, usize, usize)> =
        BinaryHeap::new();
    dist[at(start.0, start.1)] = 0.0;
    heap.push((std::cmp::Reverse(ordered_float_bits::from(0.0)), start.0, start.1));
    while let Some((std::cmp::Reverse(d), x, y)) = heap.pop() {
        let d: f64 = d.into();
        if d > dist[at(x, y)] {
            continue;
        }
        for (dx, dy) in NEIGHBORS8 {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if !grid.get_i(nx, ny) {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            let step = if dx != 0 && dy != 0 { SQRT2 } else { 1.0 };
            let nd = d + step;
            if nd < dist[at(nx, ny)] {
                dist[at(nx, ny)] = nd;
                prev[at(nx, ny)] = Some((x, y));
                heap.push((std::cmp::Reverse(ordered_float_bits::from(nd)), nx, ny));
            }
        }
    }
    (dist, prev)
}

/// Total-ordered f64 bits for use in the Dijkstra heap. Only finite
/// non-negative distances are stored.
#[allow(non_camel_case_types)]
#[derive(PartialEq, Eq, PartialOrd, Ord, Clone, Copy)]
struct ordered_float_bits(u64);

impl From<f64> for ordered_float_bits {
    fn from(v: f64) -> Self {
        ordered_float_bits(v.to_bits())
    }
}

impl From<ordered_float_bits> for f64 {
    fn from(v: ordered_float_bits) -> f64 {
        f64::from_bits(v.0)
    }
}

fn components(grid: &BinaryGrid) -> Vec<Vec<(usize, usize)>> {
    let mut seen = vec![false; grid.width * grid.height];
    let at = |x: usize, y: usize| y * grid.width + x;
    let mut comps = Vec::new();
    for (x, y) in grid.iter_set() {
        if seen[at(x, y)] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![(x, y)];
        seen[at(x, y)] = true;
        while let Some((cx, cy)) = stack.pop() {
            comp.push((cx, cy));
            for (dx, dy) in NEIGHBORS8 {
                let nx = cx as i64 + dx;
                let ny = cy as i64 + dy;
                if grid.get_i(nx, ny) && !seen[at(nx as usize, ny as usize)] {
                    seen[at(nx as usize, ny as usize)] = true;
                    stack.push((nx as usize, ny as usize));
                }
            }
        }
        comps.push(comp);
    }
    comps
}

/// How far the original foreground continues past a path end, walking in
/// the direction the path ends with.
fn end_extension(
    foreground: &BinaryGrid,
    path: &[(usize, usize)],
    from_start: bool,
    cap: usize,
) -> f64 {
    if path.len() < 2 {
        return 0.0;
    }
    let (end, inner) = if from_start {
        (path[0], path[(path.len() - 1).min(3)])
    } else {
        (path[path.len() - 1], path[path.len() - 1 - (path.len() - 1).min(3)])
    };
    let dir = (
        (end.0 as i64 - inner.0 as i64).signum(),
        (end.1 as i64 - inner.1 as i64).signum(),
    );
    if dir == (0, 0) {
        return 0.0;
    }
    let step = if dir.0 != 0 && dir.1 != 0 { SQRT2 } else { 1.0 };
    let mut x = end.0 as i64;
    let mut y = end.1 as i64;
    let mut ext = 0.0;
    for _ in 0..cap {
        x += dir.0;
        y += dir.1;
        if !foreground.get_i(x, y) {
            break;
        }
        ext += step;
    }
    ext
}

/// Thin a binary grid to a one-pixel skeleton and extract the longest
/// geodesic path through it.
///
/// Disconnected foregrounds are reduced to the largest connected component;
/// `component_count` on the result reports how many there were.
pub fn skeletonize(
    binary: &BinaryGrid,
    params: SkeletonParams,
) -> Result<CrackSkeleton, SkeletonError> {
    if binary.iter_set().next().is_none() {
        return Err(SkeletonError::EmptyForeground);
    }
    // pick the dominant component on the raw foreground, not the thinned
    // one: thinning collapses compact blobs to a handful of pixels, and a
    // stray speck could otherwise outlive the actual crack
    let comps = components(binary);
    if comps.is_empty() {
        return Err(SkeletonError::Degenerate);
    }
    let component_count = comps.len();
    let dominant = comps
        .into_iter()
        .max_by_key(|c| c.len())
        .expect("nonempty");
    let mut grid = BinaryGrid::with_georef(binary.width, binary.height, binary.scale, binary.origin);
    for &(x, y) in &dominant {
        grid.set(x, y, true);
    }
    zhang_suen(&mut grid);
    prune_spurs(&mut grid, params.prune_len);
    let largest: Vec<(usize, usize)> = grid.iter_set().collect();
    if largest.is_empty() {
        return Err(SkeletonError::Degenerate);
    }

    // diameter of the component by double Dijkstra
    let seed = largest[0];
    let (dist, _) = geodesic(&grid, seed);
    let at = |&(x, y): &(usize, usize)| y * grid.width + x;
    let u = *largest
        .iter()
        .max_by(|a, b| dist[at(a)].partial_cmp(&dist[at(b)]).unwrap())
        .unwrap();
    let (dist_u, prev_u) = geodesic(&grid, u);
    let v = *largest
        .iter()
        .max_by(|a, b| dist_u[at(a)].partial_cmp(&dist_u[at(b)]).unwrap())
        .unwrap();
    let mut path = vec![v];
    let mut cur = v;
    while let Some(p) = prev_u[at(&cur)] {
        path.push(p);
        cur = p;
    }
    path.reverse(); // now runs u -> v
    let path_px = dist_u[at(&v)];

    let ext_start = end_extension(binary, &path, true, params.max_end_extension);
    let ext_end = end_extension(binary, &path, false, params.max_end_extension);

    Ok(CrackSkeleton {
        grid,
        path,
        path_px,
        end_extension_px: (ext_start, ext_end),
        component_count,
    })
}

/// Measure the crack from its mouth edge: geodesic path length plus the
/// tip-side foreground extension plus the gap between the mouth-side path
/// end and the mouth edge. Returns (length in physical units, tip position).
/// Reach of the mouth-side foreground component: the distance from the
/// mouth edge to its farthest pixel, in physical units, plus that pixel's
/// position.
///
/// Works on the component whose pixels come closest to the mouth, so
/// detached damage blobs ahead of the tip are ignored, and it needs no
/// skeleton, so it stays usable on shapes the thinning pass collapses.
/// It cannot follow a crack that turns back on itself; for that, use the
/// skeleton path.
pub fn mask_extent(
    grid: &BinaryGrid,
    mouth: MouthEdge,
) -> Result<(f64, (f64, f64)), SkeletonError> {
    let comps = components(grid);
    let near = |c: &Vec<(usize, usize)>| {
        c.iter()
            .map(|&(x, y)| mouth.distance(x, y, grid))
            .fold(f64::INFINITY, f64::min)
    };
    let mouth_comp = comps
        .into_iter()
        .min_by(|a, b| near(a).partial_cmp(&near(b)).unwrap())
        .ok_or(SkeletonError::EmptyForeground)?;
    let far = *mouth_comp
        .iter()
        .max_by(|&&(ax, ay), &&(bx, by)| {
            mouth
                .distance(ax, ay, grid)
                .partial_cmp(&mouth.distance(bx, by, grid))
                .unwrap()
        })
        .expect("nonempty component");
    let length = mouth.distance(far.0, far.1, grid) * grid.scale;
    Ok((length, grid.pixel_center(far.0, far.1)))
}

pub fn crack_length(
    skeleton: &CrackSkeleton,
    mouth: MouthEdge,
) -> Result<(f64, (f64, f64)), SkeletonError> {
    if skeleton.path.is_empty() {
        return Err(SkeletonError::EmptyForeground);
    }
    let grid = &skeleton.grid;
    let start = skeleton.path[0];
    let end = skeleton.path[skeleton.path.len() - 1];
    let d_start = mouth.distance(start.0, start.1, grid);
    let d_end = mouth.distance(end.0, end.1, grid);
    let (mouth_px, tip_px, tip_ext, mouth_gap) = if d_start <= d_end {
        (start, end, skeleton.end_extension_px.1, d_start)
    } else {
        (end, start, skeleton.end_extension_px.0, d_end)
    };
    let max_dim = grid.width.max(grid.height) as f64;
    if mouth_gap > 0.3 * max_dim {
        return Err(SkeletonError::MouthNotReached(mouth, mouth_gap));
    }
    let _ = mouth_px;
    let length = (skeleton.path_px + tip_ext + mouth_gap) * grid.scale;
    // tip position: path end pushed along the end direction by its extension
    let tip_center = grid.pixel_center(tip_px.0, tip_px.1);
    let inner = if tip_px == end {
        skeleton.path[skeleton.path.len() - 1 - (skeleton.path.len() - 1).min(3)]
    } else {
        skeleton.path[(skeleton.path.len() - 1).min(3)]
    };
    let dir = (
        (tip_px.0 as i64 - inner.0 as i64).signum() as f64,
        (tip_px.1 as i64 - inner.1 as i64).signum() as f64,
    );
    let norm = (dir.0 * dir.0 + dir.1 * dir.1).sqrt().max(1.0);
    let tip = (
        tip_center.0 + dir.0 / norm * tip_ext * grid.scale,
        tip_center.1 + dir.1 / norm * tip_ext * grid.scale,
    );
    Ok((length, tip))
}
