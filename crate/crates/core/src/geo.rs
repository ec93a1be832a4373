// SPDX-License-Identifier: Apache-2.0

//! Grids over a km bounding box, quadtree refinement by point count,
//! empirical attribute distributions, and synthetic check-in populations.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::model::{FiniteSpace, ProbDist};
use crate::rng::SeedStream;

/// Quadtree splitting stops at this depth and raises the warning flag.
pub const MAX_SPLIT_DEPTH: usize = 12;

/// Axis-aligned rectangle in km, closed on all sides.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundingBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BoundingBox {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self> {
        let b = Self {
            min_x,
            min_y,
            max_x,
            max_y,
        };
        b.validate()?;
        Ok(b)
    }

    /// `[0, width] × [0, height]`.
    pub fn sized(width: f64, height: f64) -> Result<Self> {
        Self::new(0.0, 0.0, width, height)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.min_x, self.min_y, self.max_x, self.max_y]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.max_x <= self.min_x || self.max_y <= self.min_y {
            return Err(Error::InvalidGeometry(format!("degenerate box {self:?}")));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.min_x + self.max_x), 0.5 * (self.min_y + self.max_y))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }

    /// NW, NE, SW, SE.
    fn quadrants(&self) -> [BoundingBox; 4] {
        let (cx, cy) = self.center();
        let q = |min_x, min_y, max_x, max_y| BoundingBox {
            min_x,
            min_y,
            max_x,
            max_y,
        };
        [
            q(self.min_x, cy, cx, self.max_y),
            q(cx, cy, self.max_x, self.max_y),
            q(self.min_x, self.min_y, cx, cy),
            q(cx, self.min_y, self.max_x, cy),
        ]
    }

    /// Quadrant index for a point inside the box. Points on a midline go to
    /// the lower-index side, i.e. west and north.
    fn quadrant_of(&self, x: f64, y: f64) -> usize {
        let (cx, cy) = self.center();
        let east = usize::from(x > cx);
        let south = usize::from(y < cy);
        2 * south + east
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Region {
    pub id: usize,
    pub bounds: BoundingBox,
    pub centroid: (f64, f64),
}

impl Region {
    fn from_bounds(id: usize, bounds: BoundingBox) -> Self {
        Self {
            id,
            bounds,
            centroid: bounds.center(),
        }
    }
}

/// `rows × cols` equal cells, row-major, row 0 at `min_y`.
pub fn base_grid(bbox: &BoundingBox, rows: usize, cols: usize) -> Result<Vec<Region>> {
    bbox.validate()?;
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidGeometry(format!(
            "grid needs at least one row and column, got {rows}×{cols}"
        )));
    }
    let dx = bbox.width() / cols as f64;
    let dy = bbox.height() / rows as f64;
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            // Outer edges snap to the box so the tiling is exact.
            let max_x = if c + 1 == cols {
                bbox.max_x
            } else {
                bbox.min_x + (c + 1) as f64 * dx
            };
            let max_y = if r + 1 == rows {
                bbox.max_y
            } else {
                bbox.min_y + (r + 1) as f64 * dy
            };
            let bounds = BoundingBox {
                min_x: bbox.min_x + c as f64 * dx,
                min_y: bbox.min_y + r as f64 * dy,
                max_x,
                max_y,
            };
            out.push(Region::from_bounds(out.len(), bounds));
        }
    }
    Ok(out)
}

/// Index of the first region whose closed bounds contain the point.
pub fn locate(regions: &[Region], x: f64, y: f64) -> Option<usize> {
    regions.iter().position(|r| r.bounds.contains(x, y))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub regions: Vec<Region>,
    /// Set when some cell still exceeded `max_count` at [`MAX_SPLIT_DEPTH`].
    pub depth_limited: bool,
    pub splits: usize,
}

/// Splits every region holding more than `max_count` points into quadrants,
/// recursively. Output ids follow input order, then NW, NE, SW, SE depth-first.
/// Points outside every region are ignored.
pub fn adaptive_partition(regions: &[Region], points: &[(f64, f64)], max_count: usize) -> Result<Partition> {
    if max_count == 0 {
        return Err(crate::error::invalid("max_count", "must be at least 1"));
    }
    let mut buckets: Vec<Vec<(f64, f64)>> = vec![Vec::new(); regions.len()];
    for &(x, y) in points {
        if let Some(i) = locate(regions, x, y) {
            buckets[i].push((x, y));
        }
    }
    let mut out = Partition {
        regions: Vec::new(),
        depth_limited: false,
        splits: 0,
    };
    for (region, bucket) in regions.iter().zip(buckets) {
        split(region.bounds, bucket, max_count, 0, &mut out);
    }
    Ok(out)
}

fn split(bounds: BoundingBox, points: Vec<(f64, f64)>, max_count: usize, depth: usize, out: &mut Partition) {
    if points.len() <= max_count {
        out.regions.push(Region::from_bounds(out.regions.len(), bounds));
        return;
    }
    if depth == MAX_SPLIT_DEPTH {
        out.depth_limited = true;
        out.regions.push(Region::from_bounds(out.regions.len(), bounds));
        return;
    }
    out.splits += 1;
    let mut quads: [Vec<(f64, f64)>; 4] = Default::default();
    for (x, y) in points {
        quads[bounds.quadrant_of(x, y)].push((x, y));
    }
    for (q, pts) in bounds.quadrants().into_iter().zip(quads) {
        split(q, pts, max_count, depth + 1, out);
    }
}

/// Regions as a metric space: Euclidean distance between centroids in km.
pub fn regions_to_space(regions: &[Region]) -> Result<FiniteSpace> {
    if regions.is_empty() {
        return Err(Error::InvalidGeometry("no regions".into()));
    }
    let labels = regions.iter().map(|r| format!("r{}", r.id)).collect();
    let points: Vec<(f64, f64)> = regions.iter().map(|r| r.centroid).collect();
    FiniteSpace::euclidean(labels, &points)
}

/// Indices of regions whose centroid lies in `inner` (the protected inputs).
pub fn inner_indices(regions: &[Region], inner: &BoundingBox) -> Vec<usize> {
    regions
        .iter()
        .enumerate()
        .filter(|(_, r)| inner.contains(r.centroid.0, r.centroid.1))
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckinRecord {
    pub user_id: String,
    pub x_km: f64,
    pub y_km: f64,
    pub attributes: BTreeMap<String, bool>,
    pub timestamp: Option<i64>,
}

/// Region histograms of the records with `attribute = true` and `= false`.
/// Records lacking the attribute or lying outside every region are skipped.
pub fn empirical_attribute_dists(
    records: &[CheckinRecord],
    regions: &[Region],
    space: &Arc<FiniteSpace>,
    attribute: &str,
) -> Result<(ProbDist, ProbDist)> {
    if space.len() != regions.len() {
        return Err(Error::SpaceMismatch("regions vs space"));
    }
    let mut counts = [vec![0.0; regions.len()], vec![0.0; regions.len()]];
    for rec in records {
        let Some(&value) = rec.attributes.get(attribute) else {
            continue;
        };
        if let Some(i) = locate(regions, rec.x_km, rec.y_km) {
            counts[usize::from(!value)][i] += 1.0;
        }
    }
    let side = |c: &[f64], value: bool| {
        if c.iter().sum::<f64>() == 0.0 {
            Err(Error::EmptyAttributeSide {
                attribute: attribute.into(),
                value,
            })
        } else {
            ProbDist::from_weights(space.clone(), c)
        }
    };
    Ok((side(&counts[0], true)?, side(&counts[1], false)?))
}

/// Keeps the mass on `keep` and renormalizes, on the same space.
pub fn restrict(dist: &ProbDist, keep: &[usize]) -> Result<ProbDist> {
    let mut w = vec![0.0; dist.len()];
    for &i in keep {
        dist.space().check_index(i)?;
        w[i] = dist.get(i);
    }
    ProbDist::from_weights(dist.space().clone(), &w)
}

/// Synthetic population profiles. Coordinates in `Bimodal` are fractions of
/// the box (0 to 1 on each axis); `sigma` is a fraction of the shorter side.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "profile", rename_all = "kebab-case", deny_unknown_fields)
)]
pub enum Profile {
    /// Attribute `home`: true records around three residential centers with
    /// σ = 0.08·side; false records spread around the center with σ = 0.3·side.
    HomeOutside,
    /// Attribute `north`: true records centered at 75% height, false records
    /// at 25% height, both at mid width with σ = 0.2·side.
    NorthSouth,
    /// Attribute `a`: true records around `centers[0]`, false around `centers[1]`.
    Bimodal { sigma: f64, centers: [(f64, f64); 2] },
}

/// Fraction of each side's records drawn uniformly over the box.
pub const BACKGROUND_WEIGHT: f64 = 0.1;

const HOME_CENTERS: [(f64, f64); 3] = [(0.25, 0.3), (0.7, 0.25), (0.45, 0.75)];

impl Profile {
    pub fn attribute(&self) -> &'static str {
        match self {
            Self::HomeOutside => "home",
            Self::NorthSouth => "north",
            Self::Bimodal { .. } => "a",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::Bimodal { sigma, centers } = self {
            if !(sigma.is_finite() && *sigma > 0.0) {
                return Err(crate::error::invalid("sigma", "must be finite and positive"));
            }
            let inside = |&(x, y): &(f64, f64)| (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y);
            if !centers.iter().all(inside) {
                return Err(crate::error::invalid("centers", "must lie in [0, 1]²"));
            }
        }
        Ok(())
    }

    /// Gaussian components (relative center, relative σ) for one side.
    fn components(&self, value: bool) -> Vec<((f64, f64), f64)> {
        match (self, value) {
            (Self::HomeOutside, true) => HOME_CENTERS.iter().map(|&c| (c, 0.08)).collect(),
            (Self::HomeOutside, false) => vec![((0.5, 0.5), 0.3)],
            (Self::NorthSouth, true) => vec![((0.5, 0.75), 0.2)],
            (Self::NorthSouth, false) => vec![((0.5, 0.25), 0.2)],
            (Self::Bimodal { sigma, centers }, v) => vec![(centers[usize::from(!v)], *sigma)],
        }
    }
}

/// `n` records, each true or false with probability ½, located by a Gaussian
/// mixture (truncated to the box by rejection) plus a uniform background.
pub fn synth_attribute_population(
    bbox: &BoundingBox,
    profile: Profile,
    n: usize,
    seed: SeedStream,
) -> Result<Vec<CheckinRecord>> {
    bbox.validate()?;
    profile.validate()?;
    if n == 0 {
        return Err(crate::error::invalid("n", "must be at least 1"));
    }
    let side = bbox.width().min(bbox.height());
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mixtures = [profile.components(true), profile.components(false)];
    let attribute = String::from(profile.attribute());
    let mut rng = seed.rng();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let value: bool = rng.random_bool(0.5);
        let (x, y) = if rng.random_bool(BACKGROUND_WEIGHT) {
            (
                rng.random_range(bbox.min_x..=bbox.max_x),
                rng.random_range(bbox.min_y..=bbox.max_y),
            )
        } else {
            let comps = &mixtures[usize::from(!value)];
            let ((cx, cy), s) = comps[rng.random_range(0..comps.len())];
            loop {
                let x = bbox.min_x + cx * bbox.width() + s * side * std_normal.sample(&mut rng);
                let y = bbox.min_y + cy * bbox.height() + s * side * std_normal.sample(&mut rng);
                if bbox.contains(x, y) {
                    break (x, y);
                }
            }
        };
        let mut attributes = BTreeMap::new();
        attributes.insert(attribute.clone(), value);
        out.push(CheckinRecord {
            user_id: format!("u{i}"),
            x_km: x,
            y_km: y,
            attributes,
            timestamp: None,
        });
    }
    Ok(out)
}
