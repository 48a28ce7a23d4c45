use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::engine::SimWindow;
use super::grid::BucketGrid;
use crate::error::{Error, Result};
use crate::geometry::{NetworkConfig, Point2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessTag {
    Hppp,
    ApConditioned,
    UeThinned,
    Vplp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointPattern {
    pub points: Vec<Point2>,
    pub window: SimWindow,
    pub tag: ProcessTag,
    /// The serving AP `x*` of a conditioned pattern. It is not in `points`
    /// and never interferes.
    pub serving: Option<Point2>,
}

impl PointPattern {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Poisson count with mean `mean`, zero for `mean == 0`.
pub(crate) fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<usize> {
    if mean == 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| Error::invalid(format!("Poisson mean {mean}: {e}")))?;
    let n: f64 = d.sample(rng);
    Ok(n as usize)
}

/// Homogeneous Poisson points of intensity `lambda` in `window`.
pub fn sample_hppp<R: Rng + ?Sized>(lambda: f64, window: &SimWindow, rng: &mut R) -> Result<PointPattern> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("intensity must be >= 0, got {lambda}")));
    }
    let n = poisson_count(lambda * window.area(), rng)?;
    Ok(PointPattern {
        points: (0..n).map(|_| window.sample_point(rng)).collect(),
        window: *window,
        tag: ProcessTag::Hppp,
        serving: None,
    })
}

/// APs given that the nearest one to the origin is `x* = (|x*|, 0)`:
/// Poisson points outside `B(o, |x*|)` plus the flagged AP at `x*`.
pub fn sample_conditioned_aps<R: Rng + ?Sized>(
    norm_xstar: f64,
    config: &NetworkConfig,
    window: &SimWindow,
    rng: &mut R,
) -> Result<PointPattern> {
    if !(norm_xstar >= 0.0) {
        return Err(Error::invalid(format!("|x*| must be >= 0, got {norm_xstar}")));
    }
    if window.center != Point2::ORIGIN || window.radius <= norm_xstar {
        return Err(Error::invalid("conditioned APs need an origin-centered window wider than |x*|"));
    }
    let mut pattern = sample_hppp(config.lambda_a, window, rng)?;
    let hole = norm_xstar * norm_xstar;
    pattern.points.retain(|p| p.norm_sq() >= hole);
    pattern.tag = ProcessTag::ApConditioned;
    pattern.serving = Some(Point2::new(norm_xstar, 0.0));
    Ok(pattern)
}

/// Membership test for the Voronoi cell of `x*` among a set of APs.
/// Boundary points count as inside.
#[derive(Debug, Clone)]
pub struct GuardCell {
    x_star: Point2,
    grid: BucketGrid,
}

impl GuardCell {
    /// `interferers` are the APs other than `x*`.
    pub fn new(x_star: Point2, interferers: &[Point2], window: &SimWindow, lambda_a: f64) -> Self {
        let half = window.radius + window.center.dist(x_star).max(0.0);
        let grid = BucketGrid::new(interferers, window.center, half, 1.0 / lambda_a.sqrt());
        Self { x_star, grid }
    }

    pub fn from_pattern(aps: &PointPattern, lambda_a: f64) -> Result<Self> {
        let x_star = aps
            .serving
            .ok_or_else(|| Error::invalid("guard thinning needs a pattern with a flagged x*"))?;
        Ok(Self::new(x_star, &aps.points, &aps.window, lambda_a))
    }

    pub fn contains(&self, y: Point2) -> bool {
        !self.grid.any_closer(y, y.dist_sq(self.x_star))
    }
}

/// UEs lying outside the guard cell of `aps.serving`.
pub fn thin_ues_by_guard(ues: &PointPattern, aps: &PointPattern, lambda_a: f64) -> Result<PointPattern> {
    let cell = GuardCell::from_pattern(aps, lambda_a)?;
    Ok(PointPattern {
        points: ues.points.iter().copied().filter(|&y| !cell.contains(y)).collect(),
        window: ues.window,
        tag: ProcessTag::UeThinned,
        serving: aps.serving,
    })
}

const VPLP_EDGE_MARGIN: f64 = 3.0;
const VPLP_MAX_TRIES: usize = 1_000_000;

/// One uniform point in each Voronoi cell of `aps` (plus the serving AP,
/// if flagged), skipping the serving cell and cells whose AP is within
/// `3/√λ_a` of the window edge.
pub fn vplp_ues<R: Rng + ?Sized>(aps: &PointPattern, lambda_a: f64, rng: &mut R) -> Result<PointPattern> {
    vplp_ues_with_margin(aps, lambda_a, VPLP_EDGE_MARGIN / lambda_a.sqrt(), rng)
}

/// Each cell lies inside the union of the buckets whose candidate lists
/// name its site, so rejection from that union is uniform on the cell
/// (clipped to the window).
pub(crate) fn vplp_ues_with_margin<R: Rng + ?Sized>(
    aps: &PointPattern,
    lambda_a: f64,
    margin: f64,
    rng: &mut R,
) -> Result<PointPattern> {
    let window = aps.window;
    let mut sites = aps.points.clone();
    let serving = aps.serving.map(|s| {
        sites.push(s);
        sites.len() - 1
    });
    let grid = BucketGrid::new(&sites, window.center, window.radius, 1.0 / lambda_a.sqrt());
    let side = grid.side();
    let mut list_start = Vec::with_capacity(side * side + 1);
    let mut list_sites: Vec<(Point2, u32)> = Vec::new();
    let mut scratch = Vec::new();
    let mut per_site = vec![0u32; sites.len() + 1];
    list_start.push(0u32);
    for key in 0..side * side {
        let (lo, c) = grid.bucket_square(key % side, key / side);
        let dx = (lo.x - window.center.x).max(0.0).max(window.center.x - lo.x - c);
        let dy = (lo.y - window.center.y).max(0.0).max(window.center.y - lo.y - c);
        if dx * dx + dy * dy > window.radius * window.radius {
            list_start.push(list_sites.len() as u32);
            continue;
        }
        grid.bucket_candidates(key % side, key / side, &mut scratch);
        for &(_, id) in &scratch {
            per_site[id as usize + 1] += 1;
        }
        list_sites.extend_from_slice(&scratch);
        list_start.push(list_sites.len() as u32);
    }
    for i in 0..sites.len() {
        per_site[i + 1] += per_site[i];
    }
    let mut fill = per_site.clone();
    let mut site_buckets = vec![0u32; list_sites.len()];
    for key in 0..side * side {
        for &(_, id) in &list_sites[list_start[key] as usize..list_start[key + 1] as usize] {
            site_buckets[fill[id as usize] as usize] = key as u32;
            fill[id as usize] += 1;
        }
    }
    let inner = window.radius - margin;
    let mut points = Vec::with_capacity(sites.len());
    for (j, &site) in sites.iter().enumerate() {
        if Some(j) == serving || site.dist(window.center) > inner {
            continue;
        }
        let buckets = &site_buckets[per_site[j] as usize..per_site[j + 1] as usize];
        let mut found = None;
        for _ in 0..VPLP_MAX_TRIES {
            let key = buckets[rng.random_range(0..buckets.len())] as usize;
            let (lo, c) = grid.bucket_square(key % side, key / side);
            let p = Point2::new(lo.x + c * rng.random::<f64>(), lo.y + c * rng.random::<f64>());
            if !window.contains(p) {
                continue;
            }
            let mut best = (u32::MAX, f64::INFINITY);
            for &(q, id) in &list_sites[list_start[key] as usize..list_start[key + 1] as usize] {
                let d = q.dist_sq(p);
                if d < best.1 || (d == best.1 && id < best.0) {
                    best = (id, d);
                }
            }
            if best.0 as usize == j {
                found = Some(p);
                break;
            }
        }
        points.push(found.ok_or_else(|| Error::invalid("could not place a point in a Voronoi cell"))?);
    }
    Ok(PointPattern {
        points,
        window,
        tag: ProcessTag::Vplp,
        serving: aps.serving,
    })
}

/// Unconditioned Poisson APs and one UE per cell.
pub fn sample_vplp<R: Rng + ?Sized>(
    config: &NetworkConfig,
    window: &SimWindow,
    rng: &mut R,
) -> Result<(PointPattern, PointPattern)> {
    let aps = sample_hppp(config.lambda_a, window, rng)?;
    let ues = vplp_ues(&aps, config.lambda_a, rng)?;
    Ok((aps, ues))
}
