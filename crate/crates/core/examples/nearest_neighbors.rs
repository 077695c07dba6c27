//! Build a KD-tree over a large cloud and run radius and nearest-neighbor
//! queries, checking a few against a linear scan.
//!
//! cargo run --release --example nearest_neighbors

use std::time::Instant;

use graspkit::geometry::{PointCloud, Vec3};
use graspkit::spatial::{squared_distance, KdTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> graspkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts: Vec<Vec3> = (0..100_000)
        .map(|_| Vec3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>() * 0.3))
        .collect();
    let cloud = PointCloud::new(pts)?;

    let t = Instant::now();
    let tree = KdTree::build(&cloud)?;
    println!("built tree over {} points in {:?} (depth {})", tree.len(), t.elapsed(), tree.depth());

    let t = Instant::now();
    let mut hits = 0;
    for _ in 0..10_000 {
        let q = Vec3::new(rng.random(), rng.random(), rng.random::<f64>() * 0.3);
        hits += tree.radius_query(&q, 0.02).len();
    }
    println!("10k radius queries (r = 2 cm): {hits} hits in {:?}", t.elapsed());

    for _ in 0..3 {
        let q = Vec3::new(rng.random(), rng.random(), rng.random());
        let (i, d) = tree.nearest(&q);
        let brute = cloud
            .points()
            .iter()
            .enumerate()
            .min_by(|a, b| squared_distance(a.1, &q).total_cmp(&squared_distance(b.1, &q)).then(a.0.cmp(&b.0)))
            .map(|(j, _)| j)
            .unwrap();
        println!("nearest to [{:.3} {:.3} {:.3}]: #{i} at {d:.5} m (linear scan: #{brute})", q.x, q.y, q.z);
    }
    Ok(())
}
