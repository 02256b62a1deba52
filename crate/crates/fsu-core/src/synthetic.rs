//! Synthetic cloud generators for tests, benchmarks, and sweep sanity runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::{Point3, PointCloud, Rgb};

/// Uniform random points in the unit cube, optionally with random colors.
pub fn random_cloud(n: usize, seed: u64, colored: bool) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions: Vec<Point3> = (0..n).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
    let colors = colored.then(|| (0..n).map(|_| rng.gen::<Rgb>()).collect());
    PointCloud::new(positions, colors).unwrap()
}

/// Random samples of a sphere with radial noise. Colors, when requested,
/// follow a smooth angular pattern.
pub fn sphere_cloud(
    n: usize,
    center: Point3,
    radius: f64,
    radial_noise: f64,
    seed: u64,
    colored: bool,
) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = Vec::with_capacity(n);
    let mut colors = colored.then(|| Vec::with_capacity(n));
    for _ in 0..n {
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let s = (1.0 - z * z).sqrt();
        let dir = [s * phi.cos(), s * phi.sin(), z];
        let r = radius + rng.gen_range(-radial_noise..=radial_noise);
        positions.push([
            center[0] + r * dir[0],
            center[1] + r * dir[1],
            center[2] + r * dir[2],
        ]);
        if let Some(out) = colors.as_mut() {
            let red = (127.5 * (1.0 + dir[0])) as u8;
            let green = (127.5 * (1.0 + dir[1])) as u8;
            let blue = (127.5 * (1.0 + dir[2])) as u8;
            out.push([red, green, blue]);
        }
    }
    PointCloud::new(positions, colors).unwrap()
}

/// Regular grid on the z = 0.5 plane with linear color gradients: red along
/// x, green along y, blue along the opposite x direction.
pub fn plane_gradient_cloud(side: usize) -> PointCloud {
    let mut positions = Vec::with_capacity(side * side);
    let mut colors = Vec::with_capacity(side * side);
    let step = 1.0 / (side.max(2) - 1) as f64;
    for i in 0..side {
        for j in 0..side {
            let x = i as f64 * step;
            let y = j as f64 * step;
            positions.push([x, y, 0.5]);
            colors.push([
                (255.0 * x).round().clamp(0.0, 255.0) as u8,
                (255.0 * y).round().clamp(0.0, 255.0) as u8,
                (255.0 * (1.0 - x)).round().clamp(0.0, 255.0) as u8,
            ]);
        }
    }
    PointCloud::new(positions, Some(colors)).unwrap()
}
