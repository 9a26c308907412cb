//! Seeded synthetic data: random and clustered dictionaries, and a procedural
//! scene that can be rendered as an image, a moving video or a light field.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dictionary::Dictionary;
use crate::seed::rng_for;
use crate::tensor::Tensor;

fn unit_gaussian(rng: &mut impl Rng, dim: usize) -> Vec<f32> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            return v.iter().map(|x| (x / n) as f32).collect();
        }
    }
}

/// `m` independent uniformly distributed unit atoms.
pub fn random_dictionary(dim: usize, m: usize, seed: u64) -> Dictionary {
    let mut rng = rng_for(seed, &[0xa70]);
    let atoms = (0..m).flat_map(|_| unit_gaussian(&mut rng, dim)).collect();
    Dictionary::from_unit_atoms(dim, atoms).expect("unit atoms")
}

/// Atoms scattered around `centers` random directions with relative spread
/// `spread`, the coherent structure typical of learned patch dictionaries.
pub fn clustered_dictionary(
    dim: usize,
    m: usize,
    centers: usize,
    spread: f32,
    seed: u64,
) -> Dictionary {
    let mut rng = rng_for(seed, &[0xc1]);
    let hubs: Vec<Vec<f32>> = (0..centers.max(1))
        .map(|_| unit_gaussian(&mut rng, dim))
        .collect();
    let mut atoms = Vec::with_capacity(dim * m);
    for _ in 0..m {
        let hub = &hubs[rng.random_range(0..hubs.len())];
        let dir = unit_gaussian(&mut rng, dim);
        let v: Vec<f64> = hub
            .iter()
            .zip(&dir)
            .map(|(&h, &e)| h as f64 + spread as f64 * e as f64)
            .collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        atoms.extend(v.iter().map(|x| (x / n) as f32));
    }
    Dictionary::from_unit_atoms(dim, atoms).expect("unit atoms")
}

/// Random query vectors near dictionary atoms: atom plus Gaussian noise of
/// relative size `noise`.
pub fn noisy_atom_queries(d: &Dictionary, count: usize, noise: f32, seed: u64) -> Vec<Vec<f32>> {
    let mut rng = rng_for(seed, &[0x9e]);
    (0..count)
        .map(|_| {
            let i = rng.random_range(0..d.len());
            let e = unit_gaussian(&mut rng, d.dim());
            d.atom(i)
                .iter()
                .zip(&e)
                .map(|(&a, &b)| a + noise * b)
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone)]
enum Shape {
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
}

#[derive(Debug, Clone)]
struct Layer {
    shape: Shape,
    value: f64,
    /// Texture riding on the object: amplitude, frequencies.
    texture: (f64, f64, f64),
    /// Displacement per unit of view/time shift.
    motion: (f64, f64),
}

/// A piecewise-smooth, textured scene defined on continuous coordinates.
#[derive(Debug, Clone)]
pub struct Scene {
    width: f64,
    height: f64,
    gradient: (f64, f64, f64),
    gratings: Vec<(f64, f64, f64, f64)>,
    blobs: Vec<(f64, f64, f64, f64)>,
    layers: Vec<Layer>,
    background_motion: (f64, f64),
}

impl Scene {
    pub fn new(height: usize, width: usize, seed: u64) -> Self {
        let mut rng = rng_for(seed, &[0x5ce]);
        let (w, h) = (width as f64, height as f64);
        let gradient = (
            rng.random_range(0.3..0.6),
            rng.random_range(-0.2..0.2),
            rng.random_range(-0.2..0.2),
        );
        let gratings = (0..2)
            .map(|_| {
                let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
                let freq = rng.random_range(0.15..0.6);
                (
                    rng.random_range(0.03..0.08),
                    freq * angle.cos(),
                    freq * angle.sin(),
                    rng.random_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        let blobs = (0..4)
            .map(|_| {
                (
                    rng.random_range(0.0..w),
                    rng.random_range(0.0..h),
                    rng.random_range(0.08..0.25) * w.min(h),
                    rng.random_range(-0.25..0.25),
                )
            })
            .collect();
        let layers = (0..7)
            .map(|i| {
                let cx = rng.random_range(0.1..0.9) * w;
                let cy = rng.random_range(0.1..0.9) * h;
                let size = rng.random_range(0.06..0.22) * w.min(h);
                let shape = if i % 2 == 0 {
                    Shape::Ellipse {
                        cx,
                        cy,
                        rx: size,
                        ry: size * rng.random_range(0.5..1.5),
                    }
                } else {
                    Shape::Rect {
                        x0: cx - size,
                        y0: cy - size * 0.7,
                        x1: cx + size,
                        y1: cy + size * 0.7,
                    }
                };
                Layer {
                    shape,
                    value: rng.random_range(0.05..0.95),
                    texture: (
                        rng.random_range(0.0..0.12),
                        rng.random_range(0.2..1.2),
                        rng.random_range(0.2..1.2),
                    ),
                    motion: (rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)),
                }
            })
            .collect();
        Self {
            width: w,
            height: h,
            gradient,
            gratings,
            blobs,
            layers,
            background_motion: (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)),
        }
    }

    fn background(&self, x: f64, y: f64) -> f64 {
        let (a, b, c) = self.gradient;
        let mut v = a + b * x / self.width + c * y / self.height;
        for &(amp, fx, fy, ph) in &self.gratings {
            v += amp * (fx * x + fy * y + ph).sin();
        }
        for &(bx, by, r, amp) in &self.blobs {
            let d2 = (x - bx).powi(2) + (y - by).powi(2);
            v += amp * (-d2 / (2.0 * r * r)).exp();
        }
        v
    }

    /// Intensity at `(x, y)` after shifting every layer by `shift` times its motion.
    pub fn sample(&self, x: f64, y: f64, shift: (f64, f64)) -> f32 {
        for l in self.layers.iter().rev() {
            let (px, py) = (x - shift.0 * l.motion.0, y - shift.1 * l.motion.1);
            let inside = match l.shape {
                Shape::Ellipse { cx, cy, rx, ry } => {
                    ((px - cx) / rx).powi(2) + ((py - cy) / ry).powi(2) <= 1.0
                }
                Shape::Rect { x0, y0, x1, y1 } => px >= x0 && px <= x1 && py >= y0 && py <= y1,
            };
            if inside {
                let (amp, fx, fy) = l.texture;
                return (l.value + amp * (fx * px).sin() * (fy * py).cos()).clamp(0.02, 0.98)
                    as f32;
            }
        }
        let (bx, by) = self.background_motion;
        self.background(x - shift.0 * bx, y - shift.1 * by)
            .clamp(0.02, 0.98) as f32
    }
}

/// `[height, width]` grayscale test image with values in `[0, 1]`.
pub fn test_image(height: usize, width: usize, seed: u64) -> Tensor {
    let scene = Scene::new(height, width, seed);
    Tensor::from_fn(vec![height, width], |i| {
        scene.sample(i[1] as f64, i[0] as f64, (0.0, 0.0))
    })
    .expect("finite scene")
}

/// `[frames, height, width]` clip in which every object drifts with its own velocity.
pub fn test_video(frames: usize, height: usize, width: usize, seed: u64) -> Tensor {
    let scene = Scene::new(height, width, seed);
    Tensor::from_fn(vec![frames, height, width], |i| {
        let t = i[0] as f64;
        scene.sample(i[2] as f64, i[1] as f64, (t, t))
    })
    .expect("finite scene")
}

/// `[height, width, views, views]` light field; each layer has its own disparity.
pub fn test_light_field(height: usize, width: usize, views: usize, seed: u64) -> Tensor {
    let scene = Scene::new(height, width, seed);
    let mid = (views as f64 - 1.0) / 2.0;
    Tensor::from_fn(vec![height, width, views, views], |i| {
        let (vy, vx) = (i[2] as f64 - mid, i[3] as f64 - mid);
        scene.sample(i[1] as f64, i[0] as f64, (0.6 * vx, 0.6 * vy))
    })
    .expect("finite scene")
}
