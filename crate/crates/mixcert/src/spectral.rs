//! Power iteration for the sweep-cut vertex ordering.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;

/// Second eigenvector of the walk matrix in the Fiedler sense, computed by
/// power iteration on the lazy matrix (I + A/D)/2 with the uniform vector
/// deflated out. The lazy shift keeps the dominant remaining eigenvalue
/// nonnegative, so near-bipartite graphs cannot lock the iteration onto the
/// eigenvalue near -1.
pub fn second_eigenvector(g: &Graph, tol: f64, max_iter: usize) -> Vec<f64> {
    let n = g.n();
    let d = g.regular_degree().expect("sweep ordering needs a regular graph") as f64;
    if n == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xF1ED);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    deflate_and_normalize(&mut x);
    let mut y = vec![0.0; n];
    for _ in 0..max_iter {
        for (u, slot) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &w in g.neighbors(u) {
                acc += x[w as usize];
            }
            *slot = 0.5 * (x[u] + acc / d);
        }
        deflate_and_normalize(&mut y);
        let diff: f64 = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        std::mem::swap(&mut x, &mut y);
        if diff < tol {
            break;
        }
    }
    x
}

fn deflate_and_normalize(x: &mut [f64]) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    for v in x.iter_mut() {
        *v -= mean;
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 1e-300 {
        for v in x.iter_mut() {
            *v /= norm;
        }
    } else {
        // Deflation annihilated the vector (complete graph); any balanced
        // vector is a valid second eigenvector.
        for (i, v) in x.iter_mut().enumerate() {
            *v = if i % 2 == 0 { 1.0 } else { -1.0 };
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in x.iter_mut() {
            *v /= norm;
        }
    }
}

/// Vertex order sorted by eigenvector coordinate, ties by label.
pub fn sweep_order(g: &Graph, tol: f64, max_iter: usize) -> Vec<u32> {
    let vec = second_eigenvector(g, tol, max_iter);
    let mut order: Vec<u32> = (0..g.n() as u32).collect();
    order.sort_by(|&a, &b| {
        vec[a as usize]
            .partial_cmp(&vec[b as usize])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}
