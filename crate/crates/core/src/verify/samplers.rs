//! Shared deterministic samplers for the suites.

use num_complex::Complex64;
use rand::Rng;

use crate::heisenberg::{HeisElement, HeisModel};
use crate::point::{ExtendedPoint, Quadruple};
use crate::rng::SeededRng;

pub fn euclid_point(rng: &mut SeededRng, dim: usize, scale: f64) -> ExtendedPoint {
    ExtendedPoint::Finite {
        coords: (0..dim).map(|_| rng.random_range(-scale..scale)).collect(),
    }
}

pub fn heis_elem(rng: &mut SeededRng, base_dim: usize, scale: f64) -> HeisElement {
    HeisElement {
        z: (0..base_dim)
            .map(|_| {
                Complex64::new(
                    rng.random_range(-scale..scale),
                    rng.random_range(-scale..scale),
                )
            })
            .collect(),
        h: rng.random_range(-scale..scale),
    }
}

pub fn heis_point(rng: &mut SeededRng, model: &HeisModel, scale: f64) -> ExtendedPoint {
    heis_elem(rng, model.base_complex_dim(), scale).to_point()
}

/// Admissible quadruple of finite points.
pub fn quadruple_of(
    rng: &mut SeededRng,
    mut sample: impl FnMut(&mut SeededRng) -> ExtendedPoint,
) -> Quadruple {
    loop {
        let q = Quadruple([
            sample(rng),
            sample(rng),
            sample(rng),
            sample(rng),
        ]);
        if q.is_admissible() {
            return q;
        }
    }
}

/// Unit direction in R^dim.
pub fn unit_dir(rng: &mut SeededRng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = crate::vecn::norm(&v);
        if n > 0.1 {
            return crate::vecn::scale(&v, 1.0 / n);
        }
    }
}

/// A random 2x2 unitary matrix (for base rotations with k = 3), or the
/// 1x1 phase for k = 2.
pub fn random_unitary(rng: &mut SeededRng, m: usize) -> Vec<Vec<Complex64>> {
    if m == 1 {
        let t = rng.random_range(0.0..std::f64::consts::TAU);
        return vec![vec![Complex64::from_polar(1.0, t)]];
    }
    // Gram-Schmidt on random complex columns.
    let mut cols: Vec<Vec<Complex64>> = Vec::new();
    while cols.len() < m {
        let v: Vec<Complex64> = (0..m)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let mut w = v;
        for c in &cols {
            let ip: Complex64 = w.iter().zip(c).map(|(a, b)| a * b.conj()).sum();
            for i in 0..m {
                w[i] -= ip * c[i];
            }
        }
        let n: f64 = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-3 {
            for x in &mut w {
                *x /= n;
            }
            cols.push(w);
        }
    }
    // Rows of the matrix are the conjugated columns so that U columns are
    // the produced orthonormal set.
    (0..m)
        .map(|i| (0..m).map(|j| cols[j][i]).collect())
        .collect()
}
