//! Dense univariate polynomials (ascending coefficients) and their complex
//! roots via companion-matrix eigenvalues.

use nalgebra::DMatrix;

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add_assign(acc: &mut Vec<f64>, p: &[f64]) {
    if acc.len() < p.len() {
        acc.resize(p.len(), 0.0);
    }
    for (a, &c) in acc.iter_mut().zip(p) {
        *a += c;
    }
}

pub fn scale(s: f64, p: &[f64]) -> Vec<f64> {
    p.iter().map(|c| s * c).collect()
}

/// Horner evaluation.
pub fn eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Index of the highest nonzero coefficient, or `None` for the zero polynomial.
pub fn degree(p: &[f64]) -> Option<usize> {
    p.iter().rposition(|&c| c != 0.0)
}

/// All complex roots as `(re, im)` pairs, from the eigenvalues of the
/// companion matrix of the monic-normalised polynomial.
pub fn complex_roots(p: &[f64]) -> Vec<(f64, f64)> {
    let Some(deg) = degree(p) else {
        return Vec::new();
    };
    if deg == 0 {
        return Vec::new();
    }
    let lead = p[deg];
    if deg == 1 {
        return vec![(-p[0] / lead, 0.0)];
    }
    let mut companion = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        companion[(i, deg - 1)] = -p[i] / lead;
    }
    let schur = nalgebra::Schur::try_new(companion, f64::EPSILON, 10_000);
    match schur {
        Some(s) => s.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect(),
        None => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiply_and_eval() {
        // (x - 1)(x + 2) = x² + x - 2
        let p = mul(&[-1.0, 1.0], &[2.0, 1.0]);
        assert_eq!(p, vec![-2.0, 1.0, 1.0]);
        assert_eq!(eval(&p, 3.0), 10.0);
        assert_eq!(degree(&[0.0, 0.0]), None);
        assert_eq!(degree(&[1.0, 2.0, 0.0]), Some(1));
    }

    #[test]
    fn roots_of_known_sextic() {
        let want = [-3.0, -1.5, -0.25, 0.5, 2.0, 4.0];
        let p = want.iter().fold(vec![1.0], |acc, &r| mul(&acc, &[-r, 1.0]));
        let mut got: Vec<f64> = complex_roots(&p)
            .into_iter()
            .inspect(|(_, im)| assert!(im.abs() < 1e-9))
            .map(|(re, _)| re)
            .collect();
        got.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-10, "{g} vs {w}");
        }
    }

    #[test]
    fn complex_pair() {
        // x² + 1
        let roots = complex_roots(&[1.0, 0.0, 1.0]);
        assert_eq!(roots.len(), 2);
        for (re, im) in roots {
            assert!(re.abs() < 1e-14 && (im.abs() - 1.0).abs() < 1e-14);
        }
    }
}
