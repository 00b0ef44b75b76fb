//! Symmetric quadrature on the reference triangle `{(xi, eta) : xi, eta >= 0,
//! xi + eta <= 1}`. Weights sum to the reference area 1/2.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub degree: usize,
    /// Reference coordinates `(xi, eta)`.
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no quadrature rule of degree {0} (supported: 1..=5)")]
pub struct UnsupportedDegree(pub usize);

const THIRD: f64 = 1.0 / 3.0;

const D2_POINTS: [[f64; 2]; 3] = [[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]];
const D2_WEIGHTS: [f64; 3] = [1.0 / 6.0; 3];

const D4_A: f64 = 0.445_948_490_915_964_886_318_329_3;
const D4_B: f64 = 0.091_576_213_509_770_743_459_571_46;
const D4_WA: f64 = 0.111_690_794_839_005_732_847_503_5;
const D4_WB: f64 = 0.054_975_871_827_660_933_819_163_16;

/// Six-point rule, exact for degree 4.
pub const D4_POINTS: [[f64; 2]; 6] = [
    [D4_A, D4_A],
    [1.0 - 2.0 * D4_A, D4_A],
    [D4_A, 1.0 - 2.0 * D4_A],
    [D4_B, D4_B],
    [1.0 - 2.0 * D4_B, D4_B],
    [D4_B, 1.0 - 2.0 * D4_B],
];
pub const D4_WEIGHTS: [f64; 6] = [D4_WA, D4_WA, D4_WA, D4_WB, D4_WB, D4_WB];

// (6 -+ sqrt 15) / 21 and (155 -+ sqrt 15) / 2400
const D5_A: f64 = 0.101_286_507_323_456_338_800_987_4;
const D5_B: f64 = 0.470_142_064_105_115_089_770_441_2;
const D5_WA: f64 = 0.062_969_590_272_413_576_297_841_97;
const D5_WB: f64 = 0.066_197_076_394_253_090_368_824_69;

/// Seven-point rule, exact for degree 5.
pub const D5_POINTS: [[f64; 2]; 7] = [
    [THIRD, THIRD],
    [D5_A, D5_A],
    [1.0 - 2.0 * D5_A, D5_A],
    [D5_A, 1.0 - 2.0 * D5_A],
    [D5_B, D5_B],
    [1.0 - 2.0 * D5_B, D5_B],
    [D5_B, 1.0 - 2.0 * D5_B],
];
pub const D5_WEIGHTS: [f64; 7] = [9.0 / 80.0, D5_WA, D5_WA, D5_WA, D5_WB, D5_WB, D5_WB];

/// Returns a rule exact for all bivariate polynomials of total degree at most
/// `degree`. Degree 3 shares the degree-4 rule (the classical 4-point degree-3
/// rule has a negative weight).
pub fn quadrature_rule(degree: usize) -> Result<QuadratureRule, UnsupportedDegree> {
    let (points, weights): (Vec<[f64; 2]>, Vec<f64>) = match degree {
        1 => (vec![[THIRD, THIRD]], vec![0.5]),
        2 => (D2_POINTS.to_vec(), D2_WEIGHTS.to_vec()),
        3 | 4 => (D4_POINTS.to_vec(), D4_WEIGHTS.to_vec()),
        5 => (D5_POINTS.to_vec(), D5_WEIGHTS.to_vec()),
        d => return Err(UnsupportedDegree(d)),
    };
    Ok(QuadratureRule { degree, points, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// Exact integral of `xi^a eta^b` over the reference triangle.
    fn monomial_integral(a: u32, b: u32) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    #[test]
    fn exact_on_monomials() {
        for degree in 1..=5 {
            let rule = quadrature_rule(degree).unwrap();
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    let q: f64 =
                        rule.points.iter().zip(&rule.weights).map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32)).sum();
                    let exact = monomial_integral(a, b);
                    assert!((q - exact).abs() <= 4.0 * f64::EPSILON * exact, "degree {degree}, x^{a} y^{b}: {q} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn weights_sum_to_reference_area() {
        for degree in 1..=5 {
            let rule = quadrature_rule(degree).unwrap();
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 0.5).abs() < 1e-16);
        }
    }

    #[test]
    fn centroid_rule() {
        let rule = quadrature_rule(1).unwrap();
        assert_eq!(rule.points, vec![[THIRD, THIRD]]);
        assert_eq!(rule.weights, vec![0.5]);
    }

    #[test]
    fn x2y_with_degree_five() {
        let rule = quadrature_rule(5).unwrap();
        let q: f64 = rule.points.iter().zip(&rule.weights).map(|(p, w)| w * p[0] * p[0] * p[1]).sum();
        assert!((q - 1.0 / 60.0).abs() < 1e-17);
    }

    #[test]
    fn unsupported_degrees() {
        assert_eq!(quadrature_rule(0), Err(UnsupportedDegree(0)));
        assert_eq!(quadrature_rule(6), Err(UnsupportedDegree(6)));
    }
}
