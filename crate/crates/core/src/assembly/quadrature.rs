/// Symmetric quadrature on triangles in barycentric coordinates.
///
/// Weights are normalized to sum to 1, so ∫_K g ≈ |K| Σ w_q g(x_q).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: u32,
}

impl QuadratureRule {
    /// Edge-midpoint rule, exact for degree 2.
    pub fn midpoint() -> Self {
        QuadratureRule {
            points: vec![[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]],
            weights: vec![1.0 / 3.0; 3],
            degree: 2,
        }
    }

    /// Dunavant 6-point rule, exact for degree 4.
    pub fn dunavant4() -> Self {
        let mut rule = QuadratureRule { points: Vec::new(), weights: Vec::new(), degree: 4 };
        rule.push_orbit3(0.108_103_018_168_070, 0.445_948_490_915_965, 0.223_381_589_678_011);
        rule.push_orbit3(0.816_847_572_980_459, 0.091_576_213_509_771, 0.109_951_743_655_322);
        rule
    }

    /// Dunavant 12-point rule, exact for degree 6.
    pub fn dunavant6() -> Self {
        let mut rule = QuadratureRule { points: Vec::new(), weights: Vec::new(), degree: 6 };
        rule.push_orbit3(0.501_426_509_658_179, 0.249_286_745_170_910, 0.116_786_275_726_379);
        rule.push_orbit3(0.873_821_971_016_996, 0.063_089_014_491_502, 0.050_844_906_370_207);
        rule.push_orbit6(
            0.053_145_049_844_817,
            0.310_352_451_033_784,
            0.636_502_499_121_399,
            0.082_851_075_618_374,
        );
        rule
    }

    /// Lowest-cost rule of at least the requested degree (up to 6).
    pub fn of_degree(degree: u32) -> Option<Self> {
        match degree {
            0..=2 => Some(Self::midpoint()),
            3..=4 => Some(Self::dunavant4()),
            5..=6 => Some(Self::dunavant6()),
            _ => None,
        }
    }

    fn push_orbit3(&mut self, a: f64, b: f64, w: f64) {
        for p in [[a, b, b], [b, a, b], [b, b, a]] {
            self.points.push(p);
            self.weights.push(w);
        }
    }

    fn push_orbit6(&mut self, a: f64, b: f64, c: f64, w: f64) {
        for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            self.points.push(p);
            self.weights.push(w);
        }
    }

    /// Physical quadrature points of a triangle.
    pub fn map_points(&self, coords: &[[f64; 2]; 3]) -> impl Iterator<Item = ([f64; 2], &[f64; 3], f64)> + '_ {
        let coords = *coords;
        self.points.iter().zip(&self.weights).map(move |(bary, &w)| {
            let x = bary[0] * coords[0][0] + bary[1] * coords[1][0] + bary[2] * coords[2][0];
            let y = bary[0] * coords[0][1] + bary[1] * coords[1][1] + bary[2] * coords[2][1];
            ([x, y], bary, w)
        })
    }
}
