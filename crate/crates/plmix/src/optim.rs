//! Local minimization over products of probability simplexes.
//!
//! The estimator's stage-2 search runs in an unconstrained space: each
//! simplex block (mixing weights, one weight vector per component) is
//! parameterized by a normalized exponential with its last logit pinned to
//! zero, and a small floor is mixed in so decoded points stay strictly
//! inside the simplex. Minimization uses Nelder-Mead with the
//! dimension-adaptive coefficients of Gao and Han, which behave better than
//! the classic constants as the dimension grows.

/// Maps unconstrained vectors onto a product of probability simplexes.
#[derive(Debug, Clone)]
pub struct SimplexBlocks {
    sizes: Vec<usize>,
    epsilon: f64,
}

/// Logits are clamped to this magnitude before exponentiation; softmax is
/// saturated far earlier, so the clamp only guards against overflow.
const LOGIT_CLAMP: f64 = 40.0;

impl SimplexBlocks {
    /// Blocks of the given sizes with floor `epsilon` mixed into each
    /// decoded point. Requires `size * epsilon < 1` for every block.
    pub fn new(sizes: Vec<usize>, epsilon: f64) -> Self {
        assert!(epsilon >= 0.0);
        assert!(
            sizes.iter().all(|&s| s >= 1 && (s as f64) * epsilon < 1.0),
            "floor too large for a block"
        );
        Self { sizes, epsilon }
    }

    /// Dimension of the unconstrained space: block size minus one per
    /// block, the last logit of each block being pinned to zero.
    pub fn dim(&self) -> usize {
        self.sizes.iter().map(|s| s - 1).sum()
    }

    /// Decodes an unconstrained vector into one point per block; entry
    /// `i` of a decoded block is at least `epsilon` and each block sums
    /// to one.
    pub fn decode(&self, z: &[f64]) -> Vec<Vec<f64>> {
        assert_eq!(z.len(), self.dim(), "dimension mismatch");
        let mut out = Vec::with_capacity(self.sizes.len());
        let mut offset = 0;
        for &size in &self.sizes {
            let logits = &z[offset..offset + size - 1];
            offset += size - 1;
            let mut block = Vec::with_capacity(size);
            let mut max = 0.0f64; // the pinned logit
            for &l in logits {
                max = max.max(l.clamp(-LOGIT_CLAMP, LOGIT_CLAMP));
            }
            let mut total = 0.0;
            for &l in logits.iter().chain(std::iter::once(&0.0)) {
                let e = (l.clamp(-LOGIT_CLAMP, LOGIT_CLAMP) - max).exp();
                block.push(e);
                total += e;
            }
            let scale = (1.0 - size as f64 * self.epsilon) / total;
            for b in &mut block {
                *b = *b * scale + self.epsilon;
            }
            out.push(block);
        }
        out
    }
}

/// Result of a local minimization.
#[derive(Debug, Clone)]
pub struct LocalMin {
    /// The best point found.
    pub x: Vec<f64>,
    /// Objective value at `x`.
    pub value: f64,
    /// Iterations spent.
    pub iterations: usize,
}

/// Nelder-Mead simplex search.
#[derive(Debug, Clone)]
pub struct NelderMead {
    /// Iteration budget.
    pub max_iters: usize,
    /// Converged when the objective spread across the simplex drops below
    /// this.
    pub tol: f64,
    /// Edge length of the initial axis-aligned simplex around the start.
    pub step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_iters: 2000, tol: 1e-10, step: 0.5 }
    }
}

impl NelderMead {
    /// Minimizes `f` from `x0`. Non-finite objective values are treated as
    /// infinitely bad.
    pub fn minimize(&self, f: impl Fn(&[f64]) -> f64, x0: &[f64]) -> LocalMin {
        let n = x0.len();
        assert!(n >= 1, "need at least one dimension");
        let eval = |x: &[f64]| {
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        // Adaptive coefficients (reflection, expansion, contraction,
        // shrink) following Gao and Han.
        let nf = n as f64;
        let refl = 1.0;
        let expa = 1.0 + 2.0 / nf;
        let contr = 0.75 - 1.0 / (2.0 * nf);
        let shrink = 1.0 - 1.0 / nf;

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += self.step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();

        let mut iterations = 0;
        while iterations < self.max_iters {
            // Order the simplex best to worst.
            let mut idx: Vec<usize> = (0..=n).collect();
            idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let best = idx[0];
            let worst = idx[n];
            let second_worst = idx[n - 1];
            if values[worst] - values[best] < self.tol {
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; n];
            for &i in &idx[..n] {
                for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                    *c += x;
                }
            }
            for c in &mut centroid {
                *c /= nf;
            }

            let blend = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[worst])
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };
            let reflected = blend(refl);
            let fr = eval(&reflected);
            if fr < values[best] {
                let expanded = blend(expa);
                let fe = eval(&expanded);
                if fe < fr {
                    simplex[worst] = expanded;
                    values[worst] = fe;
                } else {
                    simplex[worst] = reflected;
                    values[worst] = fr;
                }
            } else if fr < values[second_worst] {
                simplex[worst] = reflected;
                values[worst] = fr;
            } else {
                let contracted =
                    if fr < values[worst] { blend(contr) } else { blend(-contr) };
                let fc = eval(&contracted);
                if fc < values[worst].min(fr) {
                    simplex[worst] = contracted;
                    values[worst] = fc;
                } else {
                    // Shrink toward the best vertex.
                    let anchor = simplex[best].clone();
                    for &i in &idx[1..] {
                        for (x, a) in simplex[i].iter_mut().zip(&anchor) {
                            *x = a + shrink * (*x - a);
                        }
                        values[i] = eval(&simplex[i]);
                    }
                }
            }
        }

        let (argmin, &value) = values
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.total_cmp(b))
            .expect("simplex is nonempty");
        LocalMin { x: simplex[argmin].clone(), value, iterations }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn decoded_blocks_are_floored_simplex_points() {
        let codec = SimplexBlocks::new(vec![2, 4, 4], 1e-6);
        assert_eq!(codec.dim(), 1 + 3 + 3);
        let z = vec![0.7, -3.0, 55.0, 0.1, 0.0, 0.0, -80.0];
        let blocks = codec.decode(&z);
        assert_eq!(blocks.len(), 3);
        for (b, &size) in blocks.iter().zip(&[2usize, 4, 4]) {
            assert_eq!(b.len(), size);
            let sum: f64 = b.iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
            assert!(b.iter().all(|&p| (1e-6..1.0).contains(&p)));
        }
        // An extreme logit saturates instead of overflowing.
        assert!(blocks[1][1] > 0.999);
    }

    #[test]
    fn decode_is_deterministic() {
        let codec = SimplexBlocks::new(vec![2, 10, 10], 1e-6);
        let z: Vec<f64> = (0..codec.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
        let a = codec.decode(&z);
        let b = codec.decode(&z);
        assert_eq!(a, b);
    }

    #[test]
    fn minimizes_a_quadratic_bowl() {
        let nm = NelderMead::default();
        let res = nm.minimize(
            |x| (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2),
            &[0.0, 0.0],
        );
        assert_abs_diff_eq!(res.x[0], 3.0, epsilon = 1e-4);
        assert_abs_diff_eq!(res.x[1], -1.0, epsilon = 1e-4);
        assert!(res.value < 1e-8);
    }

    #[test]
    fn makes_progress_on_rosenbrock() {
        let nm = NelderMead { max_iters: 5000, tol: 1e-12, step: 0.5 };
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let res = nm.minimize(rosen, &[-1.2, 1.0]);
        assert!(res.value < 1e-6, "stuck at {}", res.value);
    }

    #[test]
    fn treats_nan_as_infinitely_bad() {
        let nm = NelderMead::default();
        let res = nm.minimize(
            |x| if x[0] < 0.0 { f64::NAN } else { (x[0] - 1.0).powi(2) },
            &[2.0, 0.0],
        );
        assert!(res.value < 1e-6);
        assert!(res.x[0] >= 0.0);
    }
}
