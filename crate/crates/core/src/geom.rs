//! Small fixed-size linear algebra for R^4: vectors, 4x4 matrices, the triple
//! exterior product, symmetric eigensolves for rank decisions, and the
//! orthogonal projection used by the frame integrator.
//!
//! Orientation convention: the triple wedge is the formal determinant with the
//! basis row placed last, so that e1 ∧ e2 ∧ e3 = +e4 and a frame (u, v, w, u∧v∧w)
//! is positively oriented.

pub type Vec4 = [f64; 4];

pub fn dot(a: Vec4, b: Vec4) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

pub fn norm(a: Vec4) -> f64 {
    dot(a, a).sqrt()
}

pub fn add(a: Vec4, b: Vec4) -> Vec4 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

pub fn sub(a: Vec4, b: Vec4) -> Vec4 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

pub fn scale(a: Vec4, s: f64) -> Vec4 {
    [a[0] * s, a[1] * s, a[2] * s, a[3] * s]
}

pub fn normalize(a: Vec4) -> Vec4 {
    scale(a, 1.0 / norm(a))
}

pub const E1: Vec4 = [1.0, 0.0, 0.0, 0.0];
pub const E2: Vec4 = [0.0, 1.0, 0.0, 0.0];
pub const E3: Vec4 = [0.0, 0.0, 1.0, 0.0];
pub const E4: Vec4 = [0.0, 0.0, 0.0, 1.0];

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn minor3(u: Vec4, v: Vec4, w: Vec4, drop: usize) -> f64 {
    let cols: Vec<usize> = (0..4).filter(|&c| c != drop).collect();
    det3([
        [u[cols[0]], u[cols[1]], u[cols[2]]],
        [v[cols[0]], v[cols[1]], v[cols[2]]],
        [w[cols[0]], w[cols[1]], w[cols[2]]],
    ])
}

/// Triple exterior product u ∧ v ∧ w, orthogonal to its three arguments,
/// with e1 ∧ e2 ∧ e3 = e4.
pub fn wedge3(u: Vec4, v: Vec4, w: Vec4) -> Vec4 {
    [
        -minor3(u, v, w, 0),
        minor3(u, v, w, 1),
        -minor3(u, v, w, 2),
        minor3(u, v, w, 3),
    ]
}

/// Determinant of the 4x4 matrix with rows a, b, c, d.
pub fn det4(a: Vec4, b: Vec4, c: Vec4, d: Vec4) -> f64 {
    dot(wedge3(a, b, c), d)
}

/// Row-major 4x4 matrix. Frame fields store the frame vectors as rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4(pub [Vec4; 4]);

impl Mat4 {
    pub const IDENTITY: Mat4 = Mat4([E1, E2, E3, E4]);

    pub fn zero() -> Mat4 {
        Mat4([[0.0; 4]; 4])
    }

    pub fn row(&self, i: usize) -> Vec4 {
        self.0[i]
    }

    pub fn transpose(&self) -> Mat4 {
        let mut t = Mat4::zero();
        for i in 0..4 {
            for j in 0..4 {
                t.0[j][i] = self.0[i][j];
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat4) -> Mat4 {
        let mut out = Mat4::zero();
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0.0;
                for k in 0..4 {
                    s += self.0[i][k] * other.0[k][j];
                }
                out.0[i][j] = s;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: Vec4) -> Vec4 {
        [
            dot(self.0[0], v),
            dot(self.0[1], v),
            dot(self.0[2], v),
            dot(self.0[3], v),
        ]
    }

    pub fn add(&self, other: &Mat4) -> Mat4 {
        let mut out = *self;
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] += other.0[i][j];
            }
        }
        out
    }

    pub fn sub(&self, other: &Mat4) -> Mat4 {
        let mut out = *self;
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] -= other.0[i][j];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat4 {
        let mut out = *self;
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] *= s;
            }
        }
        out
    }

    pub fn det(&self) -> f64 {
        det4(self.0[0], self.0[1], self.0[2], self.0[3])
    }

    pub fn norm_fro(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Gauss-Jordan inverse with partial pivoting. Returns None if singular.
    pub fn inverse(&self) -> Option<Mat4> {
        let mut a = self.0;
        let mut inv = Mat4::IDENTITY.0;
        for col in 0..4 {
            let pivot = (col..4)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
            if a[pivot][col].abs() < 1e-300 {
                return None;
            }
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let d = a[col][col];
            for j in 0..4 {
                a[col][j] /= d;
                inv[col][j] /= d;
            }
            for i in 0..4 {
                if i != col {
                    let f = a[i][col];
                    if f != 0.0 {
                        for j in 0..4 {
                            a[i][j] -= f * a[col][j];
                            inv[i][j] -= f * inv[col][j];
                        }
                    }
                }
            }
        }
        Some(Mat4(inv))
    }

    /// Deviation from orthogonality, max |QᵀQ − I|.
    pub fn orthogonality_defect(&self) -> f64 {
        self.transpose().mul(self).sub(&Mat4::IDENTITY).max_abs()
    }

    /// Nearest orthogonal matrix by the iterated inverse-transpose average
    /// Q ← (Q + Q⁻ᵀ)/2 (Newton iteration for the polar factor).
    pub fn polar_orthonormalize(&self) -> Mat4 {
        let mut q = *self;
        for _ in 0..50 {
            let Some(inv_t) = q.inverse().map(|m| m.transpose()) else {
                return q;
            };
            q = q.add(&inv_t).scale(0.5);
            if q.orthogonality_defect() < 1e-15 {
                break;
            }
        }
        q
    }

    /// Matrix exponential by scaling and squaring with a Taylor kernel.
    pub fn exp(&self) -> Mat4 {
        let norm = self.norm_fro();
        let k = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let scaled = self.scale(0.5f64.powi(k as i32));
        let mut term = Mat4::IDENTITY;
        let mut sum = Mat4::IDENTITY;
        for n in 1..=24 {
            term = term.mul(&scaled).scale(1.0 / n as f64);
            sum = sum.add(&term);
        }
        let mut out = sum;
        for _ in 0..k {
            out = out.mul(&out);
        }
        out
    }
}

/// Eigen-decomposition of a symmetric 4x4 matrix by the cyclic Jacobi method.
/// Returns eigenvalues (descending) and the matching orthonormal eigenvectors.
pub fn sym_eigen4(m: &Mat4) -> ([f64; 4], [Vec4; 4]) {
    let mut a = m.0;
    let mut v = Mat4::IDENTITY.0;
    for _ in 0..32 {
        let mut off = 0.0;
        for p in 0..4 {
            for q in (p + 1)..4 {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..4 {
            for q in (p + 1)..4 {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..4 {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec4)> = (0..4)
        .map(|j| (a[j][j], [v[0][j], v[1][j], v[2][j], v[3][j]]))
        .collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    let vals = [pairs[0].0, pairs[1].0, pairs[2].0, pairs[3].0];
    let vecs = [pairs[0].1, pairs[1].1, pairs[2].1, pairs[3].1];
    (vals, vecs)
}

/// Singular values (descending) of the 4xN matrix whose columns are `cols`,
/// by one-sided Jacobi on the four rows (accurate for tiny singular values,
/// unlike the Gram-matrix route whose floor is √ε).
pub fn singular_values(cols: &[Vec4]) -> [f64; 4] {
    let n = cols.len();
    // rows of the 4xN matrix, to be mutually orthogonalized
    let mut rows: Vec<Vec<f64>> = (0..4).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    for _ in 0..30 {
        let mut rotated = false;
        for i in 0..4 {
            for j in (i + 1)..4 {
                let (mut aa, mut bb, mut ab) = (0.0, 0.0, 0.0);
                for k in 0..n {
                    aa += rows[i][k] * rows[i][k];
                    bb += rows[j][k] * rows[j][k];
                    ab += rows[i][k] * rows[j][k];
                }
                if ab.abs() <= 1e-18 * (aa * bb).sqrt() || ab == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (bb - aa) / (2.0 * ab);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for k in 0..n {
                    let ri = rows[i][k];
                    let rj = rows[j][k];
                    rows[i][k] = cs * ri - sn * rj;
                    rows[j][k] = sn * ri + cs * rj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    [sv[0], sv[1], sv[2], sv[3]]
}

/// Numerical rank by relative singular-value threshold.
pub fn rank(cols: &[Vec4], rel_tol: f64) -> usize {
    let sv = singular_values(cols);
    if sv[0] <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * sv[0]).count()
}

/// Minimum-norm solution of the symmetric system A x = b via the eigen
/// pseudo-inverse; eigenvalues below `rel_tol`·max are treated as zero.
pub fn pinv_solve_sym(a: &Mat4, b: Vec4, rel_tol: f64) -> Vec4 {
    let (vals, vecs) = sym_eigen4(a);
    let vmax = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut x = [0.0; 4];
    if vmax == 0.0 {
        return x;
    }
    for j in 0..4 {
        if vals[j].abs() > rel_tol * vmax {
            let coef = dot(vecs[j], b) / vals[j];
            x = add(x, scale(vecs[j], coef));
        }
    }
    x
}
