//! Small fixed-size vector and rotation helpers.

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
pub fn norm_sq(a: Vec3) -> f64 {
    dot(a, a)
}

#[inline]
pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn transpose(m: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[j][i];
        }
    }
    out
}

/// Rotation matrix of an axis-angle vector (Rodrigues' formula).
pub fn rodrigues(r: Vec3) -> Mat3 {
    let angle_sq = norm_sq(r);
    let (a, b) = if angle_sq < 1e-16 {
        // Taylor expansion of sin(t)/t and (1 - cos t)/t^2.
        (1.0 - angle_sq / 6.0, 0.5 - angle_sq / 24.0)
    } else {
        let angle = libm::sqrt(angle_sq);
        (libm::sin(angle) / angle, (1.0 - libm::cos(angle)) / angle_sq)
    };
    let [x, y, z] = r;
    // R = I + a K + b K^2 with K the cross-product matrix of r.
    let k: Mat3 = [[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]];
    let k2 = mat_mul(&k, &k);
    let mut out = IDENTITY;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] += a * k[i][j] + b * k2[i][j];
        }
    }
    out
}

/// Axis-angle vector of a rotation matrix; inverse of [`rodrigues`] for
/// angles in `[0, pi)`.
pub fn axis_angle(m: &Mat3) -> Vec3 {
    let trace = m[0][0] + m[1][1] + m[2][2];
    let cos = ((trace - 1.0) * 0.5).clamp(-1.0, 1.0);
    let angle = libm::acos(cos);
    let v = [m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]];
    if angle < 1e-8 {
        return scale(v, 0.5);
    }
    let s = libm::sin(angle);
    if s.abs() < 1e-6 {
        // Near pi: recover the axis from the symmetric part.
        let mut axis = [
            libm::sqrt(((m[0][0] + 1.0) * 0.5).max(0.0)),
            libm::sqrt(((m[1][1] + 1.0) * 0.5).max(0.0)),
            libm::sqrt(((m[2][2] + 1.0) * 0.5).max(0.0)),
        ];
        if m[0][1] + m[1][0] < 0.0 {
            axis[1] = -axis[1];
        }
        if m[0][2] + m[2][0] < 0.0 {
            axis[2] = -axis[2];
        }
        return scale(axis, angle);
    }
    scale(v, angle / (2.0 * s))
}

/// Rigid transform `x -> rot * x + trans`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rigid {
    pub rot: Mat3,
    pub trans: Vec3,
}

impl Rigid {
    pub const IDENTITY: Rigid = Rigid { rot: IDENTITY, trans: [0.0; 3] };

    #[inline]
    pub fn apply(&self, p: Vec3) -> Vec3 {
        add(mat_vec(&self.rot, p), self.trans)
    }

    pub fn compose(&self, other: &Rigid) -> Rigid {
        Rigid { rot: mat_mul(&self.rot, &other.rot), trans: self.apply(other.trans) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rodrigues_round_trip() {
        for r in [[0.3, -0.2, 0.5], [0.0, 0.0, 1e-10], [1.0, 2.0, -0.5], [0.0, 3.0, 0.0]] {
            let m = rodrigues(r);
            let back = axis_angle(&m);
            let m2 = rodrigues(back);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((m[i][j] - m2[i][j]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn rodrigues_is_orthonormal() {
        let m = rodrigues([0.7, -1.1, 0.4]);
        let mt = mat_mul(&m, &transpose(&m));
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((mt[i][j] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn half_turn_about_x_flips_y_and_z() {
        let m = rodrigues([core::f64::consts::PI, 0.0, 0.0]);
        let p = mat_vec(&m, [1.0, 2.0, 3.0]);
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!((p[1] + 2.0).abs() < 1e-12);
        assert!((p[2] + 3.0).abs() < 1e-12);
    }
}
