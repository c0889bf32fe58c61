//! Small fixed-size vector and matrix types.

use std::ops::{Add, Index, Mul, Neg, Sub};

use crate::scalar::Real;

/// A point (or displacement) in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

/// A point (or displacement) in space.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Point2<T> {
    pub const fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// Unit vector at `angle` radians counterclockwise from the x-axis.
    pub fn from_angle(angle: T) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product; negative when `o` is clockwise of `self`.
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    /// Lifts into space on the plane `z = 0`.
    pub fn to_3d(self) -> Point3<T> {
        Point3::new(self.x, self.y, T::zero())
    }

    pub fn to_array(self) -> [T; 2] {
        [self.x, self.y]
    }
}

impl<T: Real> Point3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn unit_x() -> Self {
        Self::new(T::one(), T::zero(), T::zero())
    }

    pub fn unit_z() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn xy(self) -> Point2<T> {
        Point2::new(self.x, self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl<T: Real> Index<usize> for Point3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Point3 index {i} out of range"),
        }
    }
}

macro_rules! impl_vec_ops {
    ($ty:ident { $($f:ident),+ }) => {
        impl<T: Real> Add for $ty<T> {
            type Output = Self;
            fn add(self, o: Self) -> Self { Self { $($f: self.$f + o.$f),+ } }
        }
        impl<T: Real> Sub for $ty<T> {
            type Output = Self;
            fn sub(self, o: Self) -> Self { Self { $($f: self.$f - o.$f),+ } }
        }
        impl<T: Real> Neg for $ty<T> {
            type Output = Self;
            fn neg(self) -> Self { Self { $($f: -self.$f),+ } }
        }
        impl<T: Real> Mul<T> for $ty<T> {
            type Output = Self;
            fn mul(self, s: T) -> Self { self.scale(s) }
        }
    };
}

impl_vec_ops!(Point2 { x, y });
impl_vec_ops!(Point3 { x, y, z });

/// A 3×3 matrix stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<T> {
    pub rows: [[T; 3]; 3],
}

impl<T: Real> Mat3<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self { rows: [[o, z, z], [z, o, z], [z, z, o]] }
    }

    pub fn from_rows(rows: [[T; 3]; 3]) -> Self {
        Self { rows }
    }

    pub fn transpose(&self) -> Self {
        let r = &self.rows;
        Self::from_rows([[r[0][0], r[1][0], r[2][0]], [r[0][1], r[1][1], r[2][1]], [r[0][2], r[1][2], r[2][2]]])
    }

    pub fn mul_vec(&self, v: Point3<T>) -> Point3<T> {
        let r = &self.rows;
        Point3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }

    pub fn mul_mat(&self, o: &Self) -> Self {
        let mut out = [[T::zero(); 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.rows[i][k] * o.rows[k][j]).sum();
            }
        }
        Self::from_rows(out)
    }

    /// Largest absolute entry of `AᵀA − I`.
    pub fn orthogonality_defect(&self) -> T {
        let g = self.transpose().mul_mat(self);
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((g.rows[i][j] - target).abs());
            }
        }
        worst
    }

    /// Rotation by `angle` about the x-axis.
    pub fn rotation_x(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let (o, z) = (T::one(), T::zero());
        Self::from_rows([[o, z, z], [z, c, -s], [z, s, c]])
    }

    /// Rotation by `angle` about the z-axis.
    pub fn rotation_z(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let (o, z) = (T::one(), T::zero());
        Self::from_rows([[c, -s, z], [s, c, z], [z, z, o]])
    }

    /// Rotation about the unit `axis` by `angle` (Rodrigues).
    pub fn rotation_axis_angle(axis: Point3<T>, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let t = T::one() - c;
        let Point3 { x, y, z } = axis;
        Self::from_rows([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }

    /// A proper rotation taking the unit vector `from` onto `+z`.
    pub fn rotation_onto_z(from: Point3<T>) -> Self {
        let ez = Point3::unit_z();
        let axis = from.cross(ez);
        let s = axis.norm();
        let c = from.dot(ez);
        if s <= T::epsilon() {
            if c > T::zero() {
                Self::identity()
            } else {
                Self::rotation_x(T::lit(std::f64::consts::PI))
            }
        } else {
            Self::rotation_axis_angle(axis.scale(T::one() / s), s.atan2(c))
        }
    }
}

/// An isometry `u ↦ to + R(u − from)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidMotion<T> {
    pub rotation: Mat3<T>,
    pub from: Point3<T>,
    pub to: Point3<T>,
}

impl<T: Real> RigidMotion<T> {
    pub fn identity() -> Self {
        Self { rotation: Mat3::identity(), from: Point3::zero(), to: Point3::zero() }
    }

    pub fn apply(&self, u: Point3<T>) -> Point3<T> {
        self.to + self.rotation.mul_vec(u - self.from)
    }
}
