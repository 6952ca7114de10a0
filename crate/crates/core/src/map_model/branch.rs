use crate::interval::Interval;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    Linear,
}

/// `x ↦ slope·x + intercept`.
#[derive(Clone, Debug, PartialEq)]
pub struct Affine<S> {
    pub slope: S,
    pub intercept: S,
}

impl<S: Scalar> Affine<S> {
    pub fn new(slope: S, intercept: S) -> Self {
        Affine { slope, intercept }
    }

    pub fn identity() -> Self {
        Affine::new(S::one(), S::zero())
    }

    pub fn eval(&self, x: &S) -> S {
        self.slope.clone() * x.clone() + self.intercept.clone()
    }

    /// Solves `eval(x) = y`; the slope is nonzero for every validated branch.
    pub fn solve(&self, y: &S) -> S {
        (y.clone() - self.intercept.clone()) / self.slope.clone()
    }

    /// `outer ∘ self`.
    pub fn then(&self, outer: &Affine<S>) -> Affine<S> {
        Affine {
            slope: outer.slope.clone() * self.slope.clone(),
            intercept: outer.slope.clone() * self.intercept.clone() + outer.intercept.clone(),
        }
    }
}

/// Strictly monotone branch given by samples `(xs[i], ys[i])` joined by
/// linear interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneTable<S> {
    pub(crate) xs: Vec<S>,
    pub(crate) ys: Vec<S>,
    pub(crate) direction: Monotonicity,
    pub(crate) interpolation: Interpolation,
}

impl<S: Scalar> MonotoneTable<S> {
    /// Builds a table and checks the grid. Returns a description of the
    /// first problem found.
    pub fn new(points: Vec<(S, S)>, direction: Monotonicity) -> Result<Self, String> {
        if points.len() < 2 {
            return Err("table needs at least two grid points".into());
        }
        let (xs, ys): (Vec<S>, Vec<S>) = points.into_iter().unzip();
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err("grid abscissae must be strictly increasing".into());
        }
        let monotone = match direction {
            Monotonicity::Increasing => ys.windows(2).all(|w| w[0] < w[1]),
            Monotonicity::Decreasing => ys.windows(2).all(|w| w[0] > w[1]),
        };
        if !monotone {
            return Err(format!("grid values are not strictly {direction:?}").to_lowercase());
        }
        Ok(MonotoneTable {
            xs,
            ys,
            direction,
            interpolation: Interpolation::Linear,
        })
    }

    pub fn points(&self) -> impl Iterator<Item = (&S, &S)> {
        self.xs.iter().zip(self.ys.iter())
    }

    pub fn direction(&self) -> Monotonicity {
        self.direction
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    fn segment_for_x(&self, x: &S) -> usize {
        let upper = self.xs.partition_point(|v| v <= x);
        upper.clamp(1, self.xs.len() - 1) - 1
    }

    fn segment_for_y(&self, y: &S) -> usize {
        let upper = match self.direction {
            Monotonicity::Increasing => self.ys.partition_point(|v| v <= y),
            Monotonicity::Decreasing => self.ys.partition_point(|v| v >= y),
        };
        upper.clamp(1, self.ys.len() - 1) - 1
    }

    fn segment(&self, k: usize) -> Affine<S> {
        let slope = (self.ys[k + 1].clone() - self.ys[k].clone())
            / (self.xs[k + 1].clone() - self.xs[k].clone());
        let intercept = self.ys[k].clone() - slope.clone() * self.xs[k].clone();
        Affine { slope, intercept }
    }

    pub fn eval(&self, x: &S) -> S {
        self.segment(self.segment_for_x(x)).eval(x)
    }

    /// Inverse by bisection over the monotone samples, then an exact solve on
    /// the bracketing segment.
    pub fn solve(&self, y: &S) -> S {
        self.segment(self.segment_for_y(y)).solve(y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Branch<S> {
    Affine(Affine<S>),
    Table(MonotoneTable<S>),
}

impl<S: Scalar> Branch<S> {
    pub fn affine(slope: S, intercept: S) -> Self {
        Branch::Affine(Affine::new(slope, intercept))
    }

    pub fn eval(&self, x: &S) -> S {
        match self {
            Branch::Affine(a) => a.eval(x),
            Branch::Table(t) => t.eval(x),
        }
    }

    pub fn solve(&self, y: &S) -> S {
        match self {
            Branch::Affine(a) => a.solve(y),
            Branch::Table(t) => t.solve(y),
        }
    }

    pub fn as_affine(&self) -> Option<&Affine<S>> {
        match self {
            Branch::Affine(a) => Some(a),
            Branch::Table(_) => None,
        }
    }

    pub fn direction(&self) -> Monotonicity {
        match self {
            Branch::Affine(a) if a.slope.is_negative() => Monotonicity::Decreasing,
            Branch::Affine(_) => Monotonicity::Increasing,
            Branch::Table(t) => t.direction,
        }
    }

    /// Image of an interval inside the branch's piece.
    pub fn image(&self, k: &Interval<S>) -> Interval<S> {
        let a = self.eval(&k.left);
        let b = self.eval(&k.right);
        match self.direction() {
            Monotonicity::Increasing => Interval {
                left: a,
                right: b,
                left_closed: k.left_closed,
                right_closed: k.right_closed,
            },
            Monotonicity::Decreasing => Interval {
                left: b,
                right: a,
                left_closed: k.right_closed,
                right_closed: k.left_closed,
            },
        }
    }

    /// `{x ∈ piece : branch(x) ∈ target}`, computed through the monotone
    /// inverse on the closure of the piece.
    pub fn preimage(&self, target: &Interval<S>, piece: &Interval<S>) -> Option<Interval<S>> {
        let range = self.image(&piece.closure());
        let hit = target.intersect(&range)?;
        let lo = self.solve(&hit.left);
        let hi = self.solve(&hit.right);
        let pulled = match self.direction() {
            Monotonicity::Increasing => Interval::new(lo, hi, hit.left_closed, hit.right_closed),
            Monotonicity::Decreasing => Interval::new(hi, lo, hit.right_closed, hit.left_closed),
        }?;
        pulled.intersect(piece)
    }
}
