//! Double-double numbers: an unevaluated sum `hi + lo` carrying roughly twice
//! the precision of `f64`. Used for the charged Ward tables, whose updates
//! subtract nearly equal quantities.

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Wide {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Wide {
    let s = a + b;
    Wide {
        hi: s,
        lo: b - (s - a),
    }
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Wide {
    #[inline]
    pub(crate) fn new(v: f64) -> Self {
        Wide { hi: v, lo: 0.0 }
    }

    #[inline]
    pub(crate) fn value(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub(crate) fn add(self, o: Wide) -> Wide {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let w = quick_two_sum(s, e + t);
        quick_two_sum(w.hi, w.lo + f)
    }

    #[inline]
    pub(crate) fn sub(self, o: Wide) -> Wide {
        self.add(Wide {
            hi: -o.hi,
            lo: -o.lo,
        })
    }

    #[inline]
    pub(crate) fn mul(self, o: Wide) -> Wide {
        let (p, e) = two_prod(self.hi, o.hi);
        quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
    }

    #[inline]
    pub(crate) fn scale(self, c: f64) -> Wide {
        let (p, e) = two_prod(self.hi, c);
        quick_two_sum(p, e + self.lo * c)
    }

    #[inline]
    pub(crate) fn div(self, c: f64) -> Wide {
        let q1 = self.hi / c;
        let (p, pe) = two_prod(q1, c);
        let (s, e) = two_sum(self.hi, -p);
        let q2 = (s + (e - pe + self.lo)) / c;
        quick_two_sum(q1, q2)
    }

    /// `Σ (aᵢ − bᵢ)²`.
    pub(crate) fn sq_distance(a: &[f64], b: &[f64]) -> Wide {
        let mut acc = Wide::default();
        for (&x, &y) in a.iter().zip(b) {
            let (d, de) = two_sum(x, -y);
            let diff = Wide { hi: d, lo: de };
            acc = acc.add(diff.mul(diff));
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_digits() {
        let big = Wide::new(1e16).add(Wide::new(1.0));
        assert_eq!(big.sub(Wide::new(1e16)).value(), 1.0);
        let third = Wide::new(1.0).div(3.0);
        assert!(third.scale(3.0).sub(Wide::new(1.0)).value().abs() < 1e-30);
        let a = 1.0 + 1e-12;
        let gap = a - 1.0;
        let d = Wide::sq_distance(&[a], &[1.0]);
        assert_eq!(d.value(), gap * gap);
    }
}
