//! Pentagon-shaped rate regions over exact bit values and exact convex
//! hulls of their vertex sets.

use super::bits::Bits;
use crate::region::RateRegion;

/// Region `R1 <= r1`, `R2 <= r2`, `R1 + R2 <= sum` in the nonnegative
/// quadrant, with bounds kept exact where possible.
#[derive(Debug, Clone)]
pub struct DetRegion {
    pub r1: Bits,
    pub r2: Bits,
    pub sum: Bits,
}

impl DetRegion {
    pub fn new(r1: Bits, r2: Bits, sum: Bits) -> Self {
        DetRegion {
            r1: r1.clamp_min_zero(),
            r2: r2.clamp_min_zero(),
            sum: sum.clamp_min_zero(),
        }
    }

    /// Hull vertices of the region, exact where the bounds are exact.
    pub fn vertices(&self) -> Vec<(Bits, Bits)> {
        let s = self.sum.clone();
        let a = self.r1.clone().min(s.clone());
        let b = self.r2.clone().min(s.clone());
        let mut pts = vec![
            (Bits::zero(), Bits::zero()),
            (a.clone(), Bits::zero()),
            (Bits::zero(), b.clone()),
        ];
        if (a.clone() + b.clone()).partial_cmp(&s) == Some(std::cmp::Ordering::Greater) {
            pts.push((a.clone(), s.clone() - a.clone()));
            pts.push((s.clone() - b.clone(), b.clone()));
        } else {
            pts.push((a, b));
        }
        convex_hull(pts)
    }

    pub fn to_rate_region(&self) -> RateRegion {
        RateRegion::from_pentagon(self.r1.to_f64(), self.r2.to_f64(), self.sum.to_f64())
            .expect("finite bounds")
    }

    /// Hull of the union of two regions' vertex sets.
    pub fn union_hull(&self, other: &DetRegion) -> Vec<(Bits, Bits)> {
        let mut pts = self.vertices();
        pts.extend(other.vertices());
        convex_hull(pts)
    }
}

fn cmp_bits(a: &Bits, b: &Bits) -> std::cmp::Ordering {
    a.partial_cmp(b).expect("finite bit values")
}

fn cmp_point(a: &(Bits, Bits), b: &(Bits, Bits)) -> std::cmp::Ordering {
    cmp_bits(&a.0, &b.0).then_with(|| cmp_bits(&a.1, &b.1))
}

fn cross(o: &(Bits, Bits), a: &(Bits, Bits), b: &(Bits, Bits)) -> Bits {
    (a.0.clone() - o.0.clone()) * (b.1.clone() - o.1.clone())
        - (a.1.clone() - o.1.clone()) * (b.0.clone() - o.0.clone())
}

/// Monotone chain over exact points; collinear points are dropped, so
/// equal regions produce identical minimal vertex sets.
pub fn convex_hull(mut pts: Vec<(Bits, Bits)>) -> Vec<(Bits, Bits)> {
    pts.sort_by(cmp_point);
    pts.dedup_by(|a, b| cmp_point(a, b) == std::cmp::Ordering::Equal);
    if pts.len() <= 2 {
        return pts;
    }
    let turns_right = |o: &(Bits, Bits), a: &(Bits, Bits), b: &(Bits, Bits)| {
        let x = cross(o, a, b);
        match &x {
            Bits::Exact(_) => !x.is_positive(),
            Bits::Approx(v) => *v <= 1e-12,
        }
    };
    let mut lower: Vec<(Bits, Bits)> = Vec::new();
    for p in pts.iter() {
        while lower.len() >= 2 && turns_right(&lower[lower.len() - 2], &lower[lower.len() - 1], p)
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<(Bits, Bits)> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && turns_right(&upper[upper.len() - 2], &upper[upper.len() - 1], p)
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Compare two vertex sets, exact where both sides are exact, within
/// `tol` otherwise. Order-insensitive.
pub fn vertices_match(a: &[(Bits, Bits)], b: &[(Bits, Bits)], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(cmp_point);
    sb.sort_by(cmp_point);
    sa.iter()
        .zip(sb.iter())
        .all(|(p, q)| p.0.eq_within(&q.0, tol) && p.1.eq_within(&q.1, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(n: i64) -> Bits {
        Bits::from_integer(n)
    }

    #[test]
    fn pentagon_vertices_are_exact() {
        let r = DetRegion::new(bi(3), bi(2), bi(4));
        let vs = r.vertices();
        assert_eq!(vs.len(), 5);
        assert!(vs.iter().all(|(x, y)| x.is_exact() && y.is_exact()));
        assert!(vs.contains(&(bi(3), bi(1))));
        assert!(vs.contains(&(bi(2), bi(2))));
    }

    #[test]
    fn negative_sum_collapses_to_origin() {
        let r = DetRegion::new(bi(0), bi(0), bi(-1));
        assert_eq!(r.vertices(), vec![(Bits::zero(), Bits::zero())]);
    }

    #[test]
    fn union_of_mirrored_pentagons_fills_the_outer_pentagon() {
        // r1-boosted and r2-boosted regions share the sum bound; their
        // union hull is the pentagon with both individual bounds raised.
        let boosted1 = DetRegion::new(bi(5), bi(2), bi(5));
        let boosted2 = DetRegion::new(bi(3), bi(4), bi(5));
        let outer = DetRegion::new(bi(5), bi(4), bi(5));
        let hull = boosted1.union_hull(&boosted2);
        assert!(vertices_match(&hull, &outer.vertices(), 0.0));
    }

    #[test]
    fn mismatched_regions_are_detected() {
        let a = DetRegion::new(bi(3), bi(2), bi(4));
        let b = DetRegion::new(bi(3), bi(2), bi(5));
        assert!(!vertices_match(&a.vertices(), &b.vertices(), 0.0));
    }
}
