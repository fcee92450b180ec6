//! Carbon sites of the diamond lattice around an NV centre.
//!
//! Sites are integer triples in units of a/4: the FCC points (all even,
//! sum ≡ 0 mod 4) and the same shifted by (1,1,1). The vacancy sits at the
//! origin and the nitrogen at (1,1,1); both are removed. Coordinates are
//! rotated so the [111] bond (the NV axis) is the lab ẑ.

use nalgebra::Rotation3;

use crate::Vec3;

pub(crate) fn is_site(p: [i64; 3]) -> bool {
    let [x, y, z] = p;
    let even = x % 2 == 0 && y % 2 == 0 && z % 2 == 0;
    let odd = x.rem_euclid(2) == 1 && y.rem_euclid(2) == 1 && z.rem_euclid(2) == 1;
    if even {
        (x + y + z).rem_euclid(4) == 0
    } else if odd {
        (x + y + z - 3).rem_euclid(4) == 0
    } else {
        false
    }
}

/// `[111] → ẑ`.
pub(crate) fn nv_frame() -> Rotation3<f64> {
    let axis = Vec3::new(1.0, 1.0, 1.0).normalize();
    Rotation3::rotation_between(&axis, &Vec3::z()).expect("[111] is not antiparallel to ẑ")
}

/// Lattice sites with `|r| ≤ radius` (metres), excluding the vacancy and
/// nitrogen, ordered by distance and then by the integer triple.
pub(crate) fn sites_within(radius: f64, lattice_const: f64) -> Vec<([i64; 3], Vec3)> {
    let unit = lattice_const / 4.0;
    let n = (radius / unit).ceil() as i64 + 1;
    let r2_max = (radius / unit) * (radius / unit);
    let mut out: Vec<([i64; 3], i64)> = Vec::new();
    for x in -n..=n {
        for y in -n..=n {
            for z in -n..=n {
                let p = [x, y, z];
                if p == [0, 0, 0] || p == [1, 1, 1] || !is_site(p) {
                    continue;
                }
                let d2 = x * x + y * y + z * z;
                if (d2 as f64) <= r2_max {
                    out.push((p, d2));
                }
            }
        }
    }
    out.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
    let rot = nv_frame();
    out.into_iter()
        .map(|(p, _)| (p, rot * Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64) * unit))
        .collect()
}
