//! Great-circle distances between latitude/longitude pairs.

use crate::dissim::{symmetric_from_fn, DissimMatrix};
use crate::error::{invalid_input, Error, Result};

/// Mean Earth radius in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Haversine distance in kilometres between two points given in degrees.
pub fn haversine(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    let a = a.clamp(0.0, 1.0);
    2.0 * EARTH_RADIUS_KM * a.sqrt().atan2((1.0 - a).sqrt())
}

pub fn check_coordinates(lat: &[f64], lon: &[f64]) -> Result<()> {
    if lat.len() != lon.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} latitudes and {} longitudes",
            lat.len(),
            lon.len()
        )));
    }
    for (i, (&la, &lo)) in lat.iter().zip(lon).enumerate() {
        if !(-90.0..=90.0).contains(&la) || !(-180.0..=180.0).contains(&lo) {
            return Err(invalid_input(format!(
                "record {i}: coordinates ({la}, {lo}) out of range"
            )));
        }
    }
    Ok(())
}

/// Pairwise haversine distances (km).
pub fn geodesic_matrix(lat: &[f64], lon: &[f64]) -> Result<DissimMatrix> {
    check_coordinates(lat, lon)?;
    let values = symmetric_from_fn(
        lat.len(),
        |_| 0.0,
        |i, j| haversine(lat[i], lon[i], lat[j], lon[j]),
    );
    DissimMatrix::from_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_distances() {
        assert_eq!(haversine(12.0, 34.0, 12.0, 34.0), 0.0);
        let half = std::f64::consts::PI * EARTH_RADIUS_KM;
        assert!((haversine(0.0, 0.0, 0.0, 180.0) - half).abs() < 1e-9);
        assert!((haversine(90.0, 0.0, -90.0, 0.0) - half).abs() < 1e-9);
        assert!((haversine(0.0, 0.0, 0.0, 90.0) - half / 2.0).abs() < 1e-9);
        assert!((half - 20015.11).abs() < 0.01);
    }

    #[test]
    fn range_checks() {
        assert!(geodesic_matrix(&[91.0], &[0.0]).is_err());
        assert!(geodesic_matrix(&[0.0], &[-181.0]).is_err());
        assert!(geodesic_matrix(&[0.0, 1.0], &[0.0]).is_err());
        let m = geodesic_matrix(&[0.0, 0.0], &[0.0, 90.0]).unwrap();
        assert_eq!(m.get(0, 1), m.get(1, 0));
    }

    proptest! {
        #[test]
        fn metric_on_sphere(
            a in (-90.0f64..90.0, -180.0f64..180.0),
            b in (-90.0f64..90.0, -180.0f64..180.0),
            c in (-90.0f64..90.0, -180.0f64..180.0),
        ) {
            let ab = haversine(a.0, a.1, b.0, b.1);
            prop_assert!((ab - haversine(b.0, b.1, a.0, a.1)).abs() <= 1e-9);
            let ac = haversine(a.0, a.1, c.0, c.1);
            let cb = haversine(c.0, c.1, b.0, b.1);
            prop_assert!(ab <= ac + cb + 1e-9);
        }
    }
}
