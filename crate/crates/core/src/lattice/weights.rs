use std::io::{Read, Write};
use std::marker::PhantomData;

use crate::error::{Error, Result};
use crate::lattice::rng::{CounterKey, Lane, RngStream};
use crate::lattice::{LatticeBox, Site};
use crate::scalar::Scalar;

/// Upper bound on a single dense allocation, in sites.
pub const MAX_FIELD_SITES: u64 = 1 << 31;

const COORD_BIAS: i64 = 1 << 27;
const MAGIC: &[u8; 4] = b"CGW1";

/// Counter ordinal of a site: both coordinates biased into 28 bits.
///
/// Keying weights by absolute coordinates makes the environment of a replica
/// independent of the box that is later cut out of it.
pub fn site_ordinal(z: Site) -> u64 {
    assert!(
        z.x.abs() < COORD_BIAS && z.y.abs() < COORD_BIAS,
        "site {z} outside the addressable lattice"
    );
    (((z.x + COORD_BIAS) as u64) << 28) | (z.y + COORD_BIAS) as u64
}

/// Anything that assigns a weight `X(z)` to lattice sites.
pub trait WeightSource<T: Scalar>: Sync {
    /// `None` when `z` is not covered.
    fn weight(&self, z: Site) -> Option<T>;
}

/// Dense, immutable table of i.i.d. mean-1 exponential weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightField<T = f64> {
    region: LatticeBox,
    weights: Vec<T>,
}

fn reserve<T>(region: &LatticeBox) -> Result<Vec<T>> {
    let sites = region.width() as u64 * region.height() as u64;
    if sites > MAX_FIELD_SITES {
        return Err(Error::Resource { sites });
    }
    let mut v = Vec::new();
    v.try_reserve_exact(sites as usize)
        .map_err(|_| Error::Resource { sites })?;
    Ok(v)
}

/// Samples `X(z)` for every site of `region` from `stream`'s seed and index.
pub fn sample_weights<T: Scalar>(region: LatticeBox, stream: &RngStream) -> Result<WeightField<T>> {
    let key = stream.lane(Lane::Weights).key();
    let mut weights = reserve(&region)?;
    weights.extend(region.sites().map(|z| T::of(key.exponential_at(site_ordinal(z)))));
    Ok(WeightField { region, weights })
}

impl<T: Scalar> WeightField<T> {
    /// Field with explicit row-major values; every value must be positive.
    pub fn from_values(region: LatticeBox, weights: Vec<T>) -> Result<Self> {
        if weights.len() != region.site_count() {
            return Err(Error::Domain(format!(
                "{} values for a region of {} sites",
                weights.len(),
                region.site_count()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !(*w > T::zero()) || !w.is_finite()) {
            let z = region.sites().nth(i).expect("index within region");
            return Err(Error::Domain(format!("weight at {z} is not a positive finite number")));
        }
        Ok(WeightField { region, weights })
    }

    /// Field built site by site.
    pub fn from_fn(region: LatticeBox, f: impl Fn(Site) -> T) -> Result<Self> {
        let mut weights = reserve(&region)?;
        weights.extend(region.sites().map(f));
        Self::from_values(region, weights)
    }

    pub fn region(&self) -> LatticeBox {
        self.region
    }

    pub fn values(&self) -> &[T] {
        &self.weights
    }

    /// `X(z)`; fails for sites outside the region.
    pub fn weight_at(&self, z: Site) -> Result<T> {
        self.region
            .index_of(z)
            .map(|i| self.weights[i])
            .ok_or_else(|| Error::OutOfRegion { site: z, region: self.region.to_string() })
    }

    /// Writes the flat binary dump: magic, four i32 bounds, then f64 LE weights.
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        let (lo, hi) = (self.region.min(), self.region.max());
        let bound = |v: i64| {
            i32::try_from(v).map_err(|_| Error::Domain(format!("bound {v} exceeds i32")))
        };
        w.write_all(MAGIC)?;
        for v in [lo.x, lo.y, hi.x, hi.y] {
            w.write_all(&bound(v)?.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(8 * self.weights.len());
        for x in &self.weights {
            buf.extend_from_slice(&x.wide().to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let mut header = [0u8; 20];
        r.read_exact(&mut header)?;
        if &header[..4] != MAGIC {
            return Err(Error::Parse { line: 0, detail: "bad magic, expected CGW1".into() });
        }
        let word = |i: usize| {
            let b: [u8; 4] = header[4 + 4 * i..8 + 4 * i].try_into().expect("4 bytes");
            i32::from_le_bytes(b) as i64
        };
        let region = LatticeBox::new(Site::new(word(0), word(1)), Site::new(word(2), word(3)))?;
        let mut weights = reserve(&region)?;
        let mut bytes = vec![0u8; 8 * region.site_count()];
        r.read_exact(&mut bytes)?;
        weights.extend(
            bytes
                .chunks_exact(8)
                .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("8 bytes")))),
        );
        Self::from_values(region, weights)
    }
}

impl<T: Scalar> WeightSource<T> for WeightField<T> {
    #[inline]
    fn weight(&self, z: Site) -> Option<T> {
        self.region.index_of(z).map(|i| self.weights[i])
    }
}

/// The same weights as [`sample_weights`], computed on demand for any site.
///
/// Used by the large experiments where materializing the field would cost
/// more memory than the growth table itself.
#[derive(Clone, Copy, Debug)]
pub struct StreamWeights<T = f64> {
    key: CounterKey,
    _scalar: PhantomData<T>,
}

impl<T: Scalar> StreamWeights<T> {
    pub fn new(stream: &RngStream) -> Self {
        StreamWeights { key: stream.lane(Lane::Weights).key(), _scalar: PhantomData }
    }
}

impl<T: Scalar> WeightSource<T> for StreamWeights<T> {
    #[inline]
    fn weight(&self, z: Site) -> Option<T> {
        Some(T::of(self.key.exponential_at(site_ordinal(z))))
    }
}

impl<T: Scalar, F: Fn(Site) -> T + Sync> WeightSource<T> for F {
    fn weight(&self, z: Site) -> Option<T> {
        Some(self(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(n: i64) -> LatticeBox {
        LatticeBox::new(Site::new(0, 0), Site::new(n - 1, n - 1)).unwrap()
    }

    #[test]
    fn same_stream_gives_identical_fields() {
        let a: WeightField = sample_weights(square(40), &RngStream::new(7, 0)).unwrap();
        let b: WeightField = sample_weights(square(40), &RngStream::new(7, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn million_site_moments() {
        let f: WeightField = sample_weights(square(1000), &RngStream::new(7, 0)).unwrap();
        let n = f.values().len() as f64;
        let mean = f.values().iter().sum::<f64>() / n;
        let var = f.values().iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "variance {var}");
        assert!(f.values().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn distinct_indices_differ_almost_everywhere() {
        let a: WeightField = sample_weights(square(100), &RngStream::new(7, 0)).unwrap();
        let b: WeightField = sample_weights(square(100), &RngStream::new(7, 1)).unwrap();
        let differ = a.values().iter().zip(b.values()).filter(|(x, y)| x != y).count();
        assert!(differ as f64 > 0.99 * a.values().len() as f64);
    }

    #[test]
    fn lookup_contract() {
        let f: WeightField = sample_weights(square(5), &RngStream::new(1, 2)).unwrap();
        let z = Site::new(3, 4);
        let i = f.region().index_of(z).unwrap();
        assert_eq!(f.weight_at(z).unwrap(), f.values()[i]);
        assert_eq!(f.weight_at(z).unwrap(), f.weight_at(z).unwrap());
        assert!(matches!(
            f.weight_at(Site::new(5, 0)),
            Err(Error::OutOfRegion { site, .. }) if site == Site::new(5, 0)
        ));
    }

    #[test]
    fn stream_weights_agree_with_dense_field() {
        let region = LatticeBox::new(Site::new(-7, -3), Site::new(4, 6)).unwrap();
        let stream = RngStream::new(11, 5);
        let dense: WeightField = sample_weights(region, &stream).unwrap();
        let lazy = StreamWeights::<f64>::new(&stream);
        for z in region.sites() {
            assert_eq!(dense.weight(z), lazy.weight(z));
        }
    }

    #[test]
    fn f32_fields_are_positive() {
        let f: WeightField<f32> = sample_weights(square(50), &RngStream::new(2, 0)).unwrap();
        assert!(f.values().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn binary_dump_round_trips() {
        let region = LatticeBox::new(Site::new(-2, -1), Site::new(3, 2)).unwrap();
        let f: WeightField = sample_weights(region, &RngStream::new(9, 9)).unwrap();
        let mut bytes = Vec::new();
        f.write_binary(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"CGW1");
        assert_eq!(i32::from_le_bytes(bytes[4..8].try_into().unwrap()), -2);
        assert_eq!(bytes.len(), 20 + 8 * region.site_count());
        let g: WeightField = WeightField::read_binary(bytes.as_slice()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let bytes = [0u8; 40];
        assert!(WeightField::<f64>::read_binary(&bytes[..]).is_err());
    }

    #[test]
    fn oversized_region_is_a_resource_error() {
        let region = LatticeBox::new(Site::new(0, 0), Site::new(1 << 20, 1 << 20)).unwrap();
        let e = sample_weights::<f64>(region, &RngStream::new(0, 0)).unwrap_err();
        assert!(matches!(e, Error::Resource { sites } if sites == ((1u64 << 20) + 1).pow(2)));
    }
}
