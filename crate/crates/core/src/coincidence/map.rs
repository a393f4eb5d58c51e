//! Three-fold coincidence maps built from sorted tag streams.

use std::collections::VecDeque;
use std::io::Write;

use crate::error::{Error, Result};
use crate::relay::analytic::RateDensity3F;
use crate::relay::tags::{Channel, TimeTag};

/// Half-open delay ranges `[min, max)` of a map, in ps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapRanges {
    pub t1_min_ps: i64,
    pub t1_max_ps: i64,
    pub t2_min_ps: i64,
    pub t2_max_ps: i64,
}

impl MapRanges {
    /// Ranges whose bins are centred on multiples of `bin_ps`, covering
    /// `|τ₁| ≤ t1_half_ps` and `τ₂ ∈ [t2_from_ps, t2_to_ps]` (both rounded
    /// outwards to whole bins).
    pub fn centered(bin_ps: i64, t1_half_ps: i64, t2_from_ps: i64, t2_to_ps: i64) -> Self {
        let h = bin_ps / 2;
        let k1 = (t1_half_ps + bin_ps - 1) / bin_ps;
        let lo2 = t2_from_ps.div_euclid(bin_ps);
        let hi2 = (t2_to_ps + bin_ps - 1).div_euclid(bin_ps);
        Self {
            t1_min_ps: -k1 * bin_ps - h,
            t1_max_ps: k1 * bin_ps + bin_ps - h,
            t2_min_ps: lo2 * bin_ps - h,
            t2_max_ps: hi2 * bin_ps + bin_ps - h,
        }
    }
}

/// Anything that assigns a (possibly fractional) count to each bin of a
/// regular (τ₁, τ₂) grid for Bob's two outcomes.
pub trait OutcomeMap {
    fn bin_ps(&self) -> i64;
    fn t1_min_ps(&self) -> i64;
    fn t2_min_ps(&self) -> i64;
    fn n1(&self) -> usize;
    fn n2(&self) -> usize;
    /// Count in bin `(i1, i2)` for outcome 0 (D3) or 1 (D4).
    fn value(&self, outcome: usize, i1: usize, i2: usize) -> f64;

    /// Representative delay of bin `i1` (its lower edge plus half a bin).
    fn center1(&self, i1: usize) -> i64 {
        self.t1_min_ps() + i1 as i64 * self.bin_ps() + self.bin_ps() / 2
    }

    fn center2(&self, i2: usize) -> i64 {
        self.t2_min_ps() + i2 as i64 * self.bin_ps() + self.bin_ps() / 2
    }
}

/// Integer coincidence counts `counts[outcome][i1 * n2 + i2]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoincidenceMap {
    pub bin_ps: i64,
    pub ranges: MapRanges,
    pub n1: usize,
    pub n2: usize,
    pub counts: [Vec<u64>; 2],
    /// Number of D1∧D2 pairs with τ₁ inside the τ₁ range.
    pub heralds: u64,
}

impl CoincidenceMap {
    pub fn empty(bin_ps: i64, ranges: MapRanges) -> Result<Self> {
        if bin_ps <= 0 {
            return Err(Error::Precondition(format!("bin width {bin_ps} must be > 0")));
        }
        let span1 = ranges.t1_max_ps - ranges.t1_min_ps;
        let span2 = ranges.t2_max_ps - ranges.t2_min_ps;
        if span1 <= 0 || span2 <= 0 || span1 % bin_ps != 0 || span2 % bin_ps != 0 {
            return Err(Error::Precondition("map ranges must be non-empty multiples of the bin width".into()));
        }
        let (n1, n2) = ((span1 / bin_ps) as usize, (span2 / bin_ps) as usize);
        Ok(Self { bin_ps, ranges, n1, n2, counts: [vec![0; n1 * n2], vec![0; n1 * n2]], heralds: 0 })
    }

    pub fn get(&self, outcome: usize, i1: usize, i2: usize) -> u64 {
        self.counts[outcome][i1 * self.n2 + i2]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Adds another map of identical shape (maps built from disjoint D1
    /// ranges combine this way).
    pub fn merge(&mut self, other: &CoincidenceMap) -> Result<()> {
        if self.bin_ps != other.bin_ps || self.ranges != other.ranges {
            return Err(Error::Precondition("cannot merge maps of different shape".into()));
        }
        for k in 0..2 {
            for (a, b) in self.counts[k].iter_mut().zip(&other.counts[k]) {
                *a += b;
            }
        }
        self.heralds += other.heralds;
        Ok(())
    }

    /// CSV dump with columns `i_t1, i_t2, t1_ps, t2_ps, d3, d4`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["i_t1", "i_t2", "t1_ps", "t2_ps", "d3_counts", "d4_counts"])?;
        for i1 in 0..self.n1 {
            for i2 in 0..self.n2 {
                w.write_record([
                    i1.to_string(),
                    i2.to_string(),
                    self.center1(i1).to_string(),
                    self.center2(i2).to_string(),
                    self.get(0, i1, i2).to_string(),
                    self.get(1, i1, i2).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

impl OutcomeMap for CoincidenceMap {
    fn bin_ps(&self) -> i64 {
        self.bin_ps
    }
    fn t1_min_ps(&self) -> i64 {
        self.ranges.t1_min_ps
    }
    fn t2_min_ps(&self) -> i64 {
        self.ranges.t2_min_ps
    }
    fn n1(&self) -> usize {
        self.n1
    }
    fn n2(&self) -> usize {
        self.n2
    }
    fn value(&self, outcome: usize, i1: usize, i2: usize) -> f64 {
        self.get(outcome, i1, i2) as f64
    }
}

/// Expected (fractional) counts of the analytic backend for a given
/// acquisition time.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedMap {
    pub bin_ps: i64,
    pub t1_min_ps: i64,
    pub t2_min_ps: i64,
    pub n1: usize,
    pub n2: usize,
    pub counts: [Vec<f64>; 2],
}

impl ExpectedMap {
    pub fn from_density(d: &RateDensity3F, duration_s: f64) -> Self {
        Self {
            bin_ps: d.grid.step_ps,
            t1_min_ps: d.grid.t1_min_ps,
            t2_min_ps: d.grid.t2_min_ps,
            n1: d.grid.n1,
            n2: d.grid.n2,
            counts: d.expected_counts(duration_s),
        }
    }
}

impl OutcomeMap for ExpectedMap {
    fn bin_ps(&self) -> i64 {
        self.bin_ps
    }
    fn t1_min_ps(&self) -> i64 {
        self.t1_min_ps
    }
    fn t2_min_ps(&self) -> i64 {
        self.t2_min_ps
    }
    fn n1(&self) -> usize {
        self.n1
    }
    fn n2(&self) -> usize {
        self.n2
    }
    fn value(&self, outcome: usize, i1: usize, i2: usize) -> f64 {
        self.counts[outcome][i1 * self.n2 + i2]
    }
}

/// Streaming merge-join over a sorted tag stream.
///
/// D1 tags wait in a queue until the stream has advanced past the largest
/// delay of interest; D2 and Bob tags are kept only as long as some pending
/// or future D1 tag can still pair with them. Memory is bounded by the tag
/// rate times the range width.
pub struct MapBuilder {
    map: CoincidenceMap,
    pending_d1: VecDeque<i64>,
    d2: VecDeque<i64>,
    bob: VecDeque<(i64, u8)>,
    ahead: i64,
    behind: i64,
    last: Option<TimeTag>,
}

impl MapBuilder {
    pub fn new(bin_ps: i64, ranges: MapRanges) -> Result<Self> {
        let map = CoincidenceMap::empty(bin_ps, ranges)?;
        Ok(Self {
            map,
            pending_d1: VecDeque::new(),
            d2: VecDeque::new(),
            bob: VecDeque::new(),
            ahead: ranges.t1_max_ps.max(ranges.t2_max_ps),
            behind: ranges.t1_min_ps.min(ranges.t2_min_ps),
            last: None,
        })
    }

    /// Feeds the next chunk of a sorted stream.
    pub fn push(&mut self, tags: &[TimeTag]) -> Result<()> {
        for &tag in tags {
            if self.last.is_some_and(|l| l > tag) {
                return Err(Error::Precondition(format!("tag stream not sorted at t = {} ps", tag.t_ps)));
            }
            self.last = Some(tag);
            while let Some(&t) = self.pending_d1.front() {
                if t + self.ahead > tag.t_ps {
                    break;
                }
                self.pending_d1.pop_front();
                self.finalize(t);
            }
            match tag.channel {
                Channel::D1 => self.pending_d1.push_back(tag.t_ps),
                Channel::D2 => self.d2.push_back(tag.t_ps),
                Channel::D3 => self.bob.push_back((tag.t_ps, 0)),
                Channel::D4 => self.bob.push_back((tag.t_ps, 1)),
            }
            let oldest = self.pending_d1.front().copied().unwrap_or(tag.t_ps).min(tag.t_ps);
            let keep_from = oldest + self.behind;
            while self.d2.front().is_some_and(|&t| t < keep_from) {
                self.d2.pop_front();
            }
            while self.bob.front().is_some_and(|&(t, _)| t < keep_from) {
                self.bob.pop_front();
            }
        }
        Ok(())
    }

    fn finalize(&mut self, t: i64) {
        let r = self.map.ranges;
        let bin = self.map.bin_ps;
        let lo = self.d2.partition_point(|&x| x < t + r.t1_min_ps);
        let hi = self.d2.partition_point(|&x| x < t + r.t1_max_ps);
        if lo == hi {
            return;
        }
        let blo = self.bob.partition_point(|&(x, _)| x < t + r.t2_min_ps);
        let bhi = self.bob.partition_point(|&(x, _)| x < t + r.t2_max_ps);
        for j in lo..hi {
            self.map.heralds += 1;
            let i1 = ((self.d2[j] - t - r.t1_min_ps) / bin) as usize;
            for k in blo..bhi {
                let (tb, o) = self.bob[k];
                let i2 = ((tb - t - r.t2_min_ps) / bin) as usize;
                self.map.counts[o as usize][i1 * self.map.n2 + i2] += 1;
            }
        }
    }

    pub fn finish(mut self) -> CoincidenceMap {
        while let Some(t) = self.pending_d1.pop_front() {
            self.finalize(t);
        }
        self.map
    }
}

/// Builds a map from a complete sorted stream.
pub fn build_threefold_map(tags: &[TimeTag], bin_ps: i64, ranges: MapRanges) -> Result<CoincidenceMap> {
    let mut b = MapBuilder::new(bin_ps, ranges)?;
    b.push(tags)?;
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ranges0() -> MapRanges {
        MapRanges { t1_min_ps: 0, t1_max_ps: 64, t2_min_ps: 0, t2_max_ps: 64 }
    }

    #[test]
    fn hand_fixture() {
        let tags = vec![
            TimeTag::new(Channel::D1, 0),
            TimeTag::new(Channel::D2, 16),
            TimeTag::new(Channel::D3, 40),
            TimeTag::new(Channel::D4, 500),
            TimeTag::new(Channel::D2, 900),
        ];
        let m = build_threefold_map(&tags, 8, ranges0()).unwrap();
        assert_eq!(m.total(), 1);
        assert_eq!(m.get(0, 2, 5), 1);
        assert_eq!(m.heralds, 1);
    }

    #[test]
    fn no_d1_gives_empty_map() {
        let tags = vec![TimeTag::new(Channel::D2, 16), TimeTag::new(Channel::D3, 40)];
        assert_eq!(build_threefold_map(&tags, 8, ranges0()).unwrap().total(), 0);
    }

    #[test]
    fn unsorted_input_is_rejected() {
        let tags = vec![TimeTag::new(Channel::D2, 16), TimeTag::new(Channel::D1, 0)];
        assert!(matches!(build_threefold_map(&tags, 8, ranges0()), Err(Error::Precondition(_))));
    }

    #[test]
    fn bad_ranges_are_rejected() {
        let r = MapRanges { t1_max_ps: 60, ..ranges0() };
        assert!(CoincidenceMap::empty(8, r).is_err());
        assert!(CoincidenceMap::empty(0, ranges0()).is_err());
    }

    #[test]
    fn centered_ranges() {
        let r = MapRanges::centered(8, 200, -300, 1300);
        assert_eq!((r.t1_min_ps, r.t1_max_ps), (-204, 204));
        assert_eq!((r.t2_min_ps, r.t2_max_ps), (-308, 1308));
        let m = CoincidenceMap::empty(8, r).unwrap();
        assert_eq!(m.center1(0), -200);
        assert_eq!(m.center2(m.n2 - 1), 1304);
    }

    fn brute_force(tags: &[TimeTag], bin: i64, r: MapRanges) -> CoincidenceMap {
        let mut m = CoincidenceMap::empty(bin, r).unwrap();
        for a in tags.iter().filter(|t| t.channel == Channel::D1) {
            for b in tags.iter().filter(|t| t.channel == Channel::D2) {
                let t1 = b.t_ps - a.t_ps;
                if !(r.t1_min_ps..r.t1_max_ps).contains(&t1) {
                    continue;
                }
                m.heralds += 1;
                for c in tags.iter().filter(|t| matches!(t.channel, Channel::D3 | Channel::D4)) {
                    let t2 = c.t_ps - a.t_ps;
                    if !(r.t2_min_ps..r.t2_max_ps).contains(&t2) {
                        continue;
                    }
                    let o = (c.channel == Channel::D4) as usize;
                    let i1 = ((t1 - r.t1_min_ps) / bin) as usize;
                    let i2 = ((t2 - r.t2_min_ps) / bin) as usize;
                    m.counts[o][i1 * m.n2 + i2] += 1;
                }
            }
        }
        m
    }

    fn arb_stream() -> impl Strategy<Value = Vec<TimeTag>> {
        prop::collection::vec((0u8..4, 0i64..20_000), 0..1000).prop_map(|v| {
            let mut tags: Vec<TimeTag> = v.into_iter().map(|(c, t)| TimeTag::new(Channel::ALL[c as usize], t)).collect();
            tags.sort();
            tags
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn equals_brute_force(tags in arb_stream(), split in 0usize..1000) {
            let r = MapRanges { t1_min_ps: -400, t1_max_ps: 400, t2_min_ps: -240, t2_max_ps: 1200 };
            let want = brute_force(&tags, 8, r);
            // feeding in two chunks must not matter
            let mut b = MapBuilder::new(8, r).unwrap();
            let s = split.min(tags.len());
            b.push(&tags[..s]).unwrap();
            b.push(&tags[s..]).unwrap();
            prop_assert_eq!(b.finish(), want);
        }
    }

    #[test]
    fn merge_adds_counts() {
        let tags = vec![TimeTag::new(Channel::D1, 0), TimeTag::new(Channel::D2, 16), TimeTag::new(Channel::D3, 40)];
        let mut a = build_threefold_map(&tags, 8, ranges0()).unwrap();
        let b = a.clone();
        a.merge(&b).unwrap();
        assert_eq!(a.get(0, 2, 5), 2);
        assert_eq!(a.heralds, 2);
    }

    #[test]
    fn csv_header_names_units() {
        let m = CoincidenceMap::empty(8, ranges0()).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("i_t1,i_t2,t1_ps,t2_ps,d3_counts,d4_counts\n"));
        assert_eq!(text.lines().count(), 1 + 64);
    }
}
