//! Seeded sampling of output vectors and empirical statistics.
//!
//! Random source: ChaCha8 (`rand_chacha` 0.3). Draw `d` belongs to chunk
//! `d / CHUNK`; each chunk uses a generator created with
//! `ChaCha8Rng::seed_from_u64(seed)` and switched to stream number `chunk`.
//! Within a draw, inputs are visited in index order: one uniform `u` decides
//! the input (`u < p` means 0), and for a firing input, its edges are visited
//! in output order, skipping outputs already on, with one uniform per edge
//! (`u < w` suppresses the edge). Chunks are independent, so generation can be
//! split across workers without changing a single bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::BiasSetting;
use crate::error::{Error, Result};
use crate::network::NoisyOrNetwork;
use crate::rational::{self, to_f64};
use crate::subset::{SubsetTable, HARD_SUBSET_CAP};

/// Draws per generator stream.
pub const CHUNK: usize = 4096;

/// A network flattened for fast sampling: per input, its edges as
/// `(output, weight)` with float weights.
#[derive(Clone, Debug)]
pub struct CompiledNetwork {
    num_outputs: usize,
    edges: Vec<Vec<(usize, f64)>>,
}

impl CompiledNetwork {
    pub fn new(net: &NoisyOrNetwork) -> Self {
        let mut edges = vec![Vec::new(); net.num_inputs()];
        for (i, j, w) in net.edges() {
            edges[i].push((j, to_f64(&w)));
        }
        CompiledNetwork { num_outputs: net.num_outputs(), edges }
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    /// One draw; `out` is cleared and filled with output values.
    pub fn draw_into<R: Rng + ?Sized>(&self, p: f64, rng: &mut R, out: &mut [bool]) {
        out.fill(false);
        for edges in &self.edges {
            if rng.gen::<f64>() < p {
                continue;
            }
            for &(j, w) in edges {
                if !out[j] && rng.gen::<f64>() >= w {
                    out[j] = true;
                }
            }
        }
    }
}

/// One output vector drawn through the OR-of-noisy-parents process. Input
/// values are discarded.
pub fn draw<R: Rng + ?Sized>(net: &NoisyOrNetwork, bias: &BiasSetting, rng: &mut R) -> Vec<bool> {
    let compiled = CompiledNetwork::new(net);
    let mut out = vec![false; net.num_outputs()];
    compiled.draw_into(bias.p_f64(), rng, &mut out);
    out
}

/// `count` independent draws, deterministic in `seed`.
pub fn sample(net: &NoisyOrNetwork, bias: &BiasSetting, count: usize, seed: u64) -> SampleSet {
    let compiled = CompiledNetwork::new(net);
    let p = bias.p_f64();
    let mut set = SampleSet::with_capacity(net.num_outputs(), bias.clone(), Some(seed), count);
    let mut row = vec![false; net.num_outputs()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for d in 0..count {
        if d % CHUNK == 0 {
            rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((d / CHUNK) as u64);
        }
        compiled.draw_into(p, &mut rng, &mut row);
        set.push(&row);
    }
    set
}

/// Observed output draws, stored column-wise as bitsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSet {
    num_outputs: usize,
    bias: BiasSetting,
    seed: Option<u64>,
    count: usize,
    /// `columns[j]` has bit `d` set when output `j` was 1 in draw `d`.
    columns: Vec<Vec<u64>>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    num_outputs: usize,
    count: usize,
    #[serde(with = "rational::serde_str")]
    bias: rational::Rational,
    #[serde(default)]
    seed: Option<u64>,
}

impl SampleSet {
    pub fn new(num_outputs: usize, bias: BiasSetting, seed: Option<u64>) -> Self {
        Self::with_capacity(num_outputs, bias, seed, 0)
    }

    fn with_capacity(num_outputs: usize, bias: BiasSetting, seed: Option<u64>, count: usize) -> Self {
        SampleSet {
            num_outputs,
            bias,
            seed,
            count: 0,
            columns: vec![Vec::with_capacity(count.div_ceil(64)); num_outputs],
        }
    }

    pub fn push(&mut self, draw: &[bool]) {
        assert_eq!(draw.len(), self.num_outputs, "draw length mismatch");
        let (word, bit) = (self.count / 64, self.count % 64);
        for (col, &v) in self.columns.iter_mut().zip(draw) {
            if bit == 0 {
                col.push(0);
            }
            col[word] |= (v as u64) << bit;
        }
        self.count += 1;
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    pub fn bias(&self) -> &BiasSetting {
        &self.bias
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn get(&self, draw: usize) -> Vec<bool> {
        assert!(draw < self.count, "draw index out of range");
        self.columns.iter().map(|c| c[draw / 64] >> (draw % 64) & 1 == 1).collect()
    }

    pub fn draws(&self) -> impl Iterator<Item = Vec<bool>> + '_ {
        (0..self.count).map(|d| self.get(d))
    }

    /// True when every output is 0 in every draw.
    pub fn all_zero(&self) -> bool {
        self.columns.iter().all(|c| c.iter().all(|&w| w == 0))
    }

    /// Histogram of joint patterns on `outputs`; index bit `b` is `outputs[b]`.
    pub fn pattern_counts(&self, outputs: &[usize]) -> Result<Vec<u64>> {
        if outputs.len() > HARD_SUBSET_CAP {
            return Err(Error::LimitExceeded {
                what: "empirical table",
                requested: outputs.len() as u128,
                limit: HARD_SUBSET_CAP as u128,
            });
        }
        if let Some(&j) = outputs.iter().find(|&&j| j >= self.num_outputs) {
            return Err(Error::InvalidArgument(format!("output {j} out of range")));
        }
        let size = 1usize << outputs.len();
        let mut hist = vec![0u64; size];
        let words = self.count.div_ceil(64);
        for w in 0..words {
            let valid = if (w + 1) * 64 <= self.count { u64::MAX } else { (1u64 << (self.count % 64)) - 1 };
            for (pattern, slot) in hist.iter_mut().enumerate() {
                let mut hit = valid;
                for (b, &j) in outputs.iter().enumerate() {
                    let col = self.columns[j][w];
                    hit &= if pattern >> b & 1 == 1 { col } else { !col };
                    if hit == 0 {
                        break;
                    }
                }
                *slot += hit.count_ones() as u64;
            }
        }
        Ok(hist)
    }

    pub fn to_text(&self) -> String {
        let header = Header {
            num_outputs: self.num_outputs,
            count: self.count,
            bias: self.bias.p().clone(),
            seed: self.seed,
        };
        let mut s = serde_json::to_string(&header).expect("header serializes");
        s.push('\n');
        s.reserve(self.count * (self.num_outputs + 1));
        for d in 0..self.count {
            for col in &self.columns {
                s.push(if col[d / 64] >> (d % 64) & 1 == 1 { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Header = serde_json::from_str(lines.next().ok_or_else(|| Error::Parse("missing header".into()))?)?;
        let mut set = SampleSet::with_capacity(header.num_outputs, BiasSetting::new(header.bias)?, header.seed, header.count);
        let mut row = vec![false; header.num_outputs];
        for (n, line) in lines.enumerate() {
            let line = line.trim_end();
            if line.len() != header.num_outputs {
                return Err(Error::Parse(format!("draw {n}: expected {} bits", header.num_outputs)));
            }
            for (slot, c) in row.iter_mut().zip(line.chars()) {
                *slot = match c {
                    '0' => false,
                    '1' => true,
                    _ => return Err(Error::Parse(format!("draw {n}: bad character {c:?}"))),
                };
            }
            set.push(&row);
        }
        if set.count != header.count {
            return Err(Error::Parse(format!("header says {} draws, found {}", header.count, set.count)));
        }
        Ok(set)
    }
}

/// Fraction of draws in which every output of `S` is 0, for each `S ⊆ outputs`.
pub fn empirical_subset_zero_table(samples: &SampleSet, outputs: &[usize]) -> Result<SubsetTable<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let hist = samples.pattern_counts(outputs)?;
    let total = samples.len() as f64;
    let values = (0..hist.len())
        .map(|s| {
            let zeros: u64 = hist.iter().enumerate().filter(|(y, _)| y & s == 0).map(|(_, c)| c).sum();
            zeros as f64 / total
        })
        .collect();
    Ok(SubsetTable { outputs: outputs.to_vec(), values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{subset_zero_table, Limits};
    use crate::network::{random_network, NetworkFamily};
    use crate::rational::ratio;

    fn bias(a: i64, b: i64) -> BiasSetting {
        BiasSetting::new(ratio(a, b)).unwrap()
    }

    #[test]
    fn certain_inputs_give_constant_outputs() {
        let fam = NetworkFamily::one_weight(2, ratio(0, 1)).unwrap();
        let net = random_network(&fam, 5, 6, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            assert!(draw(&net, &bias(1, 1), &mut rng).iter().all(|&b| !b));
            let d = draw(&net, &bias(0, 1), &mut rng);
            for (j, v) in d.into_iter().enumerate() {
                assert_eq!(v, net.fan_in(j) > 0);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let fam = NetworkFamily::one_weight(2, ratio(1, 2)).unwrap();
        let net = random_network(&fam, 6, 4, 1).unwrap();
        assert!(sample(&net, &bias(1, 2), 0, 5).is_empty());
        let a = sample(&net, &bias(1, 2), 5000, 5);
        let b = sample(&net, &bias(1, 2), 5000, 5);
        assert_eq!(a.to_text(), b.to_text());
        let c = sample(&net, &bias(1, 2), 5000, 6);
        assert_ne!(a, c);
        // a prefix of a longer run is the shorter run
        let longer = sample(&net, &bias(1, 2), 9000, 5);
        assert_eq!(longer.get(4999), a.get(4999));
    }

    #[test]
    fn text_round_trip() {
        let fam = NetworkFamily::one_weight(2, ratio(1, 3)).unwrap();
        let net = random_network(&fam, 4, 3, 2).unwrap();
        let s = sample(&net, &bias(2, 5), 130, 9);
        let text = s.to_text();
        assert!(text.starts_with("{\"num_outputs\":3,\"count\":130,\"bias\":\"2/5\",\"seed\":9}\n"));
        assert_eq!(SampleSet::from_text(&text).unwrap(), s);
        assert!(SampleSet::from_text("{\"num_outputs\":2,\"count\":1,\"bias\":\"1/2\"}\n0x\n").is_err());
        assert!(SampleSet::from_text("{\"num_outputs\":2,\"count\":2,\"bias\":\"1/2\"}\n01\n").is_err());
    }

    #[test]
    fn empirical_table_edges() {
        let mut s = SampleSet::new(2, bias(1, 2), None);
        assert!(matches!(empirical_subset_zero_table(&s, &[0]), Err(Error::EmptySampleSet)));
        for _ in 0..10 {
            s.push(&[false, false]);
        }
        let t = empirical_subset_zero_table(&s, &[0, 1]).unwrap();
        assert!(t.values.iter().all(|&v| v == 1.0));
        s.push(&[true, false]);
        let t = empirical_subset_zero_table(&s, &[0, 1]).unwrap();
        assert_eq!(t.values[0], 1.0);
        assert!((t.values[1] - 10.0 / 11.0).abs() < 1e-15);
        assert_eq!(t.values[2], 1.0);
    }

    #[test]
    fn small_network_frequencies_match_exact_values() {
        let net = NoisyOrNetwork::from_edges(
            2,
            2,
            [(0, 0, ratio(1, 2)), (1, 0, ratio(1, 2)), (1, 1, ratio(1, 2))],
        )
        .unwrap();
        let b = bias(1, 2);
        let n = 200_000;
        let s = sample(&net, &b, n, 42);
        let exact = subset_zero_table(&net, &[0, 1], &b, &Limits::default()).unwrap();
        let emp = empirical_subset_zero_table(&s, &[0, 1]).unwrap();
        for (q, qh) in exact.values.iter().zip(&emp.values) {
            let q = to_f64(q);
            let tol = 4.0 * (q * (1.0 - q) / n as f64).sqrt();
            assert!((q - qh).abs() <= tol, "{q} vs {qh}");
        }
    }
}
