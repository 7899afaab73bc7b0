//! SCMA codebooks: storage, validation, the plain-text file format, random
//! separable generation and the channel-absorbing effective codebook.
//!
//! A codebook holds `J` layers of `M` complex codewords of length `K`. Each
//! layer is nonzero on the same `N` resources for all of its codewords.
//!
//! File format (`#` starts a comment line, blank lines are skipped):
//!
//! ```text
//! K J M N
//! re im re im ...   # 2K floats, one line per codeword, layer-major
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Minimum spacing between generated per-dimension constellation values.
pub const MIN_SEPARATION: f64 = 0.05;

/// RNG stream reserved for codebook generation.
pub const CODEBOOK_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    resources: usize,
    layers: usize,
    codewords: usize,
    nonzeros: usize,
    // layer-major, then codeword, then resource
    entries: Vec<Complex64>,
    supports: Vec<Vec<usize>>,
}

impl Codebook {
    /// Builds a codebook from layer-major entries and checks every invariant.
    pub fn new(
        resources: usize,
        layers: usize,
        codewords: usize,
        nonzeros: usize,
        entries: Vec<Complex64>,
    ) -> Result<Self> {
        if resources == 0 || layers == 0 {
            return Err(Error::Dimension(format!(
                "need at least one resource and one layer, got K={resources} J={layers}"
            )));
        }
        if codewords < 2 || !codewords.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "codebook size M={codewords} must be a power of two >= 2"
            )));
        }
        if nonzeros > resources {
            return Err(Error::Dimension(format!(
                "N={nonzeros} nonzero positions exceed K={resources}"
            )));
        }
        let expected = resources * layers * codewords;
        if entries.len() != expected {
            return Err(Error::Dimension(format!(
                "expected {expected} entries (K*J*M), got {}",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("entry {bad} is not finite")));
        }

        let mut supports = Vec::with_capacity(layers);
        for layer in 0..layers {
            let mut counts = vec![0usize; resources];
            for m in 0..codewords {
                let base = (layer * codewords + m) * resources;
                for (k, count) in counts.iter_mut().enumerate() {
                    if entries[base + k] != Complex64::new(0.0, 0.0) {
                        *count += 1;
                    }
                }
            }
            let used: Vec<usize> = (0..resources).filter(|&k| counts[k] > 0).collect();
            if used.len() > nonzeros {
                // keep the N most populated positions, blame the first of the rest
                let mut ranked = used.clone();
                ranked.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
                let resource = ranked[nonzeros..].iter().copied().min().unwrap_or(0);
                return Err(Error::InconsistentSupport {
                    layer,
                    resource,
                    expected: nonzeros,
                });
            }
            if used.len() < nonzeros {
                return Err(Error::Dimension(format!(
                    "layer {layer} is nonzero on {} resources, expected N={nonzeros}",
                    used.len()
                )));
            }
            supports.push(used);
        }

        Ok(Self {
            resources,
            layers,
            codewords,
            nonzeros,
            entries,
            supports,
        })
    }

    /// K, the codeword length.
    pub fn resources(&self) -> usize {
        self.resources
    }

    /// J, the number of layers.
    pub fn layers(&self) -> usize {
        self.layers
    }

    /// M, codewords per layer.
    pub fn codewords(&self) -> usize {
        self.codewords
    }

    /// N, nonzero positions per codeword.
    pub fn nonzeros(&self) -> usize {
        self.nonzeros
    }

    pub fn bits_per_codeword(&self) -> usize {
        self.codewords.trailing_zeros() as usize
    }

    pub fn codeword(&self, layer: usize, m: usize) -> &[Complex64] {
        let base = (layer * self.codewords + m) * self.resources;
        &self.entries[base..base + self.resources]
    }

    pub fn entry(&self, layer: usize, m: usize, resource: usize) -> Complex64 {
        self.entries[(layer * self.codewords + m) * self.resources + resource]
    }

    /// Resources on which `layer` is nonzero, ascending.
    pub fn support(&self, layer: usize) -> &[usize] {
        &self.supports[layer]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse { line, msg, .. } => Error::Parse {
                path: path.to_path_buf(),
                line,
                msg,
            },
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Parses the text format. Parse errors carry an empty path.
    pub fn parse(text: &str) -> Result<Self> {
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: Default::default(),
            line,
            msg,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (header_line, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing `K J M N` header".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(header_line, format!("bad header: {e}")))?;
        let [k, j, m, n] = dims[..] else {
            return Err(parse_err(
                header_line,
                format!("header needs 4 integers, found {}", dims.len()),
            ));
        };

        let mut entries = Vec::with_capacity(k * j * m);
        for row in 0..j * m {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| parse_err(header_line, format!("expected {} codeword rows, found {row}", j * m)))?;
            let values: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(line_no, format!("bad float: {e}")))?;
            if values.len() != 2 * k {
                return Err(parse_err(
                    line_no,
                    format!("expected {} floats, found {}", 2 * k, values.len()),
                ));
            }
            entries.extend(values.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])));
        }
        if let Some((line_no, _)) = lines.next() {
            return Err(parse_err(line_no, "trailing data after codeword rows".into()));
        }
        Self::new(k, j, m, n, entries)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {} {}\n",
            self.resources, self.layers, self.codewords, self.nonzeros
        );
        for layer in 0..self.layers {
            let _ = writeln!(out, "# layer {layer}");
            for m in 0..self.codewords {
                let row: Vec<String> = self
                    .codeword(layer, m)
                    .iter()
                    .map(|c| format!("{:?} {:?}", c.re, c.im))
                    .collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        out
    }

    /// Smallest `wid` with every real and imaginary component in `[-wid, wid]`.
    pub fn amplitude_bound(&self) -> f64 {
        self.entries
            .iter()
            .fold(0.0f64, |acc, c| acc.max(c.re.abs()).max(c.im.abs()))
    }

    /// Largest component magnitude at one resource, over both dimensions.
    pub fn amplitude_bound_at(&self, resource: usize) -> f64 {
        let mut wid = 0.0f64;
        for layer in 0..self.layers {
            for m in 0..self.codewords {
                let c = self.entry(layer, m, resource);
                wid = wid.max(c.re.abs()).max(c.im.abs());
            }
        }
        wid
    }

    /// Codebook with entries `h_kj * x_kjm`.
    pub fn effective(&self, channel: &ChannelVectors) -> Result<Self> {
        if channel.layers != self.layers || channel.resources != self.resources {
            return Err(Error::Dimension(format!(
                "channel is {}x{} (JxK), codebook is {}x{}",
                channel.layers, channel.resources, self.layers, self.resources
            )));
        }
        let mut entries = self.entries.clone();
        for layer in 0..self.layers {
            for m in 0..self.codewords {
                let base = (layer * self.codewords + m) * self.resources;
                for k in 0..self.resources {
                    entries[base + k] *= channel.gain(layer, k);
                }
            }
        }
        Self::new(self.resources, self.layers, self.codewords, self.nonzeros, entries)
    }

    /// Splits every layer into its real and imaginary constellations.
    ///
    /// Fails with [`Error::NotSeparable`] unless each layer's codeword set is
    /// exactly the Cartesian product of the two projected sets.
    pub fn separable_parts(&self) -> Result<Vec<LayerParts>> {
        (0..self.layers)
            .map(|layer| {
                let words: Vec<Vec<Complex64>> = (0..self.codewords)
                    .map(|m| self.support(layer).iter().map(|&k| self.entry(layer, m, k)).collect())
                    .collect();
                LayerParts::from_codewords(&words).ok_or(Error::NotSeparable { layer })
            })
            .collect()
    }

    pub fn is_separable(&self) -> bool {
        self.separable_parts().is_ok()
    }
}

/// `effective_codebook` as a free function.
pub fn effective_codebook(cb: &Codebook, h: &ChannelVectors) -> Result<Codebook> {
    cb.effective(h)
}

pub fn load_codebook(path: impl AsRef<Path>) -> Result<Codebook> {
    Codebook::load(path)
}

/// Real/imaginary decomposition of one separable layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParts {
    /// Distinct real projections, each over the layer's support positions.
    pub real: Vec<Vec<f64>>,
    /// Distinct imaginary projections.
    pub imag: Vec<Vec<f64>>,
    /// Codeword index -> (real index, imaginary index).
    pub index: Vec<(usize, usize)>,
}

impl LayerParts {
    /// Product decomposition of a codeword set, or `None` when the set is not
    /// a Cartesian product. Codewords must all have the same length.
    pub fn from_codewords(words: &[Vec<Complex64>]) -> Option<Self> {
        let key = |v: &[f64]| -> Vec<u64> { v.iter().map(|x| (x + 0.0).to_bits()).collect() };
        let mut real: Vec<Vec<f64>> = Vec::new();
        let mut imag: Vec<Vec<f64>> = Vec::new();
        let mut real_keys: Vec<Vec<u64>> = Vec::new();
        let mut imag_keys: Vec<Vec<u64>> = Vec::new();
        let mut index = Vec::with_capacity(words.len());
        for w in words {
            let re: Vec<f64> = w.iter().map(|c| c.re).collect();
            let im: Vec<f64> = w.iter().map(|c| c.im).collect();
            let r = position_or_push(&mut real_keys, key(&re), || real.push(re));
            let i = position_or_push(&mut imag_keys, key(&im), || imag.push(im));
            index.push((r, i));
        }
        let mut seen = index.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != words.len() || real.len() * imag.len() != words.len() {
            return None;
        }
        Some(Self { real, imag, index })
    }

    /// (real index, imaginary index) -> codeword index.
    pub fn lookup(&self) -> Vec<usize> {
        let mut table = vec![0; self.real.len() * self.imag.len()];
        for (m, &(r, i)) in self.index.iter().enumerate() {
            table[r * self.imag.len() + i] = m;
        }
        table
    }
}

fn position_or_push(keys: &mut Vec<Vec<u64>>, key: Vec<u64>, push: impl FnOnce()) -> usize {
    match keys.iter().position(|k| *k == key) {
        Some(p) => p,
        None => {
            keys.push(key);
            push();
            keys.len() - 1
        }
    }
}

/// Per-layer channel gains `h_kj`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVectors {
    layers: usize,
    resources: usize,
    gains: Vec<Complex64>,
}

impl ChannelVectors {
    pub fn new(layers: usize, resources: usize, gains: Vec<Complex64>) -> Result<Self> {
        if gains.len() != layers * resources {
            return Err(Error::Dimension(format!(
                "expected {} channel gains, got {}",
                layers * resources,
                gains.len()
            )));
        }
        Ok(Self {
            layers,
            resources,
            gains,
        })
    }

    pub fn ones(layers: usize, resources: usize) -> Self {
        Self {
            layers,
            resources,
            gains: vec![Complex64::new(1.0, 0.0); layers * resources],
        }
    }

    pub fn gain(&self, layer: usize, resource: usize) -> Complex64 {
        self.gains[layer * self.resources + resource]
    }
}

/// Random codebook over the regular pair-per-layer graph with independent
/// real and imaginary constellations in `[-1, 1]`.
///
/// Codeword `m` combines real value `m / sqrt(M)` with imaginary value
/// `m % sqrt(M)` on every support position.
pub fn generate_separable_codebook(resources: usize, codewords: usize, seed: u64) -> Result<Codebook> {
    let side = (codewords as f64).sqrt().round() as usize;
    if codewords < 4 || !codewords.is_power_of_two() || side * side != codewords {
        return Err(Error::InvalidParameter(format!(
            "M={codewords} must be a power of two and a perfect square (>= 4)"
        )));
    }
    // random sequential packing jams well before 2 / MIN_SEPARATION points
    if side > 16 {
        return Err(Error::InvalidParameter(format!(
            "sqrt(M)={side} values cannot be packed in [-1, 1] with spacing {MIN_SEPARATION}"
        )));
    }

    build_pair_codebook(resources, codewords, seed, |rng| draw_separated(rng, side))
}

/// Like [`generate_separable_codebook`], but every component is a distinct
/// integer multiple of `w` in `[-amplitude, amplitude]`.
pub fn generate_grid_codebook(
    resources: usize,
    codewords: usize,
    w: f64,
    amplitude: f64,
    seed: u64,
) -> Result<Codebook> {
    let side = (codewords as f64).sqrt().round() as usize;
    if codewords < 4 || !codewords.is_power_of_two() || side * side != codewords {
        return Err(Error::InvalidParameter(format!(
            "M={codewords} must be a power of two and a perfect square (>= 4)"
        )));
    }
    if !(w > 0.0 && amplitude >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bad grid w={w}, amplitude={amplitude}"
        )));
    }
    let steps = (amplitude / w + 1e-9).floor() as i64;
    if ((2 * steps + 1) as usize) < side {
        return Err(Error::InvalidParameter(format!(
            "only {} grid points in [-{amplitude}, {amplitude}] for {side} values",
            2 * steps + 1
        )));
    }
    build_pair_codebook(resources, codewords, seed, |rng| {
        let mut picked: Vec<i64> = Vec::with_capacity(side);
        while picked.len() < side {
            let s = rng.random_range(-steps..=steps);
            if !picked.contains(&s) {
                picked.push(s);
            }
        }
        picked.into_iter().map(|s| s as f64 * w).collect()
    })
}

fn build_pair_codebook(
    resources: usize,
    codewords: usize,
    seed: u64,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> Vec<f64>,
) -> Result<Codebook> {
    if resources < 3 {
        return Err(Error::InvalidParameter(format!(
            "need K >= 3 resources, got {resources}"
        )));
    }
    let side = (codewords as f64).sqrt().round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // trials draw from streams 0, 1, ... of the same seed
    rng.set_stream(CODEBOOK_STREAM);
    let pairs = crate::graph::resource_pairs(resources);
    let mut entries = vec![Complex64::new(0.0, 0.0); pairs.len() * codewords * resources];
    for (layer, pair) in pairs.iter().enumerate() {
        for &k in pair {
            let re = draw(&mut rng);
            let im = draw(&mut rng);
            for m in 0..codewords {
                entries[(layer * codewords + m) * resources + k] = Complex64::new(re[m / side], im[m % side]);
            }
        }
    }
    Codebook::new(resources, pairs.len(), codewords, 2, entries)
}

fn draw_separated(rng: &mut impl Rng, count: usize) -> Vec<f64> {
    let mut values: Vec<f64> = Vec::with_capacity(count);
    while values.len() < count {
        let v: f64 = rng.random_range(-1.0..=1.0);
        if values.iter().all(|u| (u - v).abs() >= MIN_SEPARATION) {
            values.push(v);
        }
    }
    values
}
