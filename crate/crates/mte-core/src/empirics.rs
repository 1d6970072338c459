//! Codelength statistics of size datasets.
//!
//! Sizes from a package index (or any list of positive integers) are mapped
//! through `l_omega`, histogrammed, and compared against three candidate
//! laws: uniform over observed codelengths, the pure `2^-l` law, and a
//! fitted exponential `exp(-a l - c)`. Divergences are reported in nats.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bignat::BigNat;
use crate::error::{Error, Result};
use crate::omega::{omega_len, omega_len_u64};
use crate::rng::KahanSum;

/// Parsed sizes plus the number of entries dropped by the filtering rules
/// (missing fields, non-numeric values, zero sizes).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Ingest {
    pub sizes: Vec<u64>,
    pub skipped: u64,
}

impl Ingest {
    fn push_size(&mut self, size: u64) {
        if size == 0 {
            self.skipped += 1;
        } else {
            self.sizes.push(size);
        }
    }
}

/// Parse a Debian `Packages` control file: blank-line-separated stanzas of
/// `Key: value` lines, one size per stanza with a `Size:` field.
pub fn ingest_debian(text: &str) -> Result<Ingest> {
    let mut out = Ingest::default();
    let mut in_stanza = false;
    let mut size: Option<u64> = None;
    let flush = |size: &mut Option<u64>, in_stanza: &mut bool, out: &mut Ingest| {
        if *in_stanza {
            match size.take() {
                Some(s) => out.push_size(s),
                None => out.skipped += 1,
            }
        }
        *in_stanza = false;
    };
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            flush(&mut size, &mut in_stanza, &mut out);
            continue;
        }
        if line.starts_with(' ') || line.starts_with('\t') {
            // continuation line (multi-line field value)
            if !in_stanza {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "continuation line outside a stanza".into(),
                });
            }
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected 'Key: value', got {line:?}"),
            });
        };
        in_stanza = true;
        if key == "Size" {
            let v = value.trim();
            size = Some(v.parse().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("Size field is not a nonnegative integer: {v:?}"),
            })?);
        }
    }
    flush(&mut size, &mut in_stanza, &mut out);
    Ok(out)
}

/// Parse one package-index JSON document: release file entries under
/// `releases.<version>[]` (or `urls[]`) each carry a numeric `size` field.
/// Entries with a missing or non-numeric size are skipped and counted.
pub fn ingest_pypi(doc_name: &str, doc: &str) -> Result<Ingest> {
    let v: Value = serde_json::from_str(doc).map_err(|e| Error::Parse {
        line: e.line(),
        msg: format!("document {doc_name}: {e}"),
    })?;
    let mut out = Ingest::default();
    let mut files: Vec<&Value> = Vec::new();
    match v.get("releases") {
        Some(Value::Object(releases)) => {
            for entries in releases.values() {
                match entries {
                    Value::Array(a) => files.extend(a.iter()),
                    _ => out.skipped += 1,
                }
            }
        }
        Some(_) => {
            return Err(Error::Parse {
                line: 0,
                msg: format!("document {doc_name}: \"releases\" is not an object"),
            })
        }
        None => match v.get("urls") {
            Some(Value::Array(a)) => files.extend(a.iter()),
            _ => {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("document {doc_name}: no \"releases\" or \"urls\" array"),
                })
            }
        },
    }
    for f in files {
        match f.get("size").and_then(Value::as_u64) {
            Some(s) => out.push_size(s),
            None => out.skipped += 1,
        }
    }
    Ok(out)
}

/// Parse one nonnegative decimal integer per line; blank lines ignored,
/// zeros skipped and counted.
pub fn ingest_plain(text: &str) -> Result<Ingest> {
    let mut out = Ingest::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let size: u64 = line.parse().map_err(|_| Error::Parse {
            line: i + 1,
            msg: format!("not a nonnegative integer: {line:?}"),
        })?;
        out.push_size(size);
    }
    Ok(out)
}

/// Normalized counts over integer `l_omega` bins.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodelengthHistogram {
    pub bins: BTreeMap<u64, u64>,
    pub total: u64,
}

impl CodelengthHistogram {
    /// Observed codelengths, ascending.
    pub fn lens(&self) -> Vec<u64> {
        self.bins.keys().copied().collect()
    }

    /// Normalized masses aligned with [`CodelengthHistogram::lens`].
    pub fn probs(&self) -> Vec<f64> {
        self.bins
            .values()
            .map(|&c| c as f64 / self.total as f64)
            .collect()
    }
}

/// Histogram the `l_omega` values of a size list (all sizes must be >= 1).
pub fn codelength_histogram(sizes: &[u64]) -> Result<CodelengthHistogram> {
    if sizes.is_empty() {
        return Err(Error::domain("codelength_histogram requires nonempty sizes"));
    }
    let mut bins = BTreeMap::new();
    for &s in sizes {
        *bins.entry(omega_len_u64(s)?).or_insert(0u64) += 1;
    }
    Ok(CodelengthHistogram {
        bins,
        total: sizes.len() as u64,
    })
}

/// Uniform law over the observed codelengths.
pub fn model_uniform(hist: &CodelengthHistogram) -> Vec<f64> {
    let l = hist.bins.len();
    vec![1.0 / l as f64; l]
}

/// `2^-l` renormalized over the observed codelengths.
pub fn model_pure_omega(hist: &CodelengthHistogram) -> Vec<f64> {
    let weights: Vec<f64> = hist.lens().iter().map(|&l| 2f64.powi(-(l as i32))).collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

/// Exponential fit of the observed log-histogram.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScaledFit {
    /// per-bit decay on the natural-log scale
    pub a: f64,
    /// offset
    pub c: f64,
    /// root-mean-square residual of the regression
    pub residual: f64,
}

/// Ordinary least squares of `-ln P_obs(l)` on `l` over nonzero bins.
/// `count_weighted` switches to bin-count weighting (sensitivity variant);
/// the default protocol is unweighted.
pub fn fit_scaled_with(hist: &CodelengthHistogram, count_weighted: bool) -> Result<ScaledFit> {
    if hist.bins.len() < 2 {
        return Err(Error::Fit("need at least two observed codelength bins".into()));
    }
    let lens = hist.lens();
    let probs = hist.probs();
    let weights: Vec<f64> = if count_weighted {
        hist.bins.values().map(|&c| c as f64).collect()
    } else {
        vec![1.0; lens.len()]
    };
    let wsum: f64 = weights.iter().sum();
    let xs: Vec<f64> = lens.iter().map(|&l| l as f64).collect();
    let ys: Vec<f64> = probs.iter().map(|&p| -p.ln()).collect();
    let mx: f64 = xs.iter().zip(&weights).map(|(x, w)| x * w).sum::<f64>() / wsum;
    let my: f64 = ys.iter().zip(&weights).map(|(y, w)| y * w).sum::<f64>() / wsum;
    let sxx: f64 = xs
        .iter()
        .zip(&weights)
        .map(|(x, w)| w * (x - mx) * (x - mx))
        .sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all observed codelengths coincide".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .zip(&weights)
        .map(|((x, y), w)| w * (x - mx) * (y - my))
        .sum();
    let a = sxy / sxx;
    let c = my - a * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .zip(&weights)
        .map(|((x, y), w)| w * (y - a * x - c) * (y - a * x - c))
        .sum();
    Ok(ScaledFit {
        a,
        c,
        residual: (ss / wsum).sqrt(),
    })
}

/// Unweighted fit (the default protocol).
pub fn fit_scaled(hist: &CodelengthHistogram) -> Result<ScaledFit> {
    fit_scaled_with(hist, false)
}

/// `exp(-a l - c)` renormalized over the observed codelengths.
pub fn model_scaled(hist: &CodelengthHistogram, fit: &ScaledFit) -> Vec<f64> {
    let weights: Vec<f64> = hist
        .lens()
        .iter()
        .map(|&l| (-fit.a * l as f64 - fit.c).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

/// `KL(P || Q)` in nats over a shared support.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::domain("kl_divergence requires equal supports"));
    }
    let mut kl = KahanSum::new();
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return Err(Error::domain("kl_divergence: Q vanishes where P does not"));
        }
        kl.add(pi * (pi / qi).ln());
    }
    Ok(kl.value().max(0.0))
}

/// Alignment diagnostics of a finite-support integer law, in bits.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Alignment {
    pub alignment: f64,
    pub entropy: f64,
    pub mean_len: f64,
}

/// `alignment = sum mu(n) (l_omega(n) + log2 mu(n))`; the identity
/// `mean_len = entropy + alignment` holds by construction.
pub fn gibbs_alignment(mu: &[(BigNat, f64)]) -> Result<Alignment> {
    if mu.is_empty() {
        return Err(Error::domain("gibbs_alignment requires nonempty support"));
    }
    let total: f64 = mu.iter().map(|&(_, w)| w).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!("masses must sum to 1, got {total}")));
    }
    let mut alignment = KahanSum::new();
    let mut entropy = KahanSum::new();
    let mut mean_len = KahanSum::new();
    for (n, w) in mu {
        if !(*w > 0.0) {
            return Err(Error::domain("masses must be strictly positive"));
        }
        let len = omega_len(n)? as f64;
        alignment.add(w * (len + w.log2()));
        entropy.add(-w * w.log2());
        mean_len.add(w * len);
    }
    Ok(Alignment {
        alignment: alignment.value(),
        entropy: entropy.value(),
        mean_len: mean_len.value(),
    })
}

/// Synthetic sizes whose codelength law is exactly `P(l) proportional to
/// exp(-a l)` over bit lengths `1..=b_max`: draw the bit length from the
/// tilted law (codelength depends only on bit length), then a uniform
/// mantissa.
pub fn synthetic_sizes<R: Rng + ?Sized>(
    a: f64,
    b_max: u64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<u64>> {
    if !(a > 0.0) || b_max < 2 || b_max > 63 {
        return Err(Error::domain("need a > 0 and 2 <= b_max <= 63"));
    }
    let lens: Vec<u64> = (1..=b_max)
        .map(|b| omega_len_u64(1u64 << (b - 1)))
        .collect::<Result<_>>()?;
    let lmin = lens[0];
    let weights: Vec<f64> = lens.iter().map(|&l| (-a * (l - lmin) as f64).exp()).collect();
    let z: f64 = weights.iter().sum();
    let mut cum = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w / z;
        cum.push(acc);
    }
    Ok((0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let b = cum.partition_point(|&c| c <= u) as u64 + 1;
            if b == 1 {
                1
            } else {
                (1u64 << (b - 1)) | rng.random_range(0..(1u64 << (b - 1)))
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::task_rng;

    #[test]
    fn debian_examples() {
        let got = ingest_debian("Package: foo\nSize: 1234\n\n").unwrap();
        assert_eq!(got.sizes, vec![1234]);
        assert_eq!(got.skipped, 0);

        let got = ingest_debian("Package: a\nSize: 5\n\nPackage: b\n").unwrap();
        assert_eq!(got.sizes, vec![5]);
        assert_eq!(got.skipped, 1);

        let got = ingest_debian("Package: a\nSize: 0\n").unwrap();
        assert!(got.sizes.is_empty());
        assert_eq!(got.skipped, 1);

        let err = ingest_debian("Package: a\nnonsense line\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));

        let got =
            ingest_debian("Package: a\nDescription: x\n continued text\nSize: 9\n").unwrap();
        assert_eq!(got.sizes, vec![9]);
    }

    #[test]
    fn pypi_examples() {
        let doc = r#"{"releases": {"1.0": [{"size": 10}, {"size": 20}]}}"#;
        let got = ingest_pypi("foo", doc).unwrap();
        assert_eq!(got.sizes, vec![10, 20]);

        let got = ingest_pypi("foo", r#"{"releases": {}}"#).unwrap();
        assert!(got.sizes.is_empty());

        let got = ingest_pypi("foo", r#"{"releases": {"1.0": [{"size": "10"}]}}"#).unwrap();
        assert!(got.sizes.is_empty());
        assert_eq!(got.skipped, 1);

        assert!(ingest_pypi("foo", "{not json").is_err());
        assert!(ingest_pypi("foo", "{}").is_err());

        let got = ingest_pypi("foo", r#"{"urls": [{"size": 7}]}"#).unwrap();
        assert_eq!(got.sizes, vec![7]);
    }

    #[test]
    fn plain_examples() {
        let got = ingest_plain("5\n7\n").unwrap();
        assert_eq!(got.sizes, vec![5, 7]);
        assert!(ingest_plain("").unwrap().sizes.is_empty());
        let err = ingest_plain("x").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let got = ingest_plain("0\n\n3\n").unwrap();
        assert_eq!(got.sizes, vec![3]);
        assert_eq!(got.skipped, 1);
    }

    #[test]
    fn histogram_examples() {
        let h = codelength_histogram(&[2, 3, 4]).unwrap();
        assert_eq!(h.bins.get(&3), Some(&2));
        assert_eq!(h.bins.get(&6), Some(&1));
        assert_eq!(h.probs(), vec![2.0 / 3.0, 1.0 / 3.0]);

        let h = codelength_histogram(&[1]).unwrap();
        assert_eq!(h.lens(), vec![1]);
        assert_eq!(h.probs(), vec![1.0]);

        let h = codelength_histogram(&[16, 16]).unwrap();
        assert_eq!(h.lens(), vec![11]);
        assert!(codelength_histogram(&[]).is_err());
    }

    #[test]
    fn model_examples() {
        let h = codelength_histogram(&[2, 3, 4]).unwrap(); // bins {3, 6}
        assert_eq!(model_uniform(&h), vec![0.5, 0.5]);
        let pure = model_pure_omega(&h);
        assert!((pure[0] - 8.0 / 9.0).abs() < 1e-15);
        assert!((pure[1] - 1.0 / 9.0).abs() < 1e-15);

        let h34 = CodelengthHistogram {
            bins: BTreeMap::from([(3u64, 1u64), (4, 1)]),
            total: 2,
        };
        let pure = model_pure_omega(&h34);
        assert!((pure[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn fit_recovers_exact_exponential() {
        // bins with P(l) proportional to e^{-0.5 l} for l in 10..=30
        let n_per = 1_000_000_000_000_000u64;
        let bins: BTreeMap<u64, u64> = (10u64..=30)
            .map(|l| (l, ((-0.5 * l as f64).exp() * n_per as f64) as u64))
            .collect();
        let total = bins.values().sum();
        let h = CodelengthHistogram { bins, total };
        let fit = fit_scaled(&h).unwrap();
        assert!((fit.a - 0.5).abs() < 1e-6, "a={}", fit.a);
        assert!(fit.residual < 1e-6);

        let scaled = model_scaled(&h, &fit);
        for (p, q) in h.probs().iter().zip(&scaled) {
            assert!((p - q).abs() < 1e-6);
        }
    }

    #[test]
    fn two_bins_interpolate_exactly() {
        let h = CodelengthHistogram {
            bins: BTreeMap::from([(3u64, 30u64), (6, 10)]),
            total: 40,
        };
        let fit = fit_scaled(&h).unwrap();
        assert!(fit.residual < 1e-12);
        let one_bin = CodelengthHistogram {
            bins: BTreeMap::from([(3u64, 1u64)]),
            total: 1,
        };
        assert!(fit_scaled(&one_bin).is_err());
    }

    #[test]
    fn scaled_with_a_ln2_equals_pure() {
        let h = codelength_histogram(&[1, 2, 5, 16, 100, 1000]).unwrap();
        let fit = ScaledFit {
            a: std::f64::consts::LN_2,
            c: 0.0,
            residual: 0.0,
        };
        let scaled = model_scaled(&h, &fit);
        let pure = model_pure_omega(&h);
        for (p, q) in scaled.iter().zip(&pure) {
            assert!((p - q).abs() < 1e-12);
        }
        // a = 0 degenerates to uniform
        let flat = model_scaled(&h, &ScaledFit { a: 0.0, c: 1.0, residual: 0.0 });
        for (p, q) in flat.iter().zip(&model_uniform(&h)) {
            assert!((p - q).abs() < 1e-15);
        }
    }

    #[test]
    fn kl_examples() {
        let p = [0.5, 0.5];
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let q = [0.75, 0.25];
        let want = 0.5 * (2.0f64 / 3.0).ln() + 0.5 * 2.0f64.ln();
        let got = kl_divergence(&p, &q).unwrap();
        assert!((got - want).abs() < 1e-15);
        assert!((got - 0.14384).abs() < 1e-5);

        let got = kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((got - 2.0f64.ln()).abs() < 1e-15);
        assert!(kl_divergence(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn alignment_examples() {
        let point = vec![(BigNat::from(5u64), 1.0)];
        let a = gibbs_alignment(&point).unwrap();
        assert_eq!(a.entropy, 0.0);
        assert!((a.mean_len - 6.0).abs() < 1e-12);
        assert!((a.alignment - 6.0).abs() < 1e-12);

        // renormalized 2^-l over {1,2,3}: alignment = -log2 kraft(3)
        let k = crate::omega::kraft_partial_sum(3).unwrap();
        let mu: Vec<(BigNat, f64)> = [1u64, 2, 3]
            .iter()
            .map(|&n| {
                let l = omega_len_u64(n).unwrap();
                (BigNat::from(n), 2f64.powi(-(l as i32)) / k)
            })
            .collect();
        let a = gibbs_alignment(&mu).unwrap();
        assert!((a.alignment + k.log2()).abs() < 1e-12);
        assert!((a.alignment - 0.415).abs() < 1e-3);

        let uni = vec![(BigNat::from(2u64), 0.5), (BigNat::from(3u64), 0.5)];
        let a = gibbs_alignment(&uni).unwrap();
        assert!((a.entropy - 1.0).abs() < 1e-12);
        assert!((a.mean_len - 3.0).abs() < 1e-12);
        assert!((a.alignment - 2.0).abs() < 1e-12);
    }

    #[test]
    fn alignment_identity_holds() {
        let mut rng = task_rng(8, 0);
        for _ in 0..20 {
            let support: Vec<u64> = (0..10).map(|_| rng.random_range(1..100_000)).collect();
            let raw: Vec<f64> = (0..10).map(|_| rng.random::<f64>() + 0.01).collect();
            let z: f64 = raw.iter().sum();
            let mu: Vec<(BigNat, f64)> = support
                .iter()
                .zip(&raw)
                .map(|(&n, &w)| (BigNat::from(n), w / z))
                .collect();
            let a = gibbs_alignment(&mu).unwrap();
            assert!((a.mean_len - (a.entropy + a.alignment)).abs() < 1e-12);
        }
    }

    #[test]
    fn synthetic_sizes_follow_the_target_law() {
        let mut rng = task_rng(9, 0);
        let sizes = synthetic_sizes(0.45, 24, 50_000, &mut rng).unwrap();
        let h = codelength_histogram(&sizes).unwrap();
        let fit = fit_scaled(&h).unwrap();
        assert!((fit.a - 0.45).abs() < 0.02, "a={}", fit.a);
    }
}
