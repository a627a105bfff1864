use std::collections::BTreeMap;

use crate::signal::F0Track;
use crate::{Error, Result};

/// One (system, listener) cell of a listening-test table: the listener's
/// average score on the 1-5 naturalness scale, optionally with the standard
/// deviation of their per-sentence scores.
#[derive(Debug, Clone, PartialEq)]
pub struct MosRow {
    pub system: String,
    pub listener: String,
    pub score: f64,
    pub stdev: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MosTable {
    pub rows: Vec<MosRow>,
}

/// Per-system aggregate over listeners.
#[derive(Debug, Clone, PartialEq)]
pub struct MosSummary {
    pub system: String,
    pub mean: f64,
    /// Mean of per-listener standard deviations, when every row carries one.
    pub stdev_mean: Option<f64>,
    pub listeners: usize,
}

/// Parses `system,listener,score[,stdev]` CSV into a table.
pub fn parse_mos_csv(text: &str) -> Result<MosTable> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Eval("empty MOS file".into()))?
        .1
        .trim();
    if header != "system,listener,score" && header != "system,listener,score,stdev" {
        return Err(Error::Eval(format!(
            "bad MOS header '{header}': expected 'system,listener,score[,stdev]'"
        )));
    }
    let mut rows = Vec::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.trim().split(',').map(str::trim).collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(Error::Eval(format!("MOS line {}: expected 3 or 4 fields", n + 1)));
        }
        let score: f64 = fields[2]
            .parse()
            .map_err(|_| Error::Eval(format!("MOS line {}: bad score '{}'", n + 1, fields[2])))?;
        let stdev = match fields.get(3) {
            Some(s) => Some(s.parse::<f64>().map_err(|_| {
                Error::Eval(format!("MOS line {}: bad stdev '{s}'", n + 1))
            })?),
            None => None,
        };
        rows.push(MosRow {
            system: fields[0].to_string(),
            listener: fields[1].to_string(),
            score,
            stdev,
        });
    }
    Ok(MosTable { rows })
}

/// Arithmetic mean across listeners per system, in first-appearance order.
pub fn aggregate_mos(table: &MosTable) -> Result<Vec<MosSummary>> {
    if table.rows.is_empty() {
        return Err(Error::Eval("empty MOS table".into()));
    }
    let mut order = Vec::new();
    let mut acc: BTreeMap<&str, (f64, Vec<f64>, usize)> = BTreeMap::new();
    for row in &table.rows {
        if !(1.0..=5.0).contains(&row.score) {
            return Err(Error::Eval(format!(
                "score {} for {}/{} outside the 1-5 scale",
                row.score, row.system, row.listener
            )));
        }
        let entry = acc.entry(&row.system).or_insert_with(|| {
            order.push(row.system.clone());
            (0.0, Vec::new(), 0)
        });
        entry.0 += row.score;
        if let Some(s) = row.stdev {
            entry.1.push(s);
        }
        entry.2 += 1;
    }
    Ok(order
        .into_iter()
        .map(|system| {
            let (sum, stdevs, n) = &acc[system.as_str()];
            MosSummary {
                mean: sum / *n as f64,
                stdev_mean: (stdevs.len() == *n)
                    .then(|| stdevs.iter().sum::<f64>() / *n as f64),
                listeners: *n,
                system,
            }
        })
        .collect())
}

/// F0-contour comparison over the common prefix of two tracks.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Comparison {
    /// RMSE in Hz over mutually voiced frames; absent when there are none.
    pub rmse_hz: Option<f64>,
    /// Fraction of frames on which the voiced/unvoiced decision agrees.
    pub voicing_agreement: f64,
    pub frames: usize,
    pub mutual_voiced: usize,
}

pub fn compare_f0(natural: &F0Track, synthesized: &F0Track) -> Result<F0Comparison> {
    let frames = natural.len().min(synthesized.len());
    if frames == 0 {
        return Err(Error::Eval("no frames to compare".into()));
    }
    let mut agree = 0usize;
    let mut mutual = 0usize;
    let mut sq_sum = 0.0;
    for (a, b) in natural.0[..frames].iter().zip(&synthesized.0[..frames]) {
        if a.is_some() == b.is_some() {
            agree += 1;
        }
        if let (Some(la), Some(lb)) = (a, b) {
            mutual += 1;
            let d = la.exp() - lb.exp();
            sq_sum += d * d;
        }
    }
    Ok(F0Comparison {
        rmse_hz: (mutual > 0).then(|| (sq_sum / mutual as f64).sqrt()),
        voicing_agreement: agree as f64 / frames as f64,
        frames,
        mutual_voiced: mutual,
    })
}

/// Mel-cepstral distortion over the common prefix, in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralComparison {
    pub mean_mcd_db: f64,
    pub per_frame_db: Vec<f64>,
}

const MCD_SCALE: f64 = 10.0 * std::f64::consts::SQRT_2 / std::f64::consts::LN_10;

pub fn compare_spectra(natural: &[Vec<f64>], synthesized: &[Vec<f64>]) -> Result<SpectralComparison> {
    let frames = natural.len().min(synthesized.len());
    if frames == 0 {
        return Err(Error::Eval("no frames to compare".into()));
    }
    let dim = natural[0].len();
    for c in natural.iter().chain(synthesized.iter()) {
        if c.len() != dim {
            return Err(Error::Eval(format!(
                "mel-cepstral order mismatch: {} vs {} coefficients",
                dim,
                c.len()
            )));
        }
    }
    if dim < 2 {
        return Err(Error::Eval("mel-cepstra need at least c0 and c1".into()));
    }
    let per_frame_db: Vec<f64> = natural[..frames]
        .iter()
        .zip(&synthesized[..frames])
        .map(|(a, b)| {
            let sq: f64 = a[1..]
                .iter()
                .zip(&b[1..])
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            MCD_SCALE * sq.sqrt()
        })
        .collect();
    Ok(SpectralComparison {
        mean_mcd_db: per_frame_db.iter().sum::<f64>() / frames as f64,
        per_frame_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE_4: &str = "\
system,listener,score,stdev
Original,L1,4.9,0.31
Original,L2,4.3,1.05
Original,L3,4.7,0.48
Original,L4,4.9,0.31
Original,L5,4.5,0.70
ESNOLA,L1,2.5,0.42
ESNOLA,L2,2.1,0.71
ESNOLA,L3,2.3,0.69
ESNOLA,L4,2.6,0.51
ESNOLA,L5,2.2,0.78
HTS,L1,3.7,0.48
HTS,L2,3.2,0.78
HTS,L3,3.9,0.56
HTS,L4,3.8,0.42
HTS,L5,3.4,0.69
";

    #[test]
    fn listening_test_fixture_aggregates_to_published_means() {
        let table = parse_mos_csv(TABLE_4).unwrap();
        let summary = aggregate_mos(&table).unwrap();
        assert_eq!(summary.len(), 3);
        let expect = [("Original", 4.66), ("ESNOLA", 2.34), ("HTS", 3.60)];
        for (s, (name, mean)) in summary.iter().zip(expect) {
            assert_eq!(s.system, name);
            assert_eq!(s.listeners, 5);
            assert!((s.mean - mean).abs() < 0.005, "{name}: {}", s.mean);
            assert_eq!(format!("{:.2}", s.mean), format!("{mean:.2}"));
        }
        // Mean of per-listener stdevs, from the same table.
        let stdev_means = [0.57, 0.622, 0.586];
        for (s, m) in summary.iter().zip(stdev_means) {
            assert!((s.stdev_mean.unwrap() - m).abs() < 1e-12);
        }
    }

    #[test]
    fn aggregate_matches_the_mean_oracle_exactly() {
        let table = parse_mos_csv(TABLE_4).unwrap();
        let summary = aggregate_mos(&table).unwrap();
        for s in &summary {
            let scores: Vec<f64> = table
                .rows
                .iter()
                .filter(|r| r.system == s.system)
                .map(|r| r.score)
                .collect();
            let oracle = scores.iter().sum::<f64>() / scores.len() as f64;
            assert!((s.mean - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn scores_outside_the_scale_are_rejected() {
        let table = parse_mos_csv("system,listener,score\nA,L1,5.1\n").unwrap();
        assert!(aggregate_mos(&table).is_err());
        let table = parse_mos_csv("system,listener,score\nA,L1,0.9\n").unwrap();
        assert!(aggregate_mos(&table).is_err());
        assert!(aggregate_mos(&MosTable::default()).is_err());
    }

    #[test]
    fn mos_csv_rejects_malformed_input() {
        assert!(parse_mos_csv("").is_err());
        assert!(parse_mos_csv("system;listener;score\n").is_err());
        assert!(parse_mos_csv("system,listener,score\nA,L1\n").is_err());
        assert!(parse_mos_csv("system,listener,score\nA,L1,abc\n").is_err());
    }

    fn voiced(hz: f64) -> Option<f64> {
        Some(hz.ln())
    }

    #[test]
    fn identical_tracks_have_zero_rmse_and_full_agreement() {
        let t = F0Track(vec![voiced(120.0), None, voiced(200.0), voiced(300.0)]);
        let c = compare_f0(&t, &t).unwrap();
        assert_eq!(c.rmse_hz, Some(0.0));
        assert_eq!(c.voicing_agreement, 1.0);
        assert_eq!(c.frames, 4);
        assert_eq!(c.mutual_voiced, 3);
    }

    #[test]
    fn constant_offset_gives_that_rmse() {
        let nat = F0Track(vec![voiced(120.0), voiced(200.0), None, voiced(300.0)]);
        let syn = F0Track(vec![voiced(130.0), voiced(210.0), None, voiced(310.0)]);
        let c = compare_f0(&nat, &syn).unwrap();
        assert!((c.rmse_hz.unwrap() - 10.0).abs() < 1e-9);
        assert_eq!(c.voicing_agreement, 1.0);
    }

    #[test]
    fn all_unvoiced_track_has_no_rmse() {
        let nat = F0Track(vec![voiced(120.0), None, voiced(200.0), None]);
        let syn = F0Track(vec![None; 4]);
        let c = compare_f0(&nat, &syn).unwrap();
        assert_eq!(c.rmse_hz, None);
        assert_eq!(c.voicing_agreement, 0.5);
        assert!(compare_f0(&F0Track(vec![]), &syn).is_err());
    }

    #[test]
    fn f0_comparison_is_symmetric() {
        let a = F0Track(vec![voiced(110.0), None, voiced(190.0), voiced(250.0), None]);
        let b = F0Track(vec![voiced(115.0), voiced(90.0), None, voiced(240.0)]);
        let ab = compare_f0(&a, &b).unwrap();
        let ba = compare_f0(&b, &a).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn identical_spectra_have_zero_distortion() {
        let seq = vec![vec![1.0, 0.5, -0.25], vec![0.8, 0.4, -0.2]];
        let c = compare_spectra(&seq, &seq).unwrap();
        assert_eq!(c.mean_mcd_db, 0.0);
        assert_eq!(c.per_frame_db, vec![0.0, 0.0]);
    }

    #[test]
    fn unit_difference_hits_the_closed_form() {
        // c0 differs too and must not contribute.
        let nat = vec![vec![3.0, 1.0, 0.0]];
        let syn = vec![vec![0.0, 0.0, 0.0]];
        let c = compare_spectra(&nat, &syn).unwrap();
        assert!((c.mean_mcd_db - MCD_SCALE).abs() < 1e-12);
        assert!((c.mean_mcd_db - 6.1421).abs() < 5e-4);
    }

    #[test]
    fn two_frame_case_averages_per_frame_distortions() {
        // Frame 0 diff (1..): (0.3, -0.4) norm 0.5; frame 1 diff (1.0, 0.0) norm 1.
        let nat = vec![vec![1.0, 0.5, 0.2], vec![2.0, 1.5, -0.3]];
        let syn = vec![vec![9.0, 0.2, 0.6], vec![2.0, 0.5, -0.3]];
        let c = compare_spectra(&nat, &syn).unwrap();
        let oracle = (MCD_SCALE * 0.5 + MCD_SCALE * 1.0) / 2.0;
        assert!((c.mean_mcd_db - oracle).abs() < 1e-12);
    }

    #[test]
    fn spectral_comparison_is_symmetric_and_checks_orders() {
        let nat = vec![vec![1.0, 0.5, 0.2], vec![2.0, 1.5, -0.3], vec![0.0, 0.1, 0.2]];
        let syn = vec![vec![0.3, 0.2, 0.6], vec![2.5, 0.5, -0.1]];
        let ab = compare_spectra(&nat, &syn).unwrap();
        let ba = compare_spectra(&syn, &nat).unwrap();
        assert_eq!(ab, ba);
        let err = compare_spectra(&nat, &[vec![1.0, 2.0]]).unwrap_err();
        assert!(err.to_string().contains("order mismatch"), "{err}");
        assert!(compare_spectra(&nat, &[]).is_err());
    }
}
