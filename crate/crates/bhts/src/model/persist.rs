use std::collections::BTreeMap;
use std::path::Path;

use super::gaussian::{DurationGaussian, MSDGaussian, StreamGaussian};
use super::hmm::{
    GVModel, HmmState, ModelSet, PhoneHMM, Stream, TiedPools, MODEL_VERSION, NUM_STATES,
};
use super::question::{Predicate, Question};
use super::tree::{DecisionTree, TreeNode};
use crate::signal::{AnalysisConfig, DeltaWindows};
use crate::util::{crc32, write_atomic};
use crate::{Error, Result};

const MAGIC: &[u8; 6] = b"BHTSM1";

fn corrupt(msg: &str) -> Error {
    Error::ModelFile(msg.to_string())
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }
    fn f64s(&mut self, values: &[f64]) {
        self.u32(values.len() as u32);
        for v in values {
            self.f64(*v);
        }
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Reader { data, pos: 0 }
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.data.len())
            .ok_or_else(|| corrupt("model file truncated"))?;
        let slice = &self.data[self.pos..end];
        self.pos = end;
        Ok(slice)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn str(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| corrupt("invalid UTF-8 in model string"))
    }
    fn f64s(&mut self) -> Result<Vec<f64>> {
        let len = self.u32()? as usize;
        if len > self.data.len().saturating_sub(self.pos) / 8 {
            return Err(corrupt("model file truncated"));
        }
        (0..len).map(|_| self.f64()).collect()
    }
}

fn put_gaussian(w: &mut Writer, g: &StreamGaussian) {
    w.f64s(&g.mean);
    w.f64s(&g.variance);
}

fn get_gaussian(r: &mut Reader) -> Result<StreamGaussian> {
    let mean = r.f64s()?;
    let variance = r.f64s()?;
    if mean.len() != variance.len() {
        return Err(corrupt("gaussian mean/variance length mismatch"));
    }
    Ok(StreamGaussian { mean, variance })
}

fn put_msd(w: &mut Writer, g: &MSDGaussian) {
    w.f64(g.voiced_weight);
    put_gaussian(w, &g.gaussian);
}

fn get_msd(r: &mut Reader) -> Result<MSDGaussian> {
    let voiced_weight = r.f64()?;
    if !(0.0..=1.0).contains(&voiced_weight) {
        return Err(corrupt("voiced weight outside [0, 1]"));
    }
    Ok(MSDGaussian {
        voiced_weight,
        gaussian: get_gaussian(r)?,
    })
}

fn put_duration(w: &mut Writer, d: &DurationGaussian) {
    w.f64(d.mean);
    w.f64(d.variance);
}

fn get_duration(r: &mut Reader) -> Result<DurationGaussian> {
    Ok(DurationGaussian {
        mean: r.f64()?,
        variance: r.f64()?,
    })
}

fn put_hmm(w: &mut Writer, hmm: &PhoneHMM) {
    for state in &hmm.states {
        put_gaussian(w, &state.spectrum);
        put_msd(w, &state.excitation);
        w.f64(state.self_loop);
    }
    for d in &hmm.durations {
        put_duration(w, d);
    }
}

fn get_hmm(r: &mut Reader) -> Result<PhoneHMM> {
    let mut states = Vec::with_capacity(NUM_STATES);
    for _ in 0..NUM_STATES {
        states.push(HmmState {
            spectrum: get_gaussian(r)?,
            excitation: get_msd(r)?,
            self_loop: r.f64()?,
        });
    }
    let durations = (0..NUM_STATES).map(|_| get_duration(r)).collect::<Result<_>>()?;
    Ok(PhoneHMM { states, durations })
}

fn put_question(w: &mut Writer, q: &Question) {
    w.str(&q.name);
    w.str(&q.field);
    match &q.predicate {
        Predicate::InSet(set) => {
            w.u8(0);
            w.u32(set.len() as u32);
            for s in set {
                w.str(s);
            }
        }
        Predicate::LessEq(t) => {
            w.u8(1);
            w.u32(*t);
        }
        Predicate::Eq(t) => {
            w.u8(2);
            w.u32(*t);
        }
    }
}

fn get_question(r: &mut Reader) -> Result<Question> {
    let name = r.str()?;
    let field = r.str()?;
    let predicate = match r.u8()? {
        0 => {
            let n = r.u32()? as usize;
            let mut set = std::collections::BTreeSet::new();
            for _ in 0..n {
                set.insert(r.str()?);
            }
            Predicate::InSet(set)
        }
        1 => Predicate::LessEq(r.u32()?),
        2 => Predicate::Eq(r.u32()?),
        other => return Err(corrupt(&format!("unknown predicate tag {other}"))),
    };
    Ok(Question {
        name,
        field,
        predicate,
    })
}

fn put_tree(w: &mut Writer, tree: &DecisionTree) {
    w.u32(tree.nodes.len() as u32);
    for node in &tree.nodes {
        match node {
            TreeNode::Leaf { id } => {
                w.u8(0);
                w.u32(*id);
            }
            TreeNode::Internal { question, yes, no } => {
                w.u8(1);
                w.u32(*yes);
                w.u32(*no);
                put_question(w, question);
            }
        }
    }
}

fn get_tree(r: &mut Reader) -> Result<DecisionTree> {
    let n = r.u32()? as usize;
    let mut nodes = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        nodes.push(match r.u8()? {
            0 => TreeNode::Leaf { id: r.u32()? },
            1 => {
                let yes = r.u32()?;
                let no = r.u32()?;
                TreeNode::Internal {
                    question: get_question(r)?,
                    yes,
                    no,
                }
            }
            other => return Err(corrupt(&format!("unknown tree node tag {other}"))),
        });
    }
    let tree = DecisionTree { nodes };
    tree.validate()?;
    Ok(tree)
}

fn put_model_table(w: &mut Writer, table: &BTreeMap<String, PhoneHMM>) {
    w.u32(table.len() as u32);
    for (key, hmm) in table {
        w.str(key);
        put_hmm(w, hmm);
    }
}

fn get_model_table(r: &mut Reader) -> Result<BTreeMap<String, PhoneHMM>> {
    let n = r.u32()? as usize;
    let mut table = BTreeMap::new();
    for _ in 0..n {
        let key = r.str()?;
        let hmm = get_hmm(r)?;
        table.insert(key, hmm);
    }
    Ok(table)
}

fn config_section(m: &ModelSet) -> Vec<u8> {
    let mut w = Writer::default();
    let c = &m.config;
    w.u32(c.sample_rate);
    w.u64(c.frame_length as u64);
    w.u64(c.frame_shift as u64);
    w.u64(c.mcep_order as u64);
    w.u64(c.fft_size as u64);
    w.u64(c.cepstrum_len as u64);
    w.f64(c.alpha);
    w.f64(c.spectrum_floor);
    w.f64(c.f0_min_hz);
    w.f64(c.f0_max_hz);
    w.f64(c.voicing_threshold);
    w.u32(m.inventory_hash);
    w.buf
}

fn parse_config(r: &mut Reader) -> Result<(AnalysisConfig, u32)> {
    let config = AnalysisConfig {
        sample_rate: r.u32()?,
        frame_length: r.u64()? as usize,
        frame_shift: r.u64()? as usize,
        mcep_order: r.u64()? as usize,
        fft_size: r.u64()? as usize,
        cepstrum_len: r.u64()? as usize,
        alpha: r.f64()?,
        spectrum_floor: r.f64()?,
        f0_min_hz: r.f64()?,
        f0_max_hz: r.f64()?,
        voicing_threshold: r.f64()?,
    };
    let hash = r.u32()?;
    Ok((config, hash))
}

/// Serializes a model set to its canonical byte form: magic, version, six
/// tagged sections, trailing CRC32.
pub fn model_set_to_bytes(m: &ModelSet) -> Vec<u8> {
    let mut sections: Vec<(&[u8; 4], Vec<u8>)> = Vec::new();
    sections.push((b"CFG ", config_section(m)));
    let mut w = Writer::default();
    for window in &m.windows.windows {
        w.f64s(window);
    }
    sections.push((b"WIN ", w.buf));
    let mut w = Writer::default();
    put_model_table(&mut w, &m.monophones);
    sections.push((b"MONO", w.buf));
    let mut w = Writer::default();
    put_model_table(&mut w, &m.fullcontext);
    sections.push((b"FULL", w.buf));
    let mut w = Writer::default();
    w.u32(m.trees.len() as u32);
    for ((state, stream), tree) in &m.trees {
        w.u8(*state);
        w.u8(stream.to_u8());
        put_tree(&mut w, tree);
    }
    sections.push((b"TREE", w.buf));
    let mut w = Writer::default();
    w.u32(m.tied.spectrum.len() as u32);
    for g in &m.tied.spectrum {
        put_gaussian(&mut w, g);
    }
    w.u32(m.tied.excitation.len() as u32);
    for g in &m.tied.excitation {
        put_msd(&mut w, g);
    }
    w.u32(m.tied.duration.len() as u32);
    for d in &m.tied.duration {
        put_duration(&mut w, d);
    }
    sections.push((b"TIED", w.buf));
    let mut w = Writer::default();
    match &m.gv {
        Some(gv) => {
            w.u8(1);
            w.f64s(&gv.mean);
            w.f64s(&gv.variance);
        }
        None => w.u8(0),
    }
    sections.push((b"GV  ", w.buf));

    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&m.version.to_le_bytes());
    for (tag, payload) in sections {
        out.extend_from_slice(tag.as_slice());
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&payload);
    }
    let sum = crc32(&out);
    out.extend_from_slice(&sum.to_le_bytes());
    out
}

pub fn save_model_set(m: &ModelSet, path: &Path) -> Result<()> {
    write_atomic(path, &model_set_to_bytes(m))
}

/// Parses the canonical byte form back into a model set, verifying magic,
/// version, checksum, and structural invariants.
pub fn model_set_from_bytes(data: &[u8]) -> Result<ModelSet> {
    if data.len() < MAGIC.len() + 8 {
        return Err(corrupt("model file truncated"));
    }
    if &data[..MAGIC.len()] != MAGIC {
        return Err(corrupt("not a model file"));
    }
    let body = &data[..data.len() - 4];
    let stored = u32::from_le_bytes(data[data.len() - 4..].try_into().unwrap());
    if crc32(body) != stored {
        return Err(corrupt("model file checksum mismatch (corrupt or truncated)"));
    }
    let mut r = Reader::new(&body[MAGIC.len()..]);
    let version = r.u32()?;
    if version != MODEL_VERSION {
        return Err(corrupt(&format!(
            "unsupported model version {version}, expected {MODEL_VERSION}"
        )));
    }

    let section = |r: &mut Reader<'_>, tag: &[u8; 4]| -> Result<usize> {
        let found = r.take(4)?;
        if found != tag {
            return Err(corrupt(&format!(
                "expected section {:?}, found {:?}",
                String::from_utf8_lossy(tag),
                String::from_utf8_lossy(found)
            )));
        }
        let len = r.u64()? as usize;
        Ok(r.pos + len)
    };
    let close = |r: &Reader<'_>, end: usize, tag: &str| -> Result<()> {
        if r.pos != end {
            return Err(corrupt(&format!("section {tag} length mismatch")));
        }
        Ok(())
    };

    let end = section(&mut r, b"CFG ")?;
    let (config, inventory_hash) = parse_config(&mut r)?;
    close(&r, end, "CFG")?;

    let end = section(&mut r, b"WIN ")?;
    let windows = DeltaWindows {
        windows: [r.f64s()?, r.f64s()?, r.f64s()?],
    };
    close(&r, end, "WIN")?;

    let end = section(&mut r, b"MONO")?;
    let monophones = get_model_table(&mut r)?;
    close(&r, end, "MONO")?;

    let end = section(&mut r, b"FULL")?;
    let fullcontext = get_model_table(&mut r)?;
    close(&r, end, "FULL")?;

    let end = section(&mut r, b"TREE")?;
    let n_trees = r.u32()? as usize;
    let mut trees = BTreeMap::new();
    for _ in 0..n_trees {
        let state = r.u8()?;
        if state as usize >= NUM_STATES {
            return Err(corrupt(&format!("tree state index {state} out of range")));
        }
        let stream = Stream::from_u8(r.u8()?)?;
        let tree = get_tree(&mut r)?;
        trees.insert((state, stream), tree);
    }
    close(&r, end, "TREE")?;

    let end = section(&mut r, b"TIED")?;
    let mut tied = TiedPools::default();
    for _ in 0..r.u32()? {
        tied.spectrum.push(get_gaussian(&mut r)?);
    }
    for _ in 0..r.u32()? {
        tied.excitation.push(get_msd(&mut r)?);
    }
    for _ in 0..r.u32()? {
        tied.duration.push(get_duration(&mut r)?);
    }
    close(&r, end, "TIED")?;

    let end = section(&mut r, b"GV  ")?;
    let gv = match r.u8()? {
        0 => None,
        1 => Some(GVModel {
            mean: r.f64s()?,
            variance: r.f64s()?,
        }),
        other => return Err(corrupt(&format!("unknown GV presence tag {other}"))),
    };
    close(&r, end, "GV")?;

    if r.pos != r.data.len() {
        return Err(corrupt("trailing bytes after final section"));
    }

    let m = ModelSet {
        version,
        config,
        windows,
        inventory_hash,
        monophones,
        fullcontext,
        trees,
        tied,
        gv,
    };
    m.validate()?;
    Ok(m)
}

pub fn load_model_set(path: &Path) -> Result<ModelSet> {
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    model_set_from_bytes(&data)
}
