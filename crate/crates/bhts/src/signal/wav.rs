use std::path::Path;

use super::Waveform;
use crate::util::write_atomic;
use crate::{Error, Result};

fn wav_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Wav {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

fn read_u16(buf: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([buf[at], buf[at + 1]])
}

fn read_u32(buf: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([buf[at], buf[at + 1], buf[at + 2], buf[at + 3]])
}

/// Reads a mono 16-bit PCM RIFF/WAVE file; samples are scaled to
/// `i / 32768` so the nominal range is `[-1, 1)`.
pub fn read_wav(path: &Path) -> Result<Waveform> {
    let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if buf.len() < 12 || &buf[0..4] != b"RIFF" || &buf[8..12] != b"WAVE" {
        return Err(wav_err(path, "not a RIFF/WAVE file"));
    }
    let mut pos = 12;
    let mut format: Option<(u16, u32, u16, u16)> = None;
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= buf.len() {
        let id = &buf[pos..pos + 4];
        let size = read_u32(&buf, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start + size;
        if body_end > buf.len() {
            return Err(wav_err(path, "chunk extends past end of file"));
        }
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(wav_err(path, "fmt chunk too short"));
                }
                format = Some((
                    read_u16(&buf, body_start),
                    read_u32(&buf, body_start + 4),
                    read_u16(&buf, body_start + 2),
                    read_u16(&buf, body_start + 14),
                ));
            }
            b"data" => data = Some(&buf[body_start..body_end]),
            _ => {}
        }
        pos = body_end + (size & 1);
    }
    let (audio_format, sample_rate, channels, bits) =
        format.ok_or_else(|| wav_err(path, "missing fmt chunk"))?;
    if audio_format != 1 {
        return Err(wav_err(path, format!("unsupported audio format {audio_format}")));
    }
    if channels != 1 {
        return Err(wav_err(path, format!("expected mono, got {channels} channels")));
    }
    if bits != 16 {
        return Err(wav_err(path, format!("expected 16-bit samples, got {bits}")));
    }
    let data = data.ok_or_else(|| wav_err(path, "missing data chunk"))?;
    if data.len() % 2 != 0 {
        return Err(wav_err(path, "odd data chunk length"));
    }
    let samples = data
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0)
        .collect();
    Ok(Waveform::new(samples, sample_rate))
}

/// Writes a mono 16-bit PCM RIFF/WAVE file; samples are clamped to the
/// representable range before quantization.
pub fn write_wav(path: &Path, waveform: &Waveform) -> Result<()> {
    let n = waveform.samples.len();
    let data_len = 2 * n;
    let mut buf = Vec::with_capacity(44 + data_len);
    buf.extend_from_slice(b"RIFF");
    buf.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    buf.extend_from_slice(b"WAVE");
    buf.extend_from_slice(b"fmt ");
    buf.extend_from_slice(&16u32.to_le_bytes());
    buf.extend_from_slice(&1u16.to_le_bytes());
    buf.extend_from_slice(&1u16.to_le_bytes());
    buf.extend_from_slice(&waveform.sample_rate.to_le_bytes());
    buf.extend_from_slice(&(waveform.sample_rate * 2).to_le_bytes());
    buf.extend_from_slice(&2u16.to_le_bytes());
    buf.extend_from_slice(&16u16.to_le_bytes());
    buf.extend_from_slice(b"data");
    buf.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in &waveform.samples {
        let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        buf.extend_from_slice(&q.to_le_bytes());
    }
    write_atomic(path, &buf)
}
