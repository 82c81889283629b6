//! Minimal RIFF/WAVE I/O: reads PCM 16/24-bit and 32-bit float (stereo is
//! downmixed to mono), writes 32-bit float mono.

use crate::error::{DeclipError, Result};
use crate::signal::Signal;
use std::io::{Read, Write};
use std::path::Path;

fn bad(msg: &str) -> DeclipError {
    DeclipError::Wav(msg.to_string())
}

fn u16le(b: &[u8]) -> u16 {
    u16::from_le_bytes([b[0], b[1]])
}

fn u32le(b: &[u8]) -> u32 {
    u32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

/// Read a WAV file into a mono signal; multichannel input is averaged.
pub fn read_wav(path: &Path) -> Result<Signal> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 44 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(bad("not a RIFF/WAVE file"));
    }
    let mut pos = 12;
    let mut format = 0u16;
    let mut channels = 0u16;
    let mut sample_rate = 0u32;
    let mut bits = 0u16;
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32le(&bytes[pos + 4..pos + 8]) as usize;
        let body_end = (pos + 8 + size).min(bytes.len());
        let body = &bytes[pos + 8..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(bad("fmt chunk too short"));
                }
                format = u16le(&body[0..2]);
                channels = u16le(&body[2..4]);
                sample_rate = u32le(&body[4..8]);
                bits = u16le(&body[14..16]);
                // WAVE_FORMAT_EXTENSIBLE: the real format is in the subformat GUID
                if format == 0xFFFE && body.len() >= 26 {
                    format = u16le(&body[24..26]);
                }
            }
            b"data" => data = Some(body),
            _ => {}
        }
        pos += 8 + size + (size & 1);
    }
    let data = data.ok_or_else(|| bad("missing data chunk"))?;
    if channels == 0 || sample_rate == 0 {
        return Err(bad("missing or empty fmt chunk"));
    }
    let ch = channels as usize;
    let frame_bytes = ch * (bits as usize / 8);
    if frame_bytes == 0 || data.len() % frame_bytes != 0 {
        return Err(bad("data chunk size inconsistent with format"));
    }
    let frames = data.len() / frame_bytes;
    let mut samples = Vec::with_capacity(frames);
    for fr in 0..frames {
        let mut acc = 0.0;
        for c in 0..ch {
            let off = fr * frame_bytes + c * (bits as usize / 8);
            let v = match (format, bits) {
                (1, 16) => i16::from_le_bytes([data[off], data[off + 1]]) as f64 / 32768.0,
                (1, 24) => {
                    let raw = ((data[off + 2] as i32) << 24
                        | (data[off + 1] as i32) << 16
                        | (data[off] as i32) << 8)
                        >> 8;
                    raw as f64 / 8_388_608.0
                }
                (3, 32) => f32::from_le_bytes([
                    data[off],
                    data[off + 1],
                    data[off + 2],
                    data[off + 3],
                ]) as f64,
                _ => return Err(bad("unsupported sample format (need PCM16/24 or float32)")),
            };
            acc += v;
        }
        samples.push(acc / ch as f64);
    }
    Signal::new(samples, sample_rate)
}

/// Write a mono 32-bit float WAV file.
pub fn write_wav(path: &Path, signal: &Signal) -> Result<()> {
    let n = signal.len();
    let data_size = (n * 4) as u32;
    let mut out = Vec::with_capacity(44 + n * 4);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_size).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&3u16.to_le_bytes()); // IEEE float
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&signal.sample_rate.to_le_bytes());
    out.extend_from_slice(&(signal.sample_rate * 4).to_le_bytes());
    out.extend_from_slice(&4u16.to_le_bytes());
    out.extend_from_slice(&32u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_size.to_le_bytes());
    for &s in &signal.samples {
        out.extend_from_slice(&(s as f32).to_le_bytes());
    }
    std::fs::File::create(path)?.write_all(&out)?;
    Ok(())
}
