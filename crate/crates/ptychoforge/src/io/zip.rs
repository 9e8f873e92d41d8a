//! Minimal deterministic ZIP archive reader/writer.
//!
//! Members are stored uncompressed with fixed timestamps so that equal
//! inputs produce byte-identical archives. Only the subset of the format
//! this crate writes is accepted when reading: stored entries, no
//! encryption, no zip64.

use std::io::{Read, Write};

use crate::error::{Error, Result};

const LOCAL_HEADER_SIG: u32 = 0x0403_4b50;
const CENTRAL_HEADER_SIG: u32 = 0x0201_4b50;
const EOCD_SIG: u32 = 0x0605_4b50;
/// 1980-01-01 00:00:00 in DOS date/time encoding (epoch of the format).
const DOS_TIME: u16 = 0;
const DOS_DATE: u16 = 0x0021;

/// IEEE CRC-32 (reflected, polynomial 0xEDB88320).
pub fn crc32(data: &[u8]) -> u32 {
    static TABLE: std::sync::OnceLock<[u32; 256]> = std::sync::OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut table = [0u32; 256];
        for (i, entry) in table.iter_mut().enumerate() {
            let mut crc = i as u32;
            for _ in 0..8 {
                crc = if crc & 1 != 0 { (crc >> 1) ^ 0xEDB8_8320 } else { crc >> 1 };
            }
            *entry = crc;
        }
        table
    });
    let mut crc = 0xFFFF_FFFFu32;
    for &byte in data {
        crc = (crc >> 8) ^ table[((crc ^ byte as u32) & 0xFF) as usize];
    }
    crc ^ 0xFFFF_FFFF
}

/// Serialize members (in the given order) into an archive byte stream.
pub fn write_archive<W: Write>(out: &mut W, members: &[(String, Vec<u8>)]) -> Result<()> {
    let mut offset = 0u64;
    let mut central = Vec::new();
    for (name, data) in members {
        if name.is_empty() || name.len() > u16::MAX as usize {
            return Err(Error::Archive(format!("invalid member name length {}", name.len())));
        }
        if data.len() > u32::MAX as usize {
            return Err(Error::Archive(format!("member `{name}` exceeds 4 GiB")));
        }
        let crc = crc32(data);
        let name_bytes = name.as_bytes();
        let size = data.len() as u32;

        let mut local = Vec::with_capacity(30 + name_bytes.len());
        local.extend_from_slice(&LOCAL_HEADER_SIG.to_le_bytes());
        local.extend_from_slice(&20u16.to_le_bytes()); // version needed
        local.extend_from_slice(&0u16.to_le_bytes()); // flags
        local.extend_from_slice(&0u16.to_le_bytes()); // method: stored
        local.extend_from_slice(&DOS_TIME.to_le_bytes());
        local.extend_from_slice(&DOS_DATE.to_le_bytes());
        local.extend_from_slice(&crc.to_le_bytes());
        local.extend_from_slice(&size.to_le_bytes());
        local.extend_from_slice(&size.to_le_bytes());
        local.extend_from_slice(&(name_bytes.len() as u16).to_le_bytes());
        local.extend_from_slice(&0u16.to_le_bytes()); // extra length
        local.extend_from_slice(name_bytes);
        out.write_all(&local)?;
        out.write_all(data)?;

        central.extend_from_slice(&CENTRAL_HEADER_SIG.to_le_bytes());
        central.extend_from_slice(&20u16.to_le_bytes()); // version made by
        central.extend_from_slice(&20u16.to_le_bytes()); // version needed
        central.extend_from_slice(&0u16.to_le_bytes());
        central.extend_from_slice(&0u16.to_le_bytes());
        central.extend_from_slice(&DOS_TIME.to_le_bytes());
        central.extend_from_slice(&DOS_DATE.to_le_bytes());
        central.extend_from_slice(&crc.to_le_bytes());
        central.extend_from_slice(&size.to_le_bytes());
        central.extend_from_slice(&size.to_le_bytes());
        central.extend_from_slice(&(name_bytes.len() as u16).to_le_bytes());
        central.extend_from_slice(&0u16.to_le_bytes()); // extra
        central.extend_from_slice(&0u16.to_le_bytes()); // comment
        central.extend_from_slice(&0u16.to_le_bytes()); // disk start
        central.extend_from_slice(&0u16.to_le_bytes()); // internal attrs
        central.extend_from_slice(&0u32.to_le_bytes()); // external attrs
        central.extend_from_slice(&(offset as u32).to_le_bytes());
        central.extend_from_slice(name_bytes);

        offset += (local.len() + data.len()) as u64;
        if offset > u32::MAX as u64 {
            return Err(Error::Archive("archive exceeds 4 GiB".into()));
        }
    }
    out.write_all(&central)?;

    let mut eocd = Vec::with_capacity(22);
    eocd.extend_from_slice(&EOCD_SIG.to_le_bytes());
    eocd.extend_from_slice(&0u16.to_le_bytes()); // disk number
    eocd.extend_from_slice(&0u16.to_le_bytes()); // central dir disk
    eocd.extend_from_slice(&(members.len() as u16).to_le_bytes());
    eocd.extend_from_slice(&(members.len() as u16).to_le_bytes());
    eocd.extend_from_slice(&(central.len() as u32).to_le_bytes());
    eocd.extend_from_slice(&(offset as u32).to_le_bytes());
    eocd.extend_from_slice(&0u16.to_le_bytes()); // comment length
    out.write_all(&eocd)?;
    Ok(())
}

/// Parse an archive and return (name, data) pairs in central-directory
/// order, verifying the stored checksum of every member.
pub fn read_archive<R: Read>(input: &mut R) -> Result<Vec<(String, Vec<u8>)>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    read_archive_bytes(&bytes)
}

pub fn read_archive_bytes(bytes: &[u8]) -> Result<Vec<(String, Vec<u8>)>> {
    if bytes.len() < 22 {
        return Err(Error::Archive("file too short for an end-of-directory record".into()));
    }
    // This writer emits no archive comment, so the EOCD is the last 22 bytes.
    let eocd_at = bytes.len() - 22;
    if read_u32(bytes, eocd_at)? != EOCD_SIG {
        return Err(Error::Archive("end-of-directory signature not found".into()));
    }
    let entry_count = read_u16(bytes, eocd_at + 10)? as usize;
    let central_size = read_u32(bytes, eocd_at + 12)? as usize;
    let central_at = read_u32(bytes, eocd_at + 16)? as usize;
    if central_at + central_size != eocd_at {
        return Err(Error::Archive("central directory does not abut the end record".into()));
    }

    let mut members = Vec::with_capacity(entry_count);
    let mut cursor = central_at;
    for _ in 0..entry_count {
        if read_u32(bytes, cursor)? != CENTRAL_HEADER_SIG {
            return Err(Error::Archive("central directory entry signature mismatch".into()));
        }
        let method = read_u16(bytes, cursor + 10)?;
        let crc = read_u32(bytes, cursor + 16)?;
        let size = read_u32(bytes, cursor + 24)? as usize;
        let name_len = read_u16(bytes, cursor + 28)? as usize;
        let extra_len = read_u16(bytes, cursor + 30)? as usize;
        let comment_len = read_u16(bytes, cursor + 32)? as usize;
        let local_at = read_u32(bytes, cursor + 42)? as usize;
        let name_bytes = slice(bytes, cursor + 46, name_len)?;
        let name = std::str::from_utf8(name_bytes)
            .map_err(|_| Error::Archive("member name is not UTF-8".into()))?
            .to_string();
        if method != 0 {
            return Err(Error::Archive(format!(
                "member `{name}` uses unsupported compression method {method}"
            )));
        }

        if read_u32(bytes, local_at)? != LOCAL_HEADER_SIG {
            return Err(Error::Archive(format!("member `{name}` local header signature mismatch")));
        }
        let local_name_len = read_u16(bytes, local_at + 26)? as usize;
        let local_extra_len = read_u16(bytes, local_at + 28)? as usize;
        let data_at = local_at + 30 + local_name_len + local_extra_len;
        let data = slice(bytes, data_at, size)?.to_vec();
        if crc32(&data) != crc {
            return Err(Error::Checksum { member: name });
        }
        members.push((name, data));
        cursor += 46 + name_len + extra_len + comment_len;
    }
    Ok(members)
}

fn slice(bytes: &[u8], at: usize, len: usize) -> Result<&[u8]> {
    bytes
        .get(at..at + len)
        .ok_or_else(|| Error::Archive(format!("truncated archive: need {len} bytes at {at}")))
}

fn read_u16(bytes: &[u8], at: usize) -> Result<u16> {
    Ok(u16::from_le_bytes(slice(bytes, at, 2)?.try_into().unwrap()))
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32> {
    Ok(u32::from_le_bytes(slice(bytes, at, 4)?.try_into().unwrap()))
}
