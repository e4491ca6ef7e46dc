//! Minimal LAS 1.2 to 1.4 reader/writer. Only X, Y and Z are read; other point
//! attributes are skipped. Compressed (LAZ) files are rejected.

use std::fs;
use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point3, PointCloud};

/// Minimum record length of point formats 0 to 8.
const MIN_RECORD_LEN: [u16; 9] = [20, 28, 26, 34, 57, 63, 30, 36, 38];

/// Header size of a LAS 1.2 file.
const HEADER_SIZE_12: u16 = 227;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LasHeaderInfo {
    pub version: (u8, u8),
    pub point_format: u8,
    pub record_length: u16,
    pub point_count: u64,
    pub scale: [f64; 3],
    pub offset: [f64; 3],
    pub bounds: Aabb,
}

pub fn read_las(path: impl AsRef<Path>) -> Result<(PointCloud, LasHeaderInfo)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_las(&bytes)
}

fn le<T>(r: std::io::Result<T>, offset: u64) -> Result<T> {
    r.map_err(|_| Error::las(offset, "unexpected end of header"))
}

/// Parses an in-memory LAS file.
pub fn parse_las(bytes: &[u8]) -> Result<(PointCloud, LasHeaderInfo)> {
    if bytes.len() < 4 || &bytes[..4] != b"LASF" {
        return Err(Error::las(0, "missing LASF signature"));
    }
    let mut c = Cursor::new(bytes);
    c.set_position(24);
    let major = le(c.read_u8(), 24)?;
    let minor = le(c.read_u8(), 25)?;
    if major != 1 || !(2..=4).contains(&minor) {
        return Err(Error::las(24, format!("unsupported LAS version {major}.{minor}")));
    }
    c.set_position(94);
    let header_size = le(c.read_u16::<LittleEndian>(), 94)?;
    let data_offset = le(c.read_u32::<LittleEndian>(), 96)? as u64;
    c.set_position(104);
    let raw_format = le(c.read_u8(), 104)?;
    if raw_format & 0x80 != 0 {
        return Err(Error::las(104, "compressed (LAZ) point data is not supported"));
    }
    let point_format = raw_format & 0x3f;
    let record_length = le(c.read_u16::<LittleEndian>(), 105)?;
    let legacy_count = le(c.read_u32::<LittleEndian>(), 107)? as u64;

    let Some(&min_len) = MIN_RECORD_LEN.get(point_format as usize) else {
        return Err(Error::las(104, format!("unsupported point format {point_format}")));
    };
    if record_length < min_len {
        return Err(Error::las(
            105,
            format!("record length {record_length} too short for format {point_format}"),
        ));
    }

    c.set_position(131);
    let mut scale = [0.0; 3];
    let mut offset = [0.0; 3];
    for (a, s) in scale.iter_mut().enumerate() {
        *s = le(c.read_f64::<LittleEndian>(), 131 + 8 * a as u64)?;
        if !(*s > 0.0 && s.is_finite()) {
            return Err(Error::las(131 + 8 * a as u64, format!("invalid scale {s}")));
        }
    }
    for (a, o) in offset.iter_mut().enumerate() {
        *o = le(c.read_f64::<LittleEndian>(), 155 + 8 * a as u64)?;
    }
    // max x, min x, max y, min y, max z, min z
    let mut ext = [0.0; 6];
    for (i, e) in ext.iter_mut().enumerate() {
        *e = le(c.read_f64::<LittleEndian>(), 179 + 8 * i as u64)?;
    }
    let bounds = Aabb {
        min: Point3::new(ext[1], ext[3], ext[5]),
        max: Point3::new(ext[0], ext[2], ext[4]),
    };

    let point_count = if minor >= 4 && header_size >= 255 {
        c.set_position(247);
        let wide = le(c.read_u64::<LittleEndian>(), 247)?;
        if wide != 0 {
            wide
        } else {
            legacy_count
        }
    } else {
        legacy_count
    };
    if point_count == 0 {
        return Err(Error::EmptyCloud);
    }

    let needed = data_offset + point_count * record_length as u64;
    if (bytes.len() as u64) < needed {
        let complete = (bytes.len() as u64).saturating_sub(data_offset) / record_length as u64;
        return Err(Error::las(
            data_offset + complete * record_length as u64,
            format!("truncated point record {complete} of {point_count}"),
        ));
    }

    let mut points = Vec::with_capacity(point_count as usize);
    for n in 0..point_count {
        let at = data_offset + n * record_length as u64;
        c.set_position(at);
        let mut raw = [0i32; 3];
        for r in raw.iter_mut() {
            *r = c
                .read_i32::<LittleEndian>()
                .map_err(|_| Error::las(at, "truncated point record"))?;
        }
        points.push(Point3::new(
            raw[0] as f64 * scale[0] + offset[0],
            raw[1] as f64 * scale[1] + offset[1],
            raw[2] as f64 * scale[2] + offset[2],
        ));
    }

    let info = LasHeaderInfo {
        version: (major, minor),
        point_format,
        record_length,
        point_count,
        scale,
        offset,
        bounds,
    };
    Ok((PointCloud::new(points)?, info))
}

/// Writes a LAS 1.2, point-format-0 file quantized to `scale` per axis.
pub fn write_las(cloud: &PointCloud, path: impl AsRef<Path>, scale: [f64; 3]) -> Result<LasHeaderInfo> {
    let path = path.as_ref();
    let (bytes, info) = encode_las(cloud, scale)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    Ok(info)
}

pub fn encode_las(cloud: &PointCloud, scale: [f64; 3]) -> Result<(Vec<u8>, LasHeaderInfo)> {
    let bounds = cloud.bounding_box()?;
    if scale.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidParameter(format!("invalid LAS scale {scale:?}")));
    }
    let offset = [bounds.min.x, bounds.min.y, bounds.min.z];
    let mut quantized = Vec::with_capacity(cloud.len());
    for p in cloud.points() {
        let mut q = [0i32; 3];
        for a in 0..3 {
            let v = ((p.axis(a) - offset[a]) / scale[a]).round();
            if v < i32::MIN as f64 || v > i32::MAX as f64 {
                return Err(Error::InvalidParameter(format!(
                    "coordinate {} does not fit LAS scale {}",
                    p.axis(a),
                    scale[a]
                )));
            }
            q[a] = v as i32;
        }
        quantized.push(q);
    }
    let count = u32::try_from(cloud.len())
        .map_err(|_| Error::InvalidParameter("too many points for a LAS 1.2 file".into()))?;

    let mut out = Vec::with_capacity(HEADER_SIZE_12 as usize + 20 * cloud.len());
    let w = &mut out;
    let io = |r: std::io::Result<()>| r.expect("writing to a Vec cannot fail");
    w.extend_from_slice(b"LASF");
    io(w.write_u16::<LittleEndian>(0)); // file source id
    io(w.write_u16::<LittleEndian>(0)); // global encoding
    w.extend_from_slice(&[0u8; 16]); // project GUID
    w.push(1);
    w.push(2);
    let mut ident = [0u8; 32];
    ident[..9].copy_from_slice(b"cheesemap");
    w.extend_from_slice(&ident); // system identifier
    w.extend_from_slice(&ident); // generating software
    io(w.write_u16::<LittleEndian>(1)); // creation day
    io(w.write_u16::<LittleEndian>(2024)); // creation year
    io(w.write_u16::<LittleEndian>(HEADER_SIZE_12));
    io(w.write_u32::<LittleEndian>(HEADER_SIZE_12 as u32));
    io(w.write_u32::<LittleEndian>(0)); // VLR count
    w.push(0); // point format
    io(w.write_u16::<LittleEndian>(20));
    io(w.write_u32::<LittleEndian>(count));
    io(w.write_u32::<LittleEndian>(count)); // by return: all first returns
    for _ in 0..4 {
        io(w.write_u32::<LittleEndian>(0));
    }
    for s in scale {
        io(w.write_f64::<LittleEndian>(s));
    }
    for o in offset {
        io(w.write_f64::<LittleEndian>(o));
    }
    for (hi, lo) in [
        (bounds.max.x, bounds.min.x),
        (bounds.max.y, bounds.min.y),
        (bounds.max.z, bounds.min.z),
    ] {
        io(w.write_f64::<LittleEndian>(hi));
        io(w.write_f64::<LittleEndian>(lo));
    }
    debug_assert_eq!(w.len(), HEADER_SIZE_12 as usize);
    for q in quantized {
        for v in q {
            io(w.write_i32::<LittleEndian>(v));
        }
        io(w.write_u16::<LittleEndian>(0)); // intensity
        w.push(0b0000_1001); // return 1 of 1
        w.push(0); // classification
        w.push(0); // scan angle
        w.push(0); // user data
        io(w.write_u16::<LittleEndian>(0)); // point source id
    }

    let info = LasHeaderInfo {
        version: (1, 2),
        point_format: 0,
        record_length: 20,
        point_count: cloud.len() as u64,
        scale,
        offset,
        bounds,
    };
    Ok((out, info))
}

/// True when the stream starts with the LAS signature.
pub fn peek_signature(mut r: impl Read) -> bool {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).is_ok() && &magic == b"LASF"
}
