//! NIfTI-1 single-file (`.nii` / `.nii.gz`) reader and writer.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{Error, Result};
use crate::volume::{Dims, Orientation, Spacing, Volume};

pub const HEADER_SIZE: usize = 348;
/// Header plus the four-byte extension flag.
pub const DEFAULT_VOX_OFFSET: usize = 352;

const NIFTI2_HEADER_SIZE: i32 = 540;

mod offset {
    pub const DIM: usize = 40;
    pub const DATATYPE: usize = 70;
    pub const BITPIX: usize = 72;
    pub const PIXDIM: usize = 76;
    pub const VOX_OFFSET: usize = 108;
    pub const SCL_SLOPE: usize = 112;
    pub const SCL_INTER: usize = 116;
    pub const XYZT_UNITS: usize = 123;
    pub const DESCRIP: usize = 148;
    pub const QFORM_CODE: usize = 252;
    pub const SFORM_CODE: usize = 254;
    pub const QUATERN: usize = 256;
    pub const SROW: usize = 280;
    pub const MAGIC: usize = 344;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Datatype {
    U8,
    I16,
    I32,
    F32,
    F64,
}

impl Datatype {
    pub fn from_code(code: i16) -> Result<Self> {
        Ok(match code {
            2 => Datatype::U8,
            4 => Datatype::I16,
            8 => Datatype::I32,
            16 => Datatype::F32,
            64 => Datatype::F64,
            other => return Err(Error::UnsupportedDatatype(other)),
        })
    }

    pub fn code(self) -> i16 {
        match self {
            Datatype::U8 => 2,
            Datatype::I16 => 4,
            Datatype::I32 => 8,
            Datatype::F32 => 16,
            Datatype::F64 => 64,
        }
    }

    pub fn size(self) -> usize {
        match self {
            Datatype::U8 => 1,
            Datatype::I16 => 2,
            Datatype::I32 | Datatype::F32 => 4,
            Datatype::F64 => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Endian {
    Little,
    Big,
}

struct Fields<'a> {
    bytes: &'a [u8],
    endian: Endian,
}

impl Fields<'_> {
    fn take<const N: usize>(&self, at: usize) -> [u8; N] {
        self.bytes[at..at + N].try_into().unwrap()
    }

    fn i16(&self, at: usize) -> i16 {
        match self.endian {
            Endian::Little => i16::from_le_bytes(self.take(at)),
            Endian::Big => i16::from_be_bytes(self.take(at)),
        }
    }

    fn i32(&self, at: usize) -> i32 {
        match self.endian {
            Endian::Little => i32::from_le_bytes(self.take(at)),
            Endian::Big => i32::from_be_bytes(self.take(at)),
        }
    }

    fn f32(&self, at: usize) -> f32 {
        match self.endian {
            Endian::Little => f32::from_le_bytes(self.take(at)),
            Endian::Big => f32::from_be_bytes(self.take(at)),
        }
    }

    fn f64(&self, at: usize) -> f64 {
        match self.endian {
            Endian::Little => f64::from_le_bytes(self.take(at)),
            Endian::Big => f64::from_be_bytes(self.take(at)),
        }
    }
}

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz"))
}

/// Identifier derived from a file name with `.nii` / `.nii.gz` stripped.
pub fn volume_id(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    for suffix in [".nii.gz", ".nii", ".gz"] {
        if let Some(stem) = name.strip_suffix(suffix) {
            return stem.to_string();
        }
    }
    name
}

pub fn read_nifti(path: impl AsRef<Path>) -> Result<Volume> {
    let path = path.as_ref();
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bytes = if is_gz(path) {
        let mut out = Vec::new();
        MultiGzDecoder::new(raw.as_slice()).read_to_end(&mut out).map_err(|e| Error::io(path, e))?;
        out
    } else {
        raw
    };
    Ok(parse_nifti(&bytes)?.with_id(volume_id(path)))
}

/// Parses an uncompressed single-file NIfTI-1 image held in memory.
pub fn parse_nifti(bytes: &[u8]) -> Result<Volume> {
    if bytes.len() < HEADER_SIZE {
        return Err(Error::TruncatedFile { expected: HEADER_SIZE, found: bytes.len() });
    }
    let le = i32::from_le_bytes(bytes[0..4].try_into().unwrap());
    let be = i32::from_be_bytes(bytes[0..4].try_into().unwrap());
    let endian = match (le, be) {
        (348, _) => Endian::Little,
        (_, 348) => Endian::Big,
        (NIFTI2_HEADER_SIZE, _) | (_, NIFTI2_HEADER_SIZE) => {
            return Err(Error::BadMagic("NIfTI-2 headers are not supported".into()))
        }
        _ => return Err(Error::BadMagic(format!("sizeof_hdr is {le}, expected 348"))),
    };
    let h = Fields { bytes, endian };

    match &bytes[offset::MAGIC..offset::MAGIC + 4] {
        b"n+1\0" => {}
        b"ni1\0" => {
            return Err(Error::BadMagic(
                "two-file NIfTI (.hdr/.img, magic \"ni1\") is not supported; convert to single-file .nii".into(),
            ))
        }
        other => {
            return Err(Error::BadMagic(format!(
                "magic {:?} is not \"n+1\" (ANALYZE 7.5 and other formats are not supported)",
                String::from_utf8_lossy(other)
            )))
        }
    }

    let dim: [i16; 8] = std::array::from_fn(|i| h.i16(offset::DIM + 2 * i));
    let ndim = dim[0];
    if !(1..=7).contains(&ndim) {
        return Err(Error::BadHeader(format!("dim[0] = {ndim} outside 1..=7")));
    }
    let ndim = ndim as usize;
    if let Some(d) = (4..=ndim).find(|&d| dim[d] != 1) {
        return Err(Error::BadHeader(format!(
            "only 3D volumes are supported; dim[{d}] = {} (dim[0] = {ndim})",
            dim[d]
        )));
    }
    let extent = |axis: usize| -> Result<usize> {
        if axis > ndim {
            return Ok(1);
        }
        match dim[axis] {
            n if n >= 1 => Ok(n as usize),
            n => Err(Error::BadHeader(format!("dim[{axis}] = {n} must be positive"))),
        }
    };
    let dims = Dims::new(extent(1)?, extent(2)?, extent(3)?);

    let datatype = Datatype::from_code(h.i16(offset::DATATYPE))?;
    let pixdim = |axis: usize| -> f64 {
        let v = h.f32(offset::PIXDIM + 4 * axis);
        if v == 0.0 {
            1.0
        } else {
            f64::from(v.abs())
        }
    };
    let spacing = Spacing::new(pixdim(1), pixdim(2), pixdim(3))?;

    let vox_offset = h.f32(offset::VOX_OFFSET);
    if !(vox_offset.is_finite() && vox_offset >= HEADER_SIZE as f32) {
        return Err(Error::BadHeader(format!("vox_offset = {vox_offset} lies inside the header")));
    }
    let start = vox_offset as usize;
    let nbytes = dims.len() * datatype.size();
    if bytes.len() < start + nbytes {
        return Err(Error::TruncatedFile { expected: start + nbytes, found: bytes.len() });
    }
    let payload = &bytes[start..start + nbytes];
    let body = Fields { bytes: payload, endian };
    let raw: Vec<f64> = (0..dims.len())
        .map(|n| match datatype {
            Datatype::U8 => f64::from(payload[n]),
            Datatype::I16 => f64::from(body.i16(2 * n)),
            Datatype::I32 => f64::from(body.i32(4 * n)),
            Datatype::F32 => f64::from(body.f32(4 * n)),
            Datatype::F64 => body.f64(8 * n),
        })
        .collect();

    let slope = h.f32(offset::SCL_SLOPE);
    let inter = h.f32(offset::SCL_INTER);
    let data: Vec<f32> = if slope != 0.0 && slope.is_finite() {
        let (s, b) = (f64::from(slope), f64::from(if inter.is_finite() { inter } else { 0.0 }));
        raw.into_iter().map(|v| (v * s + b) as f32).collect()
    } else {
        raw.into_iter().map(|v| v as f32).collect()
    };
    if let Some(p) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteData(p));
    }

    let orientation = Orientation {
        qfac: h.f32(offset::PIXDIM),
        qform_code: h.i16(offset::QFORM_CODE),
        sform_code: h.i16(offset::SFORM_CODE),
        quatern: std::array::from_fn(|i| h.f32(offset::QUATERN + 4 * i)),
        srow: std::array::from_fn(|r| std::array::from_fn(|c| h.f32(offset::SROW + 16 * r + 4 * c))),
    };

    Ok(Volume::new(dims, spacing, data, String::new())?.with_orientation(Some(orientation)))
}

/// Serializes a volume as little-endian float32 NIfTI-1 with `vox_offset` 352.
pub fn encode_nifti(v: &Volume) -> Result<Vec<u8>> {
    let dims = v.dims();
    if dims.is_empty() {
        return Err(Error::InvalidVolume(format!("cannot write zero-voxel grid {dims}")));
    }
    let to_i16 = |n: usize| {
        i16::try_from(n).map_err(|_| Error::InvalidVolume(format!("dimension {n} exceeds the NIfTI-1 limit")))
    };
    let mut out = vec![0u8; DEFAULT_VOX_OFFSET + 4 * dims.len()];
    let put = |out: &mut [u8], at: usize, b: &[u8]| out[at..at + b.len()].copy_from_slice(b);

    put(&mut out, 0, &(HEADER_SIZE as i32).to_le_bytes());
    out[38] = b'r';
    let dim = [3, to_i16(dims.nx)?, to_i16(dims.ny)?, to_i16(dims.nz)?, 1, 1, 1, 1];
    for (i, d) in dim.iter().enumerate() {
        put(&mut out, offset::DIM + 2 * i, &d.to_le_bytes());
    }
    put(&mut out, offset::DATATYPE, &Datatype::F32.code().to_le_bytes());
    put(&mut out, offset::BITPIX, &32i16.to_le_bytes());

    let orient = v.orientation().copied().unwrap_or(Orientation { qfac: 1.0, ..Default::default() });
    let qfac = if orient.qfac == 0.0 { 1.0 } else { orient.qfac };
    let sp = v.spacing().0;
    let pixdim = [qfac, sp[0] as f32, sp[1] as f32, sp[2] as f32, 0.0, 0.0, 0.0, 0.0];
    for (i, p) in pixdim.iter().enumerate() {
        put(&mut out, offset::PIXDIM + 4 * i, &p.to_le_bytes());
    }
    put(&mut out, offset::VOX_OFFSET, &(DEFAULT_VOX_OFFSET as f32).to_le_bytes());
    put(&mut out, offset::SCL_SLOPE, &0f32.to_le_bytes());
    put(&mut out, offset::SCL_INTER, &0f32.to_le_bytes());
    // millimeters
    out[offset::XYZT_UNITS] = 2;
    put(&mut out, offset::DESCRIP, b"dtmix");
    put(&mut out, offset::QFORM_CODE, &orient.qform_code.to_le_bytes());
    put(&mut out, offset::SFORM_CODE, &orient.sform_code.to_le_bytes());
    for (i, q) in orient.quatern.iter().enumerate() {
        put(&mut out, offset::QUATERN + 4 * i, &q.to_le_bytes());
    }
    for (r, row) in orient.srow.iter().enumerate() {
        for (c, x) in row.iter().enumerate() {
            put(&mut out, offset::SROW + 16 * r + 4 * c, &x.to_le_bytes());
        }
    }
    put(&mut out, offset::MAGIC, b"n+1\0");

    for (n, x) in v.data().iter().enumerate() {
        put(&mut out, DEFAULT_VOX_OFFSET + 4 * n, &x.to_le_bytes());
    }
    Ok(out)
}

/// Writes `v` to `path`, gzip-compressing when the path ends in `.gz`.
pub fn write_nifti(path: impl AsRef<Path>, v: &Volume) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_nifti(v)?;
    let payload = if is_gz(path) {
        let mut enc = GzEncoder::new(Vec::with_capacity(bytes.len() / 4), Compression::default());
        enc.write_all(&bytes).map_err(|e| Error::io(path, e))?;
        enc.finish().map_err(|e| Error::io(path, e))?
    } else {
        bytes
    };
    fs::write(path, payload).map_err(|e| Error::io(path, e))
}
