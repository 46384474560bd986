//! Middlebury `.flo` flow file I/O.
//!
//! Layout: 4-byte magic "PIEH" (the float 202021.25 in little-endian),
//! 4-byte little-endian width and height, then row-major interleaved
//! (vx, vy) pairs as 32-bit floats.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::image::Image;

const MAGIC: [u8; 4] = *b"PIEH";

pub fn write_flo<W: Write>(flow: &FlowField, mut w: W) -> Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&(flow.width() as i32).to_le_bytes())?;
    w.write_all(&(flow.height() as i32).to_le_bytes())?;
    for y in 0..flow.height() {
        for x in 0..flow.width() {
            w.write_all(&(flow.vx().get(x, y) as f32).to_le_bytes())?;
            w.write_all(&(flow.vy().get(x, y) as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_flo<R: Read>(mut r: R) -> Result<FlowField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(Error::FlowFormat(format!("bad magic {:?}", magic)));
    }
    let mut buf4 = [0u8; 4];
    r.read_exact(&mut buf4)?;
    let width = i32::from_le_bytes(buf4);
    r.read_exact(&mut buf4)?;
    let height = i32::from_le_bytes(buf4);
    if width <= 0 || height <= 0 || width > 1 << 20 || height > 1 << 20 {
        return Err(Error::FlowFormat(format!("implausible dims {}x{}", width, height)));
    }
    let (w, h) = (width as usize, height as usize);
    let mut vx = vec![0.0f64; w * h];
    let mut vy = vec![0.0f64; w * h];
    for i in 0..w * h {
        r.read_exact(&mut buf4)?;
        vx[i] = f32::from_le_bytes(buf4) as f64;
        r.read_exact(&mut buf4)?;
        vy[i] = f32::from_le_bytes(buf4) as f64;
    }
    FlowField::new(Image::from_data(w, h, vx)?, Image::from_data(w, h, vy)?)
}

pub fn write_flo_file(flow: &FlowField, path: impl AsRef<Path>) -> Result<()> {
    let f = File::create(path)?;
    write_flo(flow, BufWriter::new(f))
}

pub fn read_flo_file(path: impl AsRef<Path>) -> Result<FlowField> {
    let f = File::open(path)?;
    read_flo(BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_f32_values() {
        let vx = Image::from_fn(5, 3, |x, y| (x as f64 - 2.0) * 0.5 + y as f64);
        let vy = Image::from_fn(5, 3, |x, y| (y as f64 - 1.0) * 0.25 - x as f64);
        let flow = FlowField::new(vx, vy).unwrap();
        let mut buf = Vec::new();
        write_flo(&flow, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"PIEH");
        assert_eq!(buf.len(), 12 + 5 * 3 * 2 * 4);
        let back = read_flo(&buf[..]).unwrap();
        assert_eq!(back.width(), 5);
        assert_eq!(back.height(), 3);
        // Values here are exactly representable as f32.
        assert_eq!(back.vx().data(), flow.vx().data());
        assert_eq!(back.vy().data(), flow.vy().data());
    }

    #[test]
    fn bad_magic_rejected() {
        let buf = b"JUNK\x05\x00\x00\x00\x03\x00\x00\x00";
        assert!(read_flo(&buf[..]).is_err());
    }

    #[test]
    fn truncated_file_rejected() {
        let vx = Image::zeros(4, 4);
        let flow = FlowField::new(vx.clone(), vx).unwrap();
        let mut buf = Vec::new();
        write_flo(&flow, &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_flo(&buf[..]).is_err());
    }
}
