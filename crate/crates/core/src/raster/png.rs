//! Read-only PNG input: 8-bit grey, grey+alpha, RGB and RGBA.

use crate::error::{Error, Result};
use crate::lip::GreyScale;

use super::{luminance, GreyImage};

pub fn decode_png(bytes: &[u8], scale: GreyScale) -> Result<GreyImage> {
    let mut decoder = ::png::Decoder::new(bytes);
    // palettes and sub-byte grey depths are widened to 8 bits
    decoder.set_transformations(::png::Transformations::EXPAND);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Format(format!("png: {e}")))?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Format(format!("png: {e}")))?;
    if info.bit_depth != ::png::BitDepth::Eight {
        return Err(Error::Format(format!(
            "png: only 8-bit samples are supported, got {:?}",
            info.bit_depth
        )));
    }
    let (w, h) = (info.width as usize, info.height as usize);
    let data = &buf[..info.buffer_size()];
    let channels = info.color_type.samples();
    let stride = info.line_size;
    // drop any per-row padding
    let packed: Vec<u8> = data
        .chunks(stride)
        .flat_map(|row| &row[..w * channels])
        .copied()
        .collect();
    match channels {
        1 | 2 => GreyImage::new(
            w,
            h,
            scale,
            packed
                .chunks_exact(channels)
                .map(|px| px[0] as f64)
                .collect(),
        ),
        c => luminance(w, h, c, &packed, scale),
    }
}
