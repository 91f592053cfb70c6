// Binary PGM (P5) images and masks, and EPM1 probability maps.
use boundary_path::io::{
    decode_gray_image, decode_mask, decode_prob_map, encode_gray_image, encode_mask,
    encode_prob_map, read_prob_map, write_prob_map,
};
use boundary_path::raster::Raster;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let image = Raster::from_fn(4, 2, |p| (p.row * 4 + p.col) as u8 * 30);
    let pgm = encode_gray_image(&image);
    println!(
        "PGM header {:?}",
        String::from_utf8_lossy(&pgm[..pgm.len() - 8])
    );
    assert_eq!(decode_gray_image(&pgm)?, image);

    // EPM1: text header, then little-endian f32 row by row
    let map = Raster::from_fn(3, 2, |p| p.col as f32 / 2.0);
    let epm = encode_prob_map(&map);
    println!(
        "EPM header {:?}, {} bytes total",
        String::from_utf8_lossy(&epm[..epm.len() - 4 * 6]),
        epm.len()
    );
    assert_eq!(decode_prob_map(&epm)?, map);

    let mask = map.map(|v| v > 0.25);
    assert_eq!(decode_mask(&encode_mask(&mask))?, mask);

    // values outside [0, 1] are rejected on read
    let mut bad = epm.clone();
    let n = bad.len();
    bad[n - 4..].copy_from_slice(&1.5f32.to_le_bytes());
    println!("out-of-range map: {}", decode_prob_map(&bad).unwrap_err());

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("map.epm");
    write_prob_map(&path, &map)?;
    assert_eq!(read_prob_map(&path)?, map);
    Ok(())
}

fn main() {
    run_example().unwrap();
}
