//! Frame sequences as a `[frames, height, width]` stack.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{ndt, pgm};
use crate::tensor::Tensor;

/// Frame number of a `frame_NNNNNN.pgm` file name.
fn frame_number(name: &str) -> Option<usize> {
    let digits = name.strip_prefix("frame_")?.strip_suffix(".pgm")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Loads a directory of `frame_NNNNNN.pgm` files in frame order, or a 3-D
/// NDT file.
pub fn load(path: impl AsRef<Path>) -> Result<Tensor> {
    let path = path.as_ref();
    if path.is_dir() {
        load_dir(path)
    } else {
        let t = ndt::read(path)?;
        if t.ndim() != 3 {
            return Err(Error::Input(format!("{}: frame stack must be 3-D, got dims {:?}", path.display(), t.dims())));
        }
        Ok(t)
    }
}

fn load_dir(dir: &Path) -> Result<Tensor> {
    let mut found = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if let Some(n) = entry.file_name().to_str().and_then(frame_number) {
            found.push((n, entry.path()));
        }
    }
    if found.is_empty() {
        return Err(Error::Input(format!("{}: no frame_NNNNNN.pgm files", dir.display())));
    }
    found.sort();
    if let Some(w) = found.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Input(format!("{}: frame {} appears twice", dir.display(), w[0].0)));
    }
    let frames = found.iter().map(|(_, p)| pgm::read(p)).collect::<Result<Vec<_>>>()?;
    if let Some(f) = frames.iter().find(|f| f.dims() != frames[0].dims()) {
        return Err(Error::Shape(format!("frame extents differ: {:?} vs {:?}", frames[0].dims(), f.dims())));
    }
    Tensor::stack(&frames.iter().collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        assert_eq!(frame_number("frame_000012.pgm"), Some(12));
        assert_eq!(frame_number("frame_.pgm"), None);
        assert_eq!(frame_number("frame_12a.pgm"), None);
        assert_eq!(frame_number("truth.csv"), None);
    }

    #[test]
    fn directory_order_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        for i in [2usize, 0, 1] {
            let img = Tensor::filled(&[3, 4], i as f64 / 4.0).unwrap();
            pgm::write(&img, dir.path().join(format!("frame_{i:06}.pgm"))).unwrap();
        }
        fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let stack = load(dir.path()).unwrap();
        assert_eq!(stack.dims(), &[3, 3, 4]);
        for i in 0..3 {
            assert!((stack.plane(i).unwrap().data()[0] - i as f64 / 4.0).abs() < 1e-2);
        }
        let empty = tempfile::tempdir().unwrap();
        assert!(matches!(load(empty.path()), Err(Error::Input(_))));
    }

    #[test]
    fn ndt_stack_must_be_3d() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.ndt");
        ndt::write(&Tensor::zeros(&[4, 4]).unwrap(), &p).unwrap();
        assert!(matches!(load(&p), Err(Error::Input(_))));
        ndt::write(&Tensor::zeros(&[2, 4, 4]).unwrap(), &p).unwrap();
        assert_eq!(load(&p).unwrap().dims(), &[2, 4, 4]);
    }
}
