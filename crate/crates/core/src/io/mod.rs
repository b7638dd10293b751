//! File formats: greymaps, CSV streams, WAV audio and run directories.

pub mod audio;
pub mod image;
pub mod records;
pub mod run;
pub mod world;

pub use audio::{read_wav, write_wav};
pub use image::{read_pgm, to_gray, write_pgm, write_ppm, GrayMapping};
pub use records::{read_csv, write_csv};
pub use run::{create, open, read_header, read_run, scan_name, write_run, RunHeader};
