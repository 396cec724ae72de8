//! YUV4MPEG2 (`.y4m`) reading and writing for 4:2:0 video.

use std::io::{BufRead, Write};

use super::frame::{Frame, Plane, RawVideo};
use crate::error::{Error, Result};

pub fn write_y4m<W: Write>(video: &RawVideo, mut out: W) -> Result<()> {
    writeln!(
        out,
        "YUV4MPEG2 W{} H{} F{}:1 Ip A1:1 C420jpeg",
        video.width, video.height, video.fps
    )?;
    for f in &video.frames {
        out.write_all(b"FRAME\n")?;
        for p in f.planes() {
            out.write_all(&p.data)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_y4m<R: BufRead>(mut input: R) -> Result<RawVideo> {
    let mut header = String::new();
    input.read_line(&mut header)?;
    let mut fields = header.trim_end().split(' ');
    if fields.next() != Some("YUV4MPEG2") {
        return Err(Error::Format("missing YUV4MPEG2 signature".into()));
    }
    let (mut width, mut height, mut fps) = (0usize, 0usize, 25u8);
    for f in fields {
        let (tag, val) = f.split_at(1);
        match tag {
            "W" => {
                width = val
                    .parse()
                    .map_err(|_| Error::Format(format!("bad width {val}")))?
            }
            "H" => {
                height = val
                    .parse()
                    .map_err(|_| Error::Format(format!("bad height {val}")))?
            }
            "F" => {
                let (n, d) = val.split_once(':').unwrap_or((val, "1"));
                let n: f64 = n
                    .parse()
                    .map_err(|_| Error::Format(format!("bad rate {val}")))?;
                let d: f64 = d
                    .parse()
                    .map_err(|_| Error::Format(format!("bad rate {val}")))?;
                fps = (n / d).round().clamp(1.0, 255.0) as u8;
            }
            "C" if !val.starts_with("420") => {
                return Err(Error::Unsupported(format!(
                    "colorspace C{val}; only 4:2:0 is supported"
                )))
            }
            _ => {}
        }
    }
    let mut frames = Vec::new();
    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            break;
        }
        if !line.starts_with("FRAME") {
            return Err(Error::Format(format!(
                "expected FRAME marker, found {:?}",
                line.trim_end()
            )));
        }
        let mut read_plane = |w: usize, h: usize| -> Result<Plane> {
            let mut data = vec![0u8; w * h];
            input.read_exact(&mut data)?;
            Ok(Plane {
                width: w,
                height: h,
                data,
            })
        };
        let y = read_plane(width, height)?;
        let cb = read_plane(width / 2, height / 2)?;
        let cr = read_plane(width / 2, height / 2)?;
        frames.push(Frame { y, cb, cr });
    }
    RawVideo::new(width, height, fps, frames)
}
