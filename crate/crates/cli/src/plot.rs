//! Minimal raster line charts. Axis ranges travel in the PNG text chunks
//! since no text is drawn.

use image::{Rgb, RgbImage};

pub const BLUE: Rgb<u8> = Rgb([31, 119, 180]);
pub const RED: Rgb<u8> = Rgb([214, 39, 40]);
pub const GREY: Rgb<u8> = Rgb([150, 150, 150]);

pub struct Series {
    pub points: Vec<(f64, f64)>,
    pub color: Rgb<u8>,
    /// Draw a marker at each point instead of joining them.
    pub markers: bool,
}

pub struct Chart {
    pub series: Vec<Series>,
    pub hlines: Vec<(f64, Rgb<u8>)>,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Copy)]
pub struct Ranges {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Ranges {
    pub fn describe(&self) -> [(&'static str, String); 2] {
        [
            ("x-range", format!("{} {}", self.x.0, self.x.1)),
            ("y-range", format!("{} {}", self.y.0, self.y.1)),
        ]
    }
}

impl Chart {
    pub fn render(&self) -> (RgbImage, Ranges) {
        const M: f64 = 40.0;
        let (w, h) = (self.width as f64, self.height as f64);
        let mut img = RgbImage::from_pixel(self.width, self.height, Rgb([255, 255, 255]));
        let pts = self.series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        for &(y, _) in &self.hlines {
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        let pad = ((y1 - y0) * 0.05).max(1e-9);
        y0 -= pad;
        y1 += pad;
        let sx = |x: f64| M + (x - x0) / (x1 - x0) * (w - 2.0 * M);
        let sy = |y: f64| h - M - (y - y0) / (y1 - y0) * (h - 2.0 * M);
        let black = Rgb([0, 0, 0]);
        line(&mut img, (M, M), (w - M, M), black);
        line(&mut img, (M, h - M), (w - M, h - M), black);
        line(&mut img, (M, M), (M, h - M), black);
        line(&mut img, (w - M, M), (w - M, h - M), black);
        for &(y, c) in &self.hlines {
            dashed(&mut img, (M, sy(y)), (w - M, sy(y)), c);
        }
        for s in &self.series {
            if s.markers {
                for &(x, y) in &s.points {
                    dot(&mut img, sx(x), sy(y), s.color);
                }
            } else {
                for p in s.points.windows(2) {
                    line(&mut img, (sx(p[0].0), sy(p[0].1)), (sx(p[1].0), sy(p[1].1)), s.color);
                }
            }
        }
        (img, Ranges { x: (x0, x1), y: (y0, y1) })
    }
}

fn put(img: &mut RgbImage, x: f64, y: f64, c: Rgb<u8>) {
    let (x, y) = (x.round(), y.round());
    if x >= 0.0 && y >= 0.0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, c);
    }
}

fn line(img: &mut RgbImage, a: (f64, f64), b: (f64, f64), c: Rgb<u8>) {
    let n = ((b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil() as usize).max(1);
    for i in 0..=n {
        let t = i as f64 / n as f64;
        put(img, a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t, c);
    }
}

fn dashed(img: &mut RgbImage, a: (f64, f64), b: (f64, f64), c: Rgb<u8>) {
    let n = ((b.0 - a.0).abs().ceil() as usize).max(1);
    for i in 0..=n {
        if (i / 6) % 2 == 0 {
            let t = i as f64 / n as f64;
            put(img, a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t, c);
        }
    }
}

fn dot(img: &mut RgbImage, x: f64, y: f64, c: Rgb<u8>) {
    for dx in -2..=2 {
        for dy in -2..=2 {
            put(img, x + dx as f64, y + dy as f64, c);
        }
    }
}
