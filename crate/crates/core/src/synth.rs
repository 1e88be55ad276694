//! Seeded 2-D shape generators. The bundled fixtures under `fixtures/` were
//! written by [`Shape::generate`] with [`FIXTURE_SEED`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{GfdcError, Result};

pub const FIXTURE_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    /// Two interlocking crescents of different density, 276 + 97 samples.
    Jain,
    /// Seven blobs of 45/170/102/273/34/130/34 samples, some nearly touching.
    Aggregation,
    /// Two interleaved spiral arms, 500 samples each.
    TwoSpiral,
    /// A ring around one blob, 700 + 300 samples.
    Donut2,
    /// A ring around two blobs, 599 + 200 + 200 samples.
    Donut3,
    /// Two squares under an arch, 80 + 80 + 106 samples.
    Zelnik3,
}

impl Shape {
    pub const ALL: [Shape; 6] =
        [Shape::Jain, Shape::Aggregation, Shape::TwoSpiral, Shape::Donut2, Shape::Donut3, Shape::Zelnik3];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Jain => "jain",
            Shape::Aggregation => "aggregation",
            Shape::TwoSpiral => "2spiral",
            Shape::Donut2 => "donut2",
            Shape::Donut3 => "donut3",
            Shape::Zelnik3 => "zelnik3",
        }
    }

    pub fn clusters(self) -> usize {
        match self {
            Shape::Jain | Shape::TwoSpiral | Shape::Donut2 => 2,
            Shape::Donut3 | Shape::Zelnik3 => 3,
            Shape::Aggregation => 7,
        }
    }

    /// Coordinates rounded to two decimals, labels `"1"..="c"`.
    pub fn generate(self, seed: u64) -> Dataset {
        let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), rows: Vec::new(), labels: Vec::new() };
        match self {
            Shape::Jain => {
                g.arc(276, 1, (30.0, 20.0), (12.0, 16.5), (190.0, 350.0));
                g.arc(97, 2, (16.0, 10.5), (14.0, 16.5), (10.0, 170.0));
            }
            Shape::Aggregation => {
                g.ellipse(45, 1, (7.0, 23.0), (3.5, 3.0));
                g.ellipse(170, 2, (10.0, 8.0), (6.5, 6.5));
                g.ellipse(102, 3, (19.0, 21.0), (4.5, 4.5));
                g.ellipse(273, 4, (33.0, 22.0), (6.5, 6.0));
                g.ellipse(34, 5, (19.8, 8.5), (2.5, 2.5));
                g.ellipse(130, 6, (29.0, 8.0), (5.0, 5.0));
                g.ellipse(34, 7, (37.0, 11.5), (2.0, 2.0));
            }
            Shape::TwoSpiral => {
                g.spiral(500, 1, 0.0);
                g.spiral(500, 2, PI);
            }
            Shape::Donut2 => {
                g.arc(700, 1, (15.0, 15.0), (8.0, 10.0), (0.0, 360.0));
                g.ellipse(300, 2, (15.0, 15.0), (3.0, 3.0));
            }
            Shape::Donut3 => {
                g.arc(599, 1, (15.0, 15.0), (9.0, 10.5), (0.0, 360.0));
                g.ellipse(200, 2, (12.0, 15.0), (1.5, 1.5));
                g.ellipse(200, 3, (18.0, 15.0), (1.5, 1.5));
            }
            Shape::Zelnik3 => {
                g.rect(80, 1, (1.0, 1.0), (3.0, 3.0));
                g.rect(80, 2, (8.0, 1.0), (3.0, 3.0));
                g.arch(106, 3);
            }
        }
        g.finish()
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = GfdcError;

    fn from_str(s: &str) -> Result<Self> {
        Shape::ALL
            .into_iter()
            .find(|sh| sh.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| GfdcError::InvalidInput(format!("unknown shape {s:?}")))
    }
}

struct Gen {
    rng: ChaCha8Rng,
    rows: Vec<[f64; 2]>,
    labels: Vec<String>,
}

impl Gen {
    fn push(&mut self, label: usize, x: f64, y: f64) {
        let round = |v: f64| (v * 100.0).round() / 100.0;
        self.rows.push([round(x), round(y)]);
        self.labels.push(label.to_string());
    }

    /// Uniform radius and angle (degrees) inside an annular sector.
    fn arc(&mut self, n: usize, label: usize, c: (f64, f64), r: (f64, f64), deg: (f64, f64)) {
        for _ in 0..n {
            let a = self.rng.random_range(deg.0..deg.1).to_radians();
            let rr = self.rng.random_range(r.0..r.1);
            self.push(label, c.0 + rr * a.cos(), c.1 + rr * a.sin());
        }
    }

    /// Uniform over the area of an axis-aligned ellipse.
    fn ellipse(&mut self, n: usize, label: usize, c: (f64, f64), radii: (f64, f64)) {
        for _ in 0..n {
            let a = self.rng.random_range(0.0..2.0 * PI);
            let rr = self.rng.random::<f64>().sqrt();
            self.push(label, c.0 + radii.0 * rr * a.cos(), c.1 + radii.1 * rr * a.sin());
        }
    }

    fn rect(&mut self, n: usize, label: usize, corner: (f64, f64), size: (f64, f64)) {
        for _ in 0..n {
            let x = corner.0 + self.rng.random_range(0.0..size.0);
            let y = corner.1 + self.rng.random_range(0.0..size.1);
            self.push(label, x, y);
        }
    }

    /// Archimedean arm `r = 1.25 theta`, rotated by `phase`, with small jitter.
    fn spiral(&mut self, n: usize, label: usize, phase: f64) {
        let (t0, t1) = (PI / 2.0, 4.5 * PI);
        for i in 0..n {
            // even spacing along the arc length, which grows like theta^2
            let s = (i as f64 + self.rng.random::<f64>()) / n as f64;
            let t = (t0 * t0 + s * (t1 * t1 - t0 * t0)).sqrt();
            let jx = self.rng.random_range(-0.15..0.15);
            let jy = self.rng.random_range(-0.15..0.15);
            let r = 1.25 * t;
            self.push(label, 20.0 + r * (t + phase).cos() + jx, 20.0 + r * (t + phase).sin() + jy);
        }
    }

    /// A thin arch spanning the two squares from above.
    fn arch(&mut self, n: usize, label: usize) {
        for _ in 0..n {
            let x = self.rng.random_range(0.0..12.0);
            let y = 7.5 + 4.0 * (PI * x / 12.0).sin() + self.rng.random_range(-0.15..0.15);
            self.push(label, x, y);
        }
    }

    fn finish(self) -> Dataset {
        Dataset::from_rows(&self.rows)
            .and_then(|d| d.with_labels(self.labels))
            .expect("generated coordinates are finite")
    }
}

/// CSV text with header `x,y,label`.
pub fn to_csv(data: &Dataset) -> String {
    let mut out = String::from("x,y,label\n");
    let labels = data.true_labels();
    for i in 0..data.n() {
        let p = data.point(i);
        let l = labels.map_or("", |l| l[i].as_str());
        out.push_str(&format!("{},{},{}\n", p[0], p[1], l));
    }
    out
}
