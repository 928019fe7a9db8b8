//! Seeded generators for synthetic data with known causal structure.
//!
//! The tabular generators emit CSV text in the same layout as the public
//! datasets they stand in for, so they run through the real schemas and
//! recipes. Every one has a directed path from the sensitive attribute to the
//! target.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::causal::{Edge, WeightedDag};
use crate::dataset::EncodedMatrix;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn laplace(r: &mut ChaCha8Rng, scale: f64) -> f64 {
    let u: f64 = r.random_range(-0.5..0.5);
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

fn normal(r: &mut ChaCha8Rng, sd: f64) -> f64 {
    Normal::new(0.0, sd).expect("finite sd").sample(r)
}

fn pick<'a>(r: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    items[r.random_range(0..items.len())]
}

/// Linear SEM with uniform noise, nodes listed in causal order.
#[derive(Debug, Clone)]
pub struct LinearSem {
    pub dag: WeightedDag,
}

impl LinearSem {
    /// `edges` are `(from, to, weight)` and must respect the order of `nodes`.
    pub fn new(nodes: &[&str], edges: &[(&str, &str, f64)]) -> Self {
        let dag = WeightedDag::new(
            nodes.iter().map(|s| s.to_string()).collect(),
            edges
                .iter()
                .map(|&(f, t, w)| Edge {
                    from: f.into(),
                    to: t.into(),
                    weight: w,
                })
                .collect(),
        )
        .expect("acyclic");
        LinearSem { dag }
    }

    /// The five-node chain-and-fork used in discovery tests.
    pub fn five_node() -> Self {
        LinearSem::new(
            &["x0", "x1", "x2", "x3", "x4"],
            &[
                ("x0", "x1", 0.8),
                ("x0", "x2", -0.6),
                ("x1", "x3", 0.7),
                ("x2", "x3", 0.5),
                ("x3", "x4", -0.9),
                ("x1", "x4", 0.4),
            ],
        )
    }

    /// `n` rows with independent Uniform(-1, 1) noise on every node.
    pub fn sample(&self, n: usize, seed: u64) -> EncodedMatrix {
        let mut r = rng(seed);
        let nodes = self.dag.nodes();
        let order = self.dag.order().to_vec();
        let mut x = DMatrix::zeros(n, nodes.len());
        for i in 0..n {
            for name in &order {
                let j = self.dag.index_of(name).expect("node");
                let mut v: f64 = r.random_range(-1.0..1.0);
                for (p, w) in self.dag.parents(name) {
                    v += w * x[(i, self.dag.index_of(p).expect("parent"))];
                }
                x[(i, j)] = v;
            }
        }
        let names: Vec<&str> = nodes.iter().map(String::as_str).collect();
        EncodedMatrix::from_raw(&names, x)
    }
}

/// Parameters of a one-factor model `y = intercept + loading * K + coef * s + e`.
#[derive(Debug, Clone)]
pub struct FactorTruth {
    pub intercepts: Vec<f64>,
    pub loadings: Vec<f64>,
    pub sensitive_coef: Vec<f64>,
    pub noise_sd: Vec<f64>,
}

impl FactorTruth {
    pub fn three_outcomes() -> Self {
        FactorTruth {
            intercepts: vec![0.5, -1.0, 2.0],
            loadings: vec![1.0, 0.7, 1.3],
            sensitive_coef: vec![0.4, -0.8, 0.2],
            noise_sd: vec![0.5, 0.6, 0.7],
        }
    }

    /// Columns `s, y0, y1, ...` with `s` Bernoulli(0.4) and `K` standard normal.
    pub fn sample(&self, n: usize, seed: u64) -> EncodedMatrix {
        let mut r = rng(seed);
        let m = self.loadings.len();
        let mut x = DMatrix::zeros(n, m + 1);
        for i in 0..n {
            let s = f64::from(u8::from(r.random_bool(0.4)));
            let k: f64 = StandardNormal.sample(&mut r);
            x[(i, 0)] = s;
            for j in 0..m {
                x[(i, j + 1)] = self.intercepts[j]
                    + self.loadings[j] * k
                    + self.sensitive_coef[j] * s
                    + normal(&mut r, self.noise_sd[j]);
            }
        }
        let names: Vec<String> = std::iter::once("s".to_string())
            .chain((0..m).map(|j| format!("y{j}")))
            .collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        EncodedMatrix::from_raw(&refs, x)
    }
}

/// Law-school layout: race, sex, LSAT, UGPA, ZFYA, first_pf.
///
/// A latent aptitude drives all three scores; race and sex shift each of them.
pub fn law_school_csv(n: usize, seed: u64) -> String {
    let mut r = rng(seed);
    let others = ["Asian", "Black", "Hispanic", "Mexican", "Other"];
    let mut out = String::from("race,sex,LSAT,UGPA,ZFYA,first_pf\n");
    for _ in 0..n {
        let race = if r.random_bool(0.8) { "White" } else { pick(&mut r, &others) };
        let non_white = f64::from(u8::from(race != "White"));
        let male = r.random_bool(0.55);
        let m = f64::from(u8::from(male));
        let k: f64 = StandardNormal.sample(&mut r);
        let ugpa = (3.25 + 0.18 * k - 0.15 * non_white + 0.03 * m + normal(&mut r, 0.25)).clamp(1.5, 4.2);
        let lsat = (37.5 + 3.5 * k - 4.0 * non_white + 0.6 * m + normal(&mut r, 3.0)).clamp(11.0, 48.0);
        let zfya = 0.45 * k - 0.5 * non_white + 0.06 * m + normal(&mut r, 0.75);
        out.push_str(&format!(
            "{race},{},{lsat:.1},{ugpa:.2},{zfya:.2},{}\n",
            if male { 2 } else { 1 },
            u8::from(zfya > -1.2)
        ));
    }
    out
}

const STUDENT_HEADER: &str = "school;sex;age;address;famsize;Pstatus;Medu;Fedu;Mjob;Fjob;reason;guardian;\
traveltime;studytime;failures;schoolsup;famsup;paid;activities;nursery;higher;internet;romantic;\
famrel;freetime;goout;Dalc;Walc;health;absences;G1;G2;G3";

/// Student-performance layout (semicolon separated, quoted strings).
///
/// Sex affects study time, alcohol use and the first-period grade; the grades
/// form a chain G1 -> G2 -> G3.
pub fn student_csv(n: usize, seed: u64) -> String {
    let mut r = rng(seed);
    let jobs = ["at_home", "health", "other", "services", "teacher"];
    let yn = ["no", "yes"];
    let mut out = String::from(STUDENT_HEADER);
    out.push('\n');
    for _ in 0..n {
        let male = r.random_bool(0.45);
        let m = f64::from(u8::from(male));
        let medu = r.random_range(0..=4) as f64;
        let failures = if r.random_bool(0.8) { 0.0 } else { r.random_range(1..=3) as f64 };
        let studytime = (2.3 - 0.6 * m + laplace(&mut r, 0.5)).round().clamp(1.0, 4.0);
        let walc = (1.8 + 0.9 * m + laplace(&mut r, 0.7)).round().clamp(1.0, 5.0);
        let absences = (3.0 + laplace(&mut r, 3.0)).abs().round();
        let g1 = (9.0 + 0.9 * studytime - 1.6 * failures + 0.3 * medu + 0.8 * m - 0.3 * walc + laplace(&mut r, 1.8))
            .round()
            .clamp(0.0, 20.0);
        let g2 = (0.95 * g1 + 0.6 + laplace(&mut r, 0.9)).round().clamp(0.0, 20.0);
        let g3 = (1.0 * g2 + 0.3 - 0.05 * absences + laplace(&mut r, 0.9)).round().clamp(0.0, 20.0);
        let mut fields: Vec<String> = vec![
            format!("\"{}\"", if r.random_bool(0.7) { "GP" } else { "MS" }),
            format!("\"{}\"", if male { "M" } else { "F" }),
            r.random_range(15..=19).to_string(),
            format!("\"{}\"", if r.random_bool(0.75) { "U" } else { "R" }),
            format!("\"{}\"", if r.random_bool(0.7) { "GT3" } else { "LE3" }),
            format!("\"{}\"", if r.random_bool(0.9) { "T" } else { "A" }),
            medu.to_string(),
            r.random_range(0..=4).to_string(),
            format!("\"{}\"", pick(&mut r, &jobs)),
            format!("\"{}\"", pick(&mut r, &jobs)),
            format!("\"{}\"", pick(&mut r, &["course", "home", "other", "reputation"])),
            format!("\"{}\"", pick(&mut r, &["father", "mother", "other"])),
            r.random_range(1..=4).to_string(),
            studytime.to_string(),
            failures.to_string(),
        ];
        for _ in 0..8 {
            fields.push(format!("\"{}\"", pick(&mut r, &yn)));
        }
        for _ in 0..4 {
            fields.push(r.random_range(1..=5).to_string());
        }
        fields.push(walc.to_string());
        fields.push(r.random_range(1..=5).to_string());
        for v in [absences, g1, g2, g3] {
            fields.push(v.to_string());
        }
        out.push_str(&fields.join(";"));
        out.push('\n');
    }
    out
}

const OULAD_HEADER: &str = "code_module,code_presentation,id_student,gender,region,highest_education,\
imd_band,age_band,num_of_prev_attempts,studied_credits,disability,final_result";

/// OULAD studentInfo layout covering several modules, about a quarter in BBB.
///
/// Disability lowers the education level; education, deprivation band and
/// disability drive the final result.
pub fn oulad_csv(n: usize, seed: u64) -> String {
    let mut r = rng(seed);
    let modules = ["AAA", "BBB", "CCC", "DDD", "EEE", "FFF", "GGG"];
    let education = [
        "No Formal quals",
        "Lower Than A Level",
        "A Level or Equivalent",
        "HE Qualification",
        "Post Graduate Qualification",
    ];
    let imd = [
        "0-10%", "10-20", "20-30%", "30-40%", "40-50%", "50-60%", "60-70%", "70-80%", "80-90%", "90-100%",
    ];
    let regions = ["East Anglian Region", "Scotland", "Wales", "London Region", "North Region"];
    let mut out = String::from(OULAD_HEADER);
    out.push('\n');
    for id in 0..n {
        let module = if r.random_bool(0.25) { "BBB" } else { pick(&mut r, &modules) };
        let disabled = r.random_bool(0.12);
        let d = f64::from(u8::from(disabled));
        let age = if r.random_bool(0.7) { 0 } else if r.random_bool(0.9) { 1 } else { 2 };
        let edu_latent = 1.7 - 0.9 * d + 0.3 * age as f64 + laplace(&mut r, 0.6);
        let edu = edu_latent.round().clamp(0.0, 4.0) as usize;
        let band = r.random_range(0..imd.len());
        let credits = [60, 60, 90, 120][r.random_range(0..4)];
        let logit = -0.4 + 0.7 * (edu as f64 - 1.5) + 0.12 * (band as f64 - 4.5) - 1.0 * d
            - 0.01 * (credits as f64 - 60.0)
            + laplace(&mut r, 0.4);
        let pass = r.random_bool(1.0 / (1.0 + (-logit).exp()));
        let result = match (pass, r.random_bool(0.2)) {
            (true, true) => "Distinction",
            (true, false) => "Pass",
            (false, true) => "Fail",
            (false, false) => "Withdrawn",
        };
        // the real file has unknown deprivation bands; they are dropped at load
        let band_text = if r.random_bool(0.02) { "?" } else { imd[band] };
        out.push_str(&format!(
            "{module},2014J,{},{},\"{}\",{},{band_text},{},{},{credits},{},{result}\n",
            100_000 + id,
            if r.random_bool(0.5) { "M" } else { "F" },
            pick(&mut r, &regions),
            education[edu],
            ["0-35", "35-55", "55<="][age],
            u8::from(r.random_bool(0.1)),
            if disabled { "Y" } else { "N" },
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seeded() {
        assert_eq!(law_school_csv(20, 1), law_school_csv(20, 1));
        assert_ne!(student_csv(20, 1), student_csv(20, 2));
        assert_eq!(oulad_csv(30, 5).lines().count(), 31);
        let a = LinearSem::five_node().sample(10, 3);
        assert_eq!(a.values, LinearSem::five_node().sample(10, 3).values);
    }

    #[test]
    fn student_rows_have_every_column() {
        let cols = STUDENT_HEADER.split(';').count();
        for line in student_csv(15, 4).lines() {
            assert_eq!(line.split(';').count(), cols);
        }
    }
}
