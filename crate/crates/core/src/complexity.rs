//! Cost-model calculator for the dominant protocol components, with raw
//! operation counts and their log2-scaled values: hashing Theta(k),
//! participant iteration Theta(n), polynomial work Theta(M log M),
//! multi-exponentiation Theta(n log p), single exponentiation Theta(log p).

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComplexityInputs {
    /// hash output size k in bits
    pub hash_bits: u64,
    /// participant count n
    pub participants: u64,
    /// polynomial degree M
    pub poly_degree: u64,
    /// log2 of the group modulus
    pub log_p: u64,
}

impl Default for ComplexityInputs {
    fn default() -> Self {
        // the reference operating point: k=256, n=10, M=1024, log p = 11
        ComplexityInputs {
            hash_bits: 256,
            participants: 10,
            poly_degree: 1024,
            log_p: 11,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityComponent {
    pub name: &'static str,
    pub raw: f64,
    pub log2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityReport {
    pub inputs: ComplexityInputs,
    pub components: Vec<ComplexityComponent>,
}

impl ComplexityReport {
    pub fn component(&self, name: &str) -> Option<&ComplexityComponent> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let i = &self.inputs;
        let mut out = format!(
            "complexity contributions | k={} n={} M={} log_p={}\n",
            i.hash_bits, i.participants, i.poly_degree, i.log_p
        );
        out.push_str("component | raw | log2\n");
        for c in &self.components {
            out.push_str(&format!("{} | {} | {:.4}\n", c.name, c.raw, c.log2));
        }
        out
    }
}

pub const COMP_HASHING: &str = "hashing";
pub const COMP_PARTICIPANTS: &str = "participants";
pub const COMP_POLYNOMIAL: &str = "polynomial";
pub const COMP_MULTI_EXP: &str = "multi-exponentiation";
pub const COMP_SINGLE_EXP: &str = "single-exponentiation";

pub fn complexity_report(inputs: ComplexityInputs) -> ComplexityReport {
    let k = inputs.hash_bits as f64;
    let n = inputs.participants as f64;
    let m = inputs.poly_degree as f64;
    let lp = inputs.log_p as f64;
    let mk = |name, raw: f64| ComplexityComponent {
        name,
        raw,
        log2: raw.log2(),
    };
    ComplexityReport {
        inputs,
        components: vec![
            mk(COMP_HASHING, k),
            mk(COMP_PARTICIPANTS, n),
            mk(COMP_POLYNOMIAL, m * m.log2()),
            mk(COMP_MULTI_EXP, n * lp),
            mk(COMP_SINGLE_EXP, lp),
        ],
    }
}
