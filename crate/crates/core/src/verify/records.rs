use serde::{Deserialize, Serialize};

/// Which inequality a record audits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EstimateId {
    #[serde(rename = "primas2")]
    Primas2,
    #[serde(rename = "segas2")]
    Segas2,
    #[serde(rename = "tercas2")]
    Tercas2,
    #[serde(rename = "funds3")]
    Funds3,
    #[serde(rename = "dnq")]
    Dnq,
    #[serde(rename = "interm3-discrete")]
    Interm3Discrete,
    #[serde(rename = "itempo-discrete")]
    ItempoDiscrete,
    #[serde(rename = "prop31-family")]
    Prop31Family,
}

impl EstimateId {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Primas2 => "primas2",
            Self::Segas2 => "segas2",
            Self::Tercas2 => "tercas2",
            Self::Funds3 => "funds3",
            Self::Dnq => "dnq",
            Self::Interm3Discrete => "interm3-discrete",
            Self::ItempoDiscrete => "itempo-discrete",
            Self::Prop31Family => "prop31-family",
        }
    }
}

impl std::fmt::Display for EstimateId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Run parameters attached to every record.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordMeta {
    pub p: f64,
    pub mu: f64,
    pub n: usize,
    pub m: usize,
    pub h: f64,
    pub tau: Option<f64>,
    pub seed: Option<u64>,
    /// Free-form run label, e.g. the forcing kind.
    pub label: Option<String>,
}

/// One inequality instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateRecord {
    pub id: EstimateId,
    /// Variant within the id, e.g. `"primas/mu^p"` for the Proposition forms.
    pub form: Option<String>,
    pub lhs: f64,
    /// Right-hand side, or the right-hand-side basis when the constant is unspecified.
    pub rhs: f64,
    /// `slack·rhs − lhs`, explicit-constant estimates only.
    pub margin: Option<f64>,
    pub slack: Option<f64>,
    pub implied_c: Option<f64>,
    pub pass: Option<bool>,
    /// Set when the basis vanishes while the left side does not.
    pub inconsistent: bool,
    pub note: Option<String>,
    pub meta: RecordMeta,
}

impl EstimateRecord {
    /// Record for `lhs ≤ slack · rhs`.
    pub fn explicit(id: EstimateId, lhs: f64, rhs: f64, slack: f64, meta: RecordMeta) -> Self {
        let margin = slack * rhs - lhs;
        Self {
            id,
            form: None,
            lhs,
            rhs,
            margin: Some(margin),
            slack: Some(slack),
            implied_c: None,
            pass: Some(margin >= 0.0 && lhs.is_finite() && rhs.is_finite()),
            inconsistent: false,
            note: None,
            meta,
        }
    }

    /// Record for `lhs ≤ C · basis` with unspecified `C`; stores `C = lhs/basis`.
    pub fn implied(id: EstimateId, lhs: f64, basis: f64, meta: RecordMeta) -> Self {
        let (implied_c, inconsistent) = if lhs == 0.0 {
            (Some(0.0), false)
        } else if basis == 0.0 {
            (None, true)
        } else {
            (Some(lhs / basis), false)
        };
        Self {
            id,
            form: None,
            lhs,
            rhs: basis,
            margin: None,
            slack: None,
            implied_c,
            pass: None,
            inconsistent,
            note: None,
            meta,
        }
    }

    pub fn with_form(mut self, form: impl Into<String>) -> Self {
        self.form = Some(form.into());
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Keeps the margin but drops the pass/fail verdict.
    pub fn informational(mut self) -> Self {
        self.pass = None;
        self
    }

    /// Margin relative to the larger side.
    pub fn relative_margin(&self) -> Option<f64> {
        self.margin.map(|m| m / self.lhs.abs().max(self.rhs.abs()).max(f64::MIN_POSITIVE))
    }

    /// Failed explicit check or inconsistent implied constant.
    pub fn failed(&self) -> bool {
        self.pass == Some(false) || self.inconsistent
    }

    fn sort_key(&self) -> (EstimateId, Option<&str>, [u64; 4], usize, usize, Option<u64>) {
        let m = &self.meta;
        (
            self.id,
            self.form.as_deref(),
            [m.p.to_bits(), m.mu.to_bits(), m.h.to_bits(), m.tau.unwrap_or(0.0).to_bits()],
            m.n,
            m.m,
            m.seed,
        )
    }
}

/// Spread of implied constants for one estimate across a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Uniformity {
    pub id: EstimateId,
    pub form: Option<String>,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    /// `max / min`; infinite when `min = 0 < max`.
    pub ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepReport {
    pub records: Vec<EstimateRecord>,
    pub uniformity: Vec<Uniformity>,
    /// No explicit check failed and every uniformity statistic passed.
    pub pass: bool,
}

impl SweepReport {
    pub fn new(records: Vec<EstimateRecord>) -> Self {
        let mut r = Self { records, uniformity: Vec::new(), pass: true };
        r.sort();
        r.refresh_pass();
        r
    }

    pub fn extend(&mut self, records: impl IntoIterator<Item = EstimateRecord>) {
        self.records.extend(records);
        self.sort();
        self.refresh_pass();
    }

    /// Deterministic order by id, form and metadata.
    fn sort(&mut self) {
        self.records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()).then_with(|| a.meta.label.cmp(&b.meta.label)));
    }

    fn refresh_pass(&mut self) {
        self.pass = !self.records.iter().any(EstimateRecord::failed) && self.uniformity.iter().all(|u| u.pass);
    }

    /// Adds a max/min statistic over the implied constants of `id` (and `form`).
    pub fn add_uniformity(&mut self, id: EstimateId, form: Option<&str>, threshold: f64) -> Option<&Uniformity> {
        let values: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.id == id && r.form.as_deref() == form)
            .filter_map(|r| r.implied_c)
            .collect();
        if values.is_empty() {
            return None;
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ratio = if max == 0.0 {
            1.0
        } else if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        };
        self.uniformity.push(Uniformity {
            id,
            form: form.map(str::to_owned),
            count: values.len(),
            min,
            max,
            ratio,
            threshold,
            pass: ratio <= threshold,
        });
        self.refresh_pass();
        self.uniformity.last()
    }

    pub fn failures(&self) -> impl Iterator<Item = &EstimateRecord> {
        self.records.iter().filter(|r| r.failed())
    }

    /// Flat CSV, one row per record.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("id,form,p,mu,n,m,h,tau,seed,label,lhs,rhs,slack,margin,implied_c,pass,inconsistent\n");
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        for r in &self.records {
            let m = &r.meta;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.id,
                r.form.as_deref().unwrap_or(""),
                fmt_f64(m.p),
                fmt_f64(m.mu),
                m.n,
                m.m,
                fmt_f64(m.h),
                opt(m.tau),
                m.seed.map(|s| s.to_string()).unwrap_or_default(),
                m.label.as_deref().unwrap_or(""),
                fmt_f64(r.lhs),
                fmt_f64(r.rhs),
                opt(r.slack),
                opt(r.margin),
                opt(r.implied_c),
                r.pass.map(|b| b.to_string()).unwrap_or_default(),
                r.inconsistent
            ));
        }
        out
    }
}

/// Round-trip float formatting for CSV output.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}
