//! Base-station power consumption of the three architectures.
//!
//! Only RF chains, phase shifters and switches are counted; radiated and
//! baseband processing power are left out.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Per-component power draw, in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerModel {
    pub p_rf: f64,
    pub p_ps: f64,
    pub p_sw: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self { p_rf: 0.25, p_ps: 0.015, p_sw: 0.005 }
    }
}

impl PowerModel {
    pub fn new(p_rf: f64, p_ps: f64, p_sw: f64) -> Result<Self> {
        let pm = Self { p_rf, p_ps, p_sw };
        pm.validate()?;
        Ok(pm)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p_rf", self.p_rf), ("p_ps", self.p_ps), ("p_sw", self.p_sw)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// One RF chain per antenna: `M p_rf`.
    pub fn digital(&self, m: usize) -> Result<f64> {
        if m == 0 {
            return Err(invalid("antenna count must be at least 1"));
        }
        Ok(m as f64 * self.p_rf)
    }

    /// Full-array hybrid: `M_rf p_rf + M M_rf p_ps`.
    pub fn hybrid(&self, m: usize, m_rf: usize) -> Result<f64> {
        check_chains(m, m_rf)?;
        Ok(m_rf as f64 * self.p_rf + (m * m_rf) as f64 * self.p_ps)
    }

    /// Lens with a switch network: `M_rf p_rf + M_lens M_rf p_sw`.
    pub fn lens(&self, m_lens: usize, m_rf: usize) -> Result<f64> {
        check_chains(m_lens, m_rf)?;
        Ok(m_rf as f64 * self.p_rf + (m_lens * m_rf) as f64 * self.p_sw)
    }
}

fn check_chains(m: usize, m_rf: usize) -> Result<()> {
    if m_rf == 0 || m_rf > m {
        return Err(invalid(format!("need 1 <= m_rf <= {m}, got m_rf = {m_rf}")));
    }
    Ok(())
}

pub fn power_digital(m: usize, pm: &PowerModel) -> Result<f64> {
    pm.digital(m)
}

pub fn power_hybrid(m: usize, m_rf: usize, pm: &PowerModel) -> Result<f64> {
    pm.hybrid(m, m_rf)
}

pub fn power_lens(m_lens: usize, m_rf: usize, pm: &PowerModel) -> Result<f64> {
    pm.lens(m_lens, m_rf)
}

/// One row group of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub model: PowerModel,
    pub m_upa: usize,
    pub m_lens: usize,
    pub m_rf: Vec<usize>,
    pub digital_w: f64,
    pub hybrid_w: Vec<f64>,
    pub lens_w: Vec<f64>,
}

impl PowerTable {
    pub fn new(model: PowerModel, m_upa: usize, m_lens: usize, m_rf: &[usize]) -> Result<Self> {
        model.validate()?;
        if m_rf.is_empty() {
            return Err(invalid("power table needs at least one RF-chain count"));
        }
        Ok(Self {
            model,
            m_upa,
            m_lens,
            m_rf: m_rf.to_vec(),
            digital_w: model.digital(m_upa)?,
            hybrid_w: m_rf.iter().map(|&r| model.hybrid(m_upa, r)).collect::<Result<_>>()?,
            lens_w: m_rf.iter().map(|&r| model.lens(m_lens, r)).collect::<Result<_>>()?,
        })
    }

    /// Long-format CSV: `scheme,m_rf,power_w`. The digital row has an empty `m_rf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scheme,m_rf,power_w\n");
        out += &format!("upa-digital,,{}\n", self.digital_w);
        for (r, w) in self.m_rf.iter().zip(&self.hybrid_w) {
            out += &format!("upa-hybrid,{r},{w}\n");
        }
        for (r, w) in self.m_rf.iter().zip(&self.lens_w) {
            out += &format!("lens-selection,{r},{w}\n");
        }
        out
    }

    /// Aligned text in the usual table layout, one column per RF-chain count.
    pub fn to_text(&self) -> String {
        let label_w = 26;
        let col_w = 12;
        let mut out = format!("{:<label_w$}", "Power consumption (W)");
        for r in &self.m_rf {
            out += &format!("{:>col_w$}", format!("M_rf={r}"));
        }
        out.push('\n');
        out += &format!("{:<label_w$}{:>col_w$}\n", format!("UPA fully digital (M={})", self.m_upa), fmt_w(self.digital_w));
        let mut row = |label: String, values: &[f64]| {
            out += &format!("{label:<label_w$}");
            for v in values {
                out += &format!("{:>col_w$}", fmt_w(*v));
            }
            out.push('\n');
        };
        row(format!("UPA hybrid (M={})", self.m_upa), &self.hybrid_w);
        row(format!("Lens selection (M={})", self.m_lens), &self.lens_w);
        out
    }
}

fn fmt_w(w: f64) -> String {
    // trim float noise like 18.749999999999996
    let s = format!("{w:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}
