//! Result rows and the per-method bench summary.

use diagcut::domain::{SolveResult, SolveStatus};

pub const HEADER: &str = "instance,method,nwm,status,objective,bound,gap,\
total_time,callback_time,callback_calls,cuts,nodes,seed";

/// One solve outcome in stable machine-readable column order.
#[derive(Debug, Clone)]
pub struct Row {
    pub instance: String,
    pub method: String,
    /// Sample counts as `N/W/m` with `-` in unused slots.
    pub nwm: String,
    pub status: String,
    pub objective: f64,
    pub bound: f64,
    pub gap: f64,
    pub total_time: f64,
    pub callback_time: f64,
    pub callback_calls: u64,
    pub cuts: u64,
    pub nodes: u64,
    pub seed: String,
}

impl Row {
    pub fn from_result(
        instance: String,
        method: String,
        nwm: String,
        seed: String,
        res: &SolveResult,
    ) -> Self {
        Row {
            instance,
            method,
            nwm,
            status: match res.status {
                SolveStatus::Optimal => "optimal".to_string(),
                SolveStatus::Limit => "limit".to_string(),
            },
            objective: res.revenue,
            bound: res.bound,
            gap: res.gap,
            total_time: res.stats.total_time,
            callback_time: res.stats.callback_time,
            callback_calls: res.stats.callback_calls,
            cuts: res.stats.cuts_added,
            nodes: res.stats.bb_nodes,
            seed,
        }
    }

    pub fn failed(instance: String, method: String, nwm: String, seed: String) -> Self {
        Row {
            instance,
            method,
            nwm,
            status: "error".to_string(),
            objective: f64::NAN,
            bound: f64::NAN,
            gap: f64::NAN,
            total_time: 0.0,
            callback_time: 0.0,
            callback_calls: 0,
            cuts: 0,
            nodes: 0,
            seed,
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{:.6},{:.6},{:.3},{:.3},{},{},{},{}",
            self.instance,
            self.method,
            self.nwm,
            self.status,
            self.objective,
            self.bound,
            self.gap,
            self.total_time,
            self.callback_time,
            self.callback_calls,
            self.cuts,
            self.nodes,
            self.seed
        )
    }
}

/// Geometric mean with every value below 1 lifted to 1 first, matching the
/// reporting convention for sub-second runtimes.
pub fn geomean_lifted(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut log_sum, mut count) = (0.0, 0u32);
    for v in values {
        log_sum += v.max(1.0).ln();
        count += 1;
    }
    if count == 0 {
        return f64::NAN;
    }
    (log_sum / f64::from(count)).exp()
}

/// Per-method summary lines, a pure fold over the rows. Error rows count
/// toward the denominator but contribute no statistics.
pub fn summarize(rows: &[Row]) -> Vec<String> {
    let mut keys: Vec<(String, String)> = Vec::new();
    for row in rows {
        let key = (row.method.clone(), row.nwm.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut lines = Vec::new();
    for (method, nwm) in keys {
        let group: Vec<&Row> = rows
            .iter()
            .filter(|r| r.method == method && r.nwm == nwm)
            .collect();
        let done: Vec<&&Row> = group.iter().filter(|r| r.status != "error").collect();
        let solved = group.iter().filter(|r| r.status == "optimal").count();
        let geo_total = geomean_lifted(done.iter().map(|r| r.total_time));
        let geo_callback = geomean_lifted(done.iter().map(|r| r.callback_time));
        let mean_gap = if done.is_empty() {
            f64::NAN
        } else {
            done.iter().map(|r| r.gap).sum::<f64>() / done.len() as f64
        };
        lines.push(format!(
            "# method={method} nwm={nwm} solved={solved}/{} geomean_total_s={geo_total:.3} \
geomean_callback_s={geo_callback:.3} mean_gap={mean_gap:.6}",
            group.len()
        ));
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifted_geomean_of_one_and_four_is_two() {
        assert!((geomean_lifted([1.0, 4.0]) - 2.0).abs() < 1e-12);
        assert!((geomean_lifted([0.01, 4.0]) - 2.0).abs() < 1e-12);
        assert!((geomean_lifted([0.2, 0.9]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn summary_is_a_fold_over_rows() {
        let mut a = Row::failed("i0".into(), "vf".into(), "-/-/-".into(), "0".into());
        a.status = "optimal".into();
        a.gap = 0.0;
        a.total_time = 4.0;
        a.callback_time = 0.5;
        let b = Row::failed("i1".into(), "vf".into(), "-/-/-".into(), "0".into());
        let lines = summarize(&[a, b]);
        assert_eq!(lines.len(), 1);
        assert!(lines[0].contains("solved=1/2"));
        assert!(lines[0].contains("geomean_total_s=4.000"));
        assert!(lines[0].contains("geomean_callback_s=1.000"));
    }
}
