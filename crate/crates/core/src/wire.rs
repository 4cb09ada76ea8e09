//! Line-oriented file formats: flow CSV, the monitor-to-collector report
//! wire format, alarm/ground-truth/ROC tables.
//!
//! All readers skip blank lines and `#` comment lines, so writers are free
//! to prepend provenance headers (the CLI records the seed this way).

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use crate::collector::{Alarm, Method};
use crate::error::{Error, Result};
use crate::eval::RocPoint;
use crate::monitor::{FlowRecord, MonitorReport, ReportEntry};
use crate::netsim::GroundTruth;
use crate::series::CensoredSeries;

pub const FLOWS_HEADER: &str = "start_time,end_time,src,dst,syn_count";
pub const ALARMS_HEADER: &str = "window_id,dst,p_value,change_point,method";
pub const GROUND_TRUTH_HEADER: &str = "replication,attacked_dst,tau,attacker_count";
pub const ROC_HEADER: &str = "method,eta,alpha,fa_rate,det_rate";
pub const AUC_HEADER: &str = "method,eta,auc";

/// Lines worth parsing: skips blanks and `#` comments, keeps 1-based numbers.
fn data_lines(reader: impl BufRead) -> impl Iterator<Item = io::Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, line)| line.map(|l| (i + 1, l)))
        .filter(|item| match item {
            Ok((_, l)) => {
                let t = l.trim();
                !t.is_empty() && !t.starts_with('#')
            }
            Err(_) => true,
        })
}

pub fn write_flows_csv<W: Write>(w: &mut W, flows: &[FlowRecord]) -> io::Result<()> {
    writeln!(w, "{FLOWS_HEADER}")?;
    for f in flows {
        writeln!(
            w,
            "{},{},{},{},{}",
            f.start_time, f.end_time, f.src, f.dst, f.syn_count
        )?;
    }
    Ok(())
}

/// Parses `start_time,end_time,src,dst,syn_count` lines; the header line is
/// optional. Errors carry the offending line number.
pub fn read_flows_csv(reader: impl BufRead) -> Result<Vec<FlowRecord>> {
    let mut flows = Vec::new();
    for item in data_lines(reader) {
        let (line, text) = item?;
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        if line == 1 && fields.first() == Some(&"start_time") {
            continue;
        }
        flows.push(parse_flow(&fields).map_err(|msg| Error::Parse { line, msg })?);
    }
    Ok(flows)
}

fn parse_flow(fields: &[&str]) -> std::result::Result<FlowRecord, String> {
    if fields.len() != 5 {
        return Err(format!("expected 5 fields, got {}", fields.len()));
    }
    let start_time: f64 = fields[0]
        .parse()
        .map_err(|_| format!("bad start_time {:?}", fields[0]))?;
    let end_time: f64 = fields[1]
        .parse()
        .map_err(|_| format!("bad end_time {:?}", fields[1]))?;
    if !start_time.is_finite() || !end_time.is_finite() || end_time < start_time {
        return Err(format!("bad time span {start_time}..{end_time}"));
    }
    if fields[2].is_empty() || fields[3].is_empty() {
        return Err("empty address".into());
    }
    let syn_count: u64 = fields[4]
        .parse()
        .map_err(|_| format!("bad syn_count {:?}", fields[4]))?;
    Ok(FlowRecord {
        start_time,
        end_time,
        src: fields[2].to_string(),
        dst: fields[3].to_string(),
        syn_count,
    })
}

/// Writes one report as wire lines
/// `monitor_id,window_id,dst,p_value,lower[0..P-1],upper[0..P-1]`:
/// exactly `2 P` scalars of series payload per entry.
pub fn write_report<W: Write>(w: &mut W, report: &MonitorReport) -> io::Result<()> {
    for entry in &report.entries {
        write!(
            w,
            "{},{},{},{}",
            report.monitor_id, report.window_id, entry.dst, entry.p_value
        )?;
        for v in entry.series.lower() {
            write!(w, ",{v}")?;
        }
        for v in entry.series.upper() {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Reads wire lines back into reports, grouping entries by
/// `(window_id, monitor_id)` in any arrival order.
pub fn read_reports(reader: impl BufRead) -> Result<Vec<MonitorReport>> {
    let mut groups: BTreeMap<(u64, u32), Vec<ReportEntry>> = BTreeMap::new();
    for item in data_lines(reader) {
        let (line, text) = item?;
        let (key, entry) = parse_report_line(&text)
            .map_err(|msg| Error::protocol(format!("line {line}: {msg}")))?;
        groups.entry(key).or_default().push(entry);
    }
    Ok(groups
        .into_iter()
        .map(|((window_id, monitor_id), mut entries)| {
            entries.sort_by(|a, b| a.p_value.total_cmp(&b.p_value).then_with(|| a.dst.cmp(&b.dst)));
            MonitorReport {
                monitor_id,
                window_id,
                entries,
            }
        })
        .collect())
}

fn parse_report_line(text: &str) -> std::result::Result<((u64, u32), ReportEntry), String> {
    let fields: Vec<&str> = text.split(',').map(str::trim).collect();
    if fields.len() < 6 || (fields.len() - 4) % 2 != 0 {
        return Err(format!(
            "expected monitor_id,window_id,dst,p_value and 2P bounds, got {} fields",
            fields.len()
        ));
    }
    let monitor_id: u32 = fields[0]
        .parse()
        .map_err(|_| format!("bad monitor_id {:?}", fields[0]))?;
    let window_id: u64 = fields[1]
        .parse()
        .map_err(|_| format!("bad window_id {:?}", fields[1]))?;
    let dst = fields[2].to_string();
    if dst.is_empty() {
        return Err("empty destination".into());
    }
    let p_value: f64 = fields[3]
        .parse()
        .map_err(|_| format!("bad p_value {:?}", fields[3]))?;
    if !(0.0..=1.0).contains(&p_value) {
        return Err(format!("p_value {p_value} outside [0, 1]"));
    }
    let bins = (fields.len() - 4) / 2;
    let parse_bounds = |slice: &[&str]| -> std::result::Result<Vec<u64>, String> {
        slice
            .iter()
            .map(|f| f.parse::<u64>().map_err(|_| format!("bad bound {f:?}")))
            .collect()
    };
    let lower = parse_bounds(&fields[4..4 + bins])?;
    let upper = parse_bounds(&fields[4 + bins..])?;
    let series = CensoredSeries::new(lower, upper).map_err(|e| e.to_string())?;
    Ok((
        (window_id, monitor_id),
        ReportEntry {
            dst,
            series,
            p_value,
        },
    ))
}

pub fn write_alarms_csv<W: Write>(
    w: &mut W,
    alarms: &[(Alarm, Method)],
    with_header: bool,
) -> io::Result<()> {
    if with_header {
        writeln!(w, "{ALARMS_HEADER}")?;
    }
    for (alarm, method) in alarms {
        writeln!(
            w,
            "{},{},{},{},{}",
            alarm.window_id, alarm.dst, alarm.p_value, alarm.change_point, method
        )?;
    }
    Ok(())
}

pub fn write_ground_truth_csv<W: Write>(
    w: &mut W,
    truths: &[(u32, &GroundTruth)],
) -> io::Result<()> {
    writeln!(w, "{GROUND_TRUTH_HEADER}")?;
    for (replication, truth) in truths {
        writeln!(
            w,
            "{},{},{},{}",
            replication,
            truth.attacked_dst,
            truth.change_bin,
            truth.attacker_srcs.len()
        )?;
    }
    Ok(())
}

pub fn write_roc_csv<W: Write>(
    w: &mut W,
    rows: &[(Method, f64, &[RocPoint])],
) -> io::Result<()> {
    writeln!(w, "{ROC_HEADER}")?;
    for (method, eta, curve) in rows {
        for point in *curve {
            writeln!(
                w,
                "{},{},{},{},{}",
                method, eta, point.alpha, point.false_alarm_rate, point.detection_rate
            )?;
        }
    }
    Ok(())
}

pub fn write_auc_csv<W: Write>(w: &mut W, rows: &[(Method, f64, f64)]) -> io::Result<()> {
    writeln!(w, "{AUC_HEADER}")?;
    for (method, eta, auc) in rows {
        writeln!(w, "{method},{eta},{auc}")?;
    }
    Ok(())
}
