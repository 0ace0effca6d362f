//! Kind-tagged CSV event log shared by the simulator and the estimator.
//!
//! ```text
//! arrival,<time>,<ped_id>,<route_id>,<speed>
//! snapshot,<time>,<link_id>,<x1>,<x2>,<ped_id>,<ped_pos>,<ped_speed>
//! visit,<time>,<link_id>
//! ```
//!
//! A snapshot with several visible pedestrians spans one row per pedestrian;
//! an empty snapshot is a single row with the three pedestrian fields blank.
//! Floats are written in shortest round-trip form, so a log read back is
//! bit-identical to the one written.

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::network::{LinkId, RouteId};
use crate::simkit::{PedestrianId, SeenPedestrian, SensingSnapshot};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArrivalRecord {
    pub time: f64,
    pub ped_id: PedestrianId,
    pub route_id: RouteId,
    pub speed: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VisitRecord {
    pub time: f64,
    pub link: LinkId,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EventLog {
    pub arrivals: Vec<ArrivalRecord>,
    pub snapshots: Vec<SensingSnapshot>,
    pub visits: Vec<VisitRecord>,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl EventLog {
    /// Writes all records in time order; at equal times arrivals come before
    /// visits, visits before snapshots.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), LogError> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_writer(out);
        let (mut a, mut v, mut s) = (0, 0, 0);
        loop {
            let next = [
                self.arrivals.get(a).map(|r| (r.time, 0)),
                self.visits.get(v).map(|r| (r.time, 1)),
                self.snapshots.get(s).map(|r| (r.time, 2)),
            ]
            .into_iter()
            .flatten()
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            match next {
                None => break,
                Some((_, 0)) => {
                    let r = &self.arrivals[a];
                    w.write_record([
                        "arrival".to_string(),
                        r.time.to_string(),
                        r.ped_id.to_string(),
                        r.route_id.to_string(),
                        r.speed.to_string(),
                    ])?;
                    a += 1;
                }
                Some((_, 1)) => {
                    let r = &self.visits[v];
                    w.write_record(["visit".to_string(), r.time.to_string(), r.link.to_string()])?;
                    v += 1;
                }
                Some(_) => {
                    let snap = &self.snapshots[s];
                    let head = [
                        "snapshot".to_string(),
                        snap.time.to_string(),
                        snap.link.to_string(),
                        snap.x1.to_string(),
                        snap.x2.to_string(),
                    ];
                    if snap.pedestrians.is_empty() {
                        w.write_record(head.iter().map(String::as_str).chain(["", "", ""]))?;
                    }
                    for p in &snap.pedestrians {
                        let tail = [p.id.to_string(), p.position.to_string(), p.speed.to_string()];
                        w.write_record(head.iter().chain(tail.iter()))?;
                    }
                    s += 1;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, LogError> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let mut log = EventLog::default();
        for row in r.records() {
            let row = row?;
            let line = row.position().map_or(0, |p| p.line());
            let bad = |message: String| LogError::Malformed { line, message };
            let field = |i: usize| row.get(i).ok_or_else(|| bad(format!("missing field {}", i + 1)));
            let float = |i: usize| -> Result<f64, LogError> {
                let f = field(i)?;
                f.parse::<f64>().map_err(|_| bad(format!("field {}: not a number: {f:?}", i + 1)))
            };
            let int = |i: usize| -> Result<u64, LogError> {
                let f = field(i)?;
                f.parse::<u64>().map_err(|_| bad(format!("field {}: not an integer: {f:?}", i + 1)))
            };
            let arity = |n: usize| {
                if row.len() == n {
                    Ok(())
                } else {
                    Err(bad(format!("expected {n} fields, found {}", row.len())))
                }
            };
            match field(0)? {
                "arrival" => {
                    arity(5)?;
                    log.arrivals.push(ArrivalRecord {
                        time: float(1)?,
                        ped_id: int(2)?,
                        route_id: int(3)? as RouteId,
                        speed: float(4)?,
                    });
                }
                "visit" => {
                    arity(3)?;
                    log.visits.push(VisitRecord {
                        time: float(1)?,
                        link: int(2)? as LinkId,
                    });
                }
                "snapshot" => {
                    arity(8)?;
                    let (time, link, x1, x2) = (float(1)?, int(2)? as LinkId, float(3)?, float(4)?);
                    if !(x1 > x2 && x2 >= 0.0) {
                        return Err(bad(format!("snapshot bounds must satisfy x1 > x2 >= 0, got x1={x1}, x2={x2}")));
                    }
                    let same = log
                        .snapshots
                        .last()
                        .is_some_and(|s| s.time == time && s.link == link && s.x1 == x1 && s.x2 == x2);
                    if !same {
                        log.snapshots.push(SensingSnapshot {
                            time,
                            link,
                            x1,
                            x2,
                            pedestrians: Vec::new(),
                        });
                    }
                    if field(5)?.is_empty() {
                        continue;
                    }
                    let seen = SeenPedestrian {
                        id: int(5)?,
                        position: float(6)?,
                        speed: float(7)?,
                    };
                    if !(seen.speed > 0.0) {
                        return Err(bad(format!("pedestrian speed must be positive, got {}", seen.speed)));
                    }
                    log.snapshots.last_mut().unwrap().pedestrians.push(seen);
                }
                other => return Err(bad(format!("unknown record kind {other:?}"))),
            }
        }
        Ok(log)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LogError> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LogError> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EventLog {
        EventLog {
            arrivals: vec![
                ArrivalRecord { time: -3.25, ped_id: 0, route_id: 2, speed: 1.4 },
                ArrivalRecord { time: 0.1 + 0.2, ped_id: 1, route_id: 0, speed: 1.0 / 3.0 },
            ],
            snapshots: vec![
                SensingSnapshot { time: 0.0, link: 4, x1: 20.0, x2: 0.0, pedestrians: vec![] },
                SensingSnapshot {
                    time: 0.0,
                    link: 5,
                    x1: 80.0,
                    x2: 60.5,
                    pedestrians: vec![
                        SeenPedestrian { id: 0, position: 61.0, speed: 1.4 },
                        SeenPedestrian { id: 9, position: 70.0, speed: 2.0 },
                    ],
                },
            ],
            visits: vec![VisitRecord { time: 0.0, link: 4 }, VisitRecord { time: 12.5, link: 6 }],
        }
    }

    #[test]
    fn text_layout() {
        let text = sample().to_csv_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "arrival,-3.25,0,2,1.4");
        assert_eq!(lines[1], "visit,0,4");
        assert_eq!(lines[2], "snapshot,0,4,20,0,,,");
        assert_eq!(lines[3], "snapshot,0,5,80,60.5,0,61,1.4");
        assert_eq!(lines[4], "snapshot,0,5,80,60.5,9,70,2");
        assert_eq!(lines[5], "arrival,0.30000000000000004,1,0,0.3333333333333333");
        assert_eq!(lines[6], "visit,12.5,6");
    }

    #[test]
    fn read_back_is_exact() {
        let log = sample();
        let again = EventLog::read_csv(log.to_csv_string().as_bytes()).unwrap();
        let mut expected = log.clone();
        expected.arrivals.sort_by(|a, b| a.time.total_cmp(&b.time));
        assert_eq!(again, expected);
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let text = "visit,0,1\narrival,1.0,2,3\n";
        match EventLog::read_csv(text.as_bytes()) {
            Err(LogError::Malformed { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("expected 5 fields"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = "visit,0,1\nvisit,abc,1\n";
        assert!(matches!(EventLog::read_csv(text.as_bytes()), Err(LogError::Malformed { line: 2, .. })));
        let text = "bogus,1\n";
        assert!(matches!(EventLog::read_csv(text.as_bytes()), Err(LogError::Malformed { line: 1, .. })));
        let text = "snapshot,0,1,5,10,,,\n";
        assert!(matches!(EventLog::read_csv(text.as_bytes()), Err(LogError::Malformed { line: 1, .. })));
    }
}
