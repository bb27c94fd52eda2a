//! Dataset directory: `manifest.json` plus one CSV per trip under `trips/`.

use std::collections::BTreeMap;
use std::path::Path;

use cueval_core::scenario::{format_decimal, CrashType, GeneratedTrip, ScenarioKind};
use cueval_core::{BodyModel, RoadSpec, Trip, VehicleState, VehicleTrack};
use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, write_file, CliError, Result};
use crate::tables::{check_header, csv_reader, csv_writer, finish_csv, parse_field};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRIP_HEADER: [&str; 7] = ["time_idx", "vehicle_id", "is_sv", "p", "q", "v", "phi"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripEntry {
    pub trip_id: String,
    /// Relative to the dataset directory.
    pub file: String,
    pub crash: bool,
    pub crash_index: Option<usize>,
    #[serde(default)]
    pub kind: Option<ScenarioKind>,
    #[serde(default)]
    pub crash_type: Option<CrashType>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub dt: f64,
    pub road: RoadSpec,
    pub body: BodyModel,
    /// Generator seed; absent for hand-built datasets.
    pub seed: Option<u64>,
    pub trips: Vec<TripEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: Manifest,
    pub trips: Vec<Trip>,
}

impl Dataset {
    /// Trips must share the dataset's dt, road and body.
    pub fn new(trips: Vec<Trip>, seed: Option<u64>) -> Self {
        Self::with_meta(trips.into_iter().map(|t| (t, None, None)).collect(), seed)
    }

    pub fn from_generated(generated: Vec<GeneratedTrip>, seed: Option<u64>) -> Self {
        Self::with_meta(
            generated
                .into_iter()
                .map(|g| (g.trip, g.kind, g.crash_type))
                .collect(),
            seed,
        )
    }

    fn with_meta(
        items: Vec<(Trip, Option<ScenarioKind>, Option<CrashType>)>,
        seed: Option<u64>,
    ) -> Self {
        let (dt, road, body) = items
            .first()
            .map(|(t, _, _)| (t.dt, t.road, t.sv.body))
            .unwrap_or((0.1, RoadSpec::default(), BodyModel::default()));
        let entries = items
            .iter()
            .map(|(t, kind, crash_type)| TripEntry {
                trip_id: t.trip_id.clone(),
                file: format!("trips/{}.csv", t.trip_id),
                crash: t.crash,
                crash_index: t.crash_index,
                kind: *kind,
                crash_type: *crash_type,
            })
            .collect();
        Self {
            manifest: Manifest {
                schema_version: SCHEMA_VERSION,
                dt,
                road,
                body,
                seed,
                trips: entries,
            },
            trips: items.into_iter().map(|(t, _, _)| t).collect(),
        }
    }

    pub fn trip(&self, trip_id: &str) -> Option<&Trip> {
        self.trips.iter().find(|t| t.trip_id == trip_id)
    }

    pub fn crash_count(&self) -> usize {
        self.trips.iter().filter(|t| t.crash).count()
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        for (entry, trip) in self.manifest.trips.iter().zip(&self.trips) {
            write_file(&dir.join(&entry.file), &trip_to_csv(trip))?;
        }
        let mut json = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        json.push('\n');
        write_file(&dir.join(MANIFEST_FILE), json.as_bytes())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let manifest: Manifest = serde_json::from_str(&read_to_string(&path)?)
            .map_err(|e| CliError::format(&path, e.to_string()))?;
        if manifest.schema_version != SCHEMA_VERSION {
            return Err(CliError::format(
                &path,
                format!(
                    "schema version {} (expected {SCHEMA_VERSION})",
                    manifest.schema_version
                ),
            ));
        }
        let trips = manifest
            .trips
            .iter()
            .map(|entry| {
                let file = dir.join(&entry.file);
                let trip = parse_trip_csv(&read_to_string(&file)?, &file, entry, &manifest)?;
                trip.validate()
                    .map_err(|e| CliError::format(&file, e.to_string()))?;
                Ok(trip)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { manifest, trips })
    }
}

/// Rows ordered by time, then vehicle id (the SV first).
pub fn trip_to_csv(trip: &Trip) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(TRIP_HEADER).expect("in-memory write");
    let tracks: Vec<&VehicleTrack> = std::iter::once(&trip.sv).chain(&trip.bvs).collect();
    let steps = tracks.iter().map(|t| t.len()).max().unwrap_or(0);
    for t in 0..steps {
        for track in &tracks {
            if let Some(s) = track.states.get(t) {
                w.write_record([
                    t.to_string(),
                    track.id.to_string(),
                    u8::from(track.is_sv).to_string(),
                    format_decimal(s.p),
                    format_decimal(s.q),
                    format_decimal(s.v),
                    format_decimal(s.phi),
                ])
                .expect("in-memory write");
            }
        }
    }
    finish_csv(w)
}

pub fn parse_trip_csv(
    text: &str,
    path: &Path,
    entry: &TripEntry,
    manifest: &Manifest,
) -> Result<Trip> {
    let mut r = csv_reader(text.as_bytes());
    check_header(&mut r, path, &TRIP_HEADER)?;
    // vehicle id -> (is_sv, states)
    let mut tracks: BTreeMap<u32, (bool, Vec<VehicleState>)> = BTreeMap::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
        let line = row + 2;
        let t: usize = parse_field(&rec, 0, path, line)?;
        let id: u32 = parse_field(&rec, 1, path, line)?;
        let is_sv = match &rec[2] {
            "0" => false,
            "1" => true,
            other => {
                return Err(CliError::format(
                    path,
                    format!("line {line}: is_sv `{other}` is not 0 or 1"),
                ))
            }
        };
        let num = |i: usize| parse_field::<f64>(&rec, i, path, line);
        let state = VehicleState::new(num(3)?, num(4)?, num(5)?, num(6)?);
        let track = tracks.entry(id).or_insert((is_sv, Vec::new()));
        if track.0 != is_sv {
            return Err(CliError::format(
                path,
                format!("line {line}: vehicle {id} changes is_sv"),
            ));
        }
        if t != track.1.len() {
            return Err(CliError::format(
                path,
                format!(
                    "line {line}: vehicle {id} time_idx {t}, expected {}",
                    track.1.len()
                ),
            ));
        }
        track.1.push(state);
    }
    let sv_ids: Vec<u32> = tracks
        .iter()
        .filter(|(_, t)| t.0)
        .map(|(id, _)| *id)
        .collect();
    if sv_ids.len() != 1 {
        return Err(CliError::format(
            path,
            format!(
                "expected exactly one subject vehicle, found {}",
                sv_ids.len()
            ),
        ));
    }
    let sv_id = sv_ids[0];
    let mut sv = None;
    let mut bvs = Vec::new();
    for (id, (is_sv, states)) in tracks {
        let track = VehicleTrack::new(id, is_sv, manifest.body, states);
        if id == sv_id {
            sv = Some(track);
        } else {
            bvs.push(track);
        }
    }
    Ok(Trip {
        trip_id: entry.trip_id.clone(),
        dt: manifest.dt,
        sv: sv.expect("one subject vehicle"),
        bvs,
        crash: entry.crash,
        crash_index: entry.crash_index,
        road: manifest.road,
    })
}
