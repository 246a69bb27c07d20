//! Stochastic unravelling of the thermal rate equation.
//!
//! Both the state and every jump operator are diagonal in the Fock basis, so
//! a quantum-jump trajectory is a birth-death process on the occupation `n`
//! with emission rate `F_e n` and absorption rate `F_a (n + 1)`. The initial
//! occupation is drawn from the thermal distribution, which makes the jump
//! record stationary from the first event.

use std::io::{self, BufRead, Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use super::JumpType;
use crate::dissipation::RatePair;
use crate::error::{Error, Result};
use crate::parallel::Execution;

const MAGIC: &[u8; 4] = b"LMGJ";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub jump: JumpType,
}

/// One sampled trajectory: strictly increasing jump times and enough
/// metadata to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpRecord {
    pub events: Vec<JumpEvent>,
    pub seed: u64,
    pub stream: u64,
    pub initial_occupation: u64,
    /// Time of the last event (zero for an empty record).
    pub total_time: f64,
}

impl JumpRecord {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn count(&self, jump: JumpType) -> usize {
        self.events.iter().filter(|e| e.jump == jump).count()
    }

    /// Occupation just after each event.
    pub fn occupations(&self) -> Vec<u64> {
        let mut n = self.initial_occupation;
        self.events
            .iter()
            .map(|e| {
                n = match e.jump {
                    JumpType::Emission => n - 1,
                    JumpType::Absorption => n + 1,
                };
                n
            })
            .collect()
    }

    /// Time average of the occupation over `[0, total_time]`.
    pub fn mean_occupation(&self) -> Option<f64> {
        if !(self.total_time > 0.0) {
            return None;
        }
        let mut n = self.initial_occupation as f64;
        let mut last = 0.0;
        let mut area = 0.0;
        for e in &self.events {
            area += n * (e.time - last);
            last = e.time;
            n += match e.jump {
                JumpType::Emission => -1.0,
                JumpType::Absorption => 1.0,
            };
        }
        Some(area / self.total_time)
    }

    /// CSV with `# key = value` metadata lines and a `time,type` table.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# seed = {}", self.seed)?;
        writeln!(out, "# stream = {}", self.stream)?;
        writeln!(out, "# initial_occupation = {}", self.initial_occupation)?;
        writeln!(out, "# total_time = {}", self.total_time)?;
        writeln!(out, "time,type")?;
        for e in &self.events {
            writeln!(out, "{},{}", e.time, e.jump.code())?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut record = JumpRecord {
            events: Vec::new(),
            seed: 0,
            stream: 0,
            initial_occupation: 0,
            total_time: 0.0,
        };
        let mut saw_header = false;
        for (idx, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::invalid("jump record", e.to_string()))?;
            let lineno = idx + 1;
            let bad = |what: &str| Error::invalid("jump record", format!("line {lineno}: {what}"));
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let Some((key, value)) = meta.split_once('=') else {
                    continue;
                };
                let value = value.trim();
                match key.trim() {
                    "seed" => record.seed = value.parse().map_err(|_| bad("bad seed"))?,
                    "stream" => record.stream = value.parse().map_err(|_| bad("bad stream"))?,
                    "initial_occupation" => {
                        record.initial_occupation =
                            value.parse().map_err(|_| bad("bad initial_occupation"))?
                    }
                    "total_time" => {
                        record.total_time = value.parse().map_err(|_| bad("bad total_time"))?
                    }
                    _ => {}
                }
                continue;
            }
            if !saw_header {
                if line != "time,type" {
                    return Err(bad("expected header `time,type`"));
                }
                saw_header = true;
                continue;
            }
            let (time, kind) = line.split_once(',').ok_or_else(|| bad("expected `time,type`"))?;
            let time: f64 = time.trim().parse().map_err(|_| bad("bad time"))?;
            let jump: JumpType = kind.trim().parse().map_err(|_| bad("bad jump type"))?;
            if let Some(prev) = record.events.last() {
                if !(time > prev.time) {
                    return Err(bad("jump times must be strictly increasing"));
                }
            }
            record.events.push(JumpEvent { time, jump });
        }
        Ok(record)
    }

    /// Little-endian binary layout: magic `LMGJ`, u32 version, u64 seed,
    /// stream, initial occupation and event count, f64 total time, then per
    /// event an f64 time and a u8 type (0 emission, 1 absorption).
    pub fn write_binary<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&FORMAT_VERSION.to_le_bytes())?;
        out.write_all(&self.seed.to_le_bytes())?;
        out.write_all(&self.stream.to_le_bytes())?;
        out.write_all(&self.initial_occupation.to_le_bytes())?;
        out.write_all(&(self.events.len() as u64).to_le_bytes())?;
        out.write_all(&self.total_time.to_le_bytes())?;
        for e in &self.events {
            out.write_all(&e.time.to_le_bytes())?;
            out.write_all(&[match e.jump {
                JumpType::Emission => 0u8,
                JumpType::Absorption => 1u8,
            }])?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let io_err = |e: io::Error| Error::invalid("jump record", e.to_string());
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic).map_err(io_err)?;
        if &magic != MAGIC {
            return Err(Error::invalid("jump record", "not a binary jump record"));
        }
        let mut b4 = [0u8; 4];
        input.read_exact(&mut b4).map_err(io_err)?;
        let version = u32::from_le_bytes(b4);
        if version != FORMAT_VERSION {
            return Err(Error::invalid("jump record", format!("unsupported version {version}")));
        }
        let mut b8 = [0u8; 8];
        let mut next_u64 = |input: &mut R| -> Result<u64> {
            input.read_exact(&mut b8).map_err(io_err)?;
            Ok(u64::from_le_bytes(b8))
        };
        let seed = next_u64(&mut input)?;
        let stream = next_u64(&mut input)?;
        let initial_occupation = next_u64(&mut input)?;
        let count = next_u64(&mut input)?;
        let total_time = f64::from_bits(next_u64(&mut input)?);
        let mut events = Vec::with_capacity(count.min(1 << 24) as usize);
        let mut b9 = [0u8; 9];
        for _ in 0..count {
            input.read_exact(&mut b9).map_err(io_err)?;
            let time = f64::from_le_bytes(b9[..8].try_into().unwrap());
            let jump = match b9[8] {
                0 => JumpType::Emission,
                1 => JumpType::Absorption,
                other => {
                    return Err(Error::invalid("jump record", format!("bad jump code {other}")))
                }
            };
            events.push(JumpEvent { time, jump });
        }
        Ok(Self {
            events,
            seed,
            stream,
            initial_occupation,
            total_time,
        })
    }
}

fn check_rates(rates: &RatePair) -> Result<()> {
    if !(rates.f_absorb > 0.0) || !(rates.f_emit > rates.f_absorb) {
        return Err(Error::invalid(
            "rates",
            format!(
                "sampling needs 0 < F_a < F_e, got F_e = {}, F_a = {}",
                rates.f_emit, rates.f_absorb
            ),
        ));
    }
    Ok(())
}

/// Samples `n_jumps` events on stream `stream` of the generator seeded by
/// `seed`.
pub fn sample_trajectory_stream(
    rates: &RatePair,
    n_jumps: usize,
    seed: u64,
    stream: u64,
) -> Result<JumpRecord> {
    check_rates(rates)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);

    // P(n) = (1 - r) r^n with r = F_a / F_e, i.e. failures before the first
    // success at success probability 1 - r.
    let r = rates.f_absorb / rates.f_emit;
    let geometric = Geometric::new(1.0 - r)
        .map_err(|e| Error::invalid("rates", format!("occupation distribution: {e}")))?;
    let initial_occupation = geometric.sample(&mut rng);

    let mut n = initial_occupation;
    let mut t = 0.0f64;
    let mut events = Vec::with_capacity(n_jumps);
    while events.len() < n_jumps {
        let emit = rates.f_emit * n as f64;
        let absorb = rates.f_absorb * (n + 1) as f64;
        let total = emit + absorb;
        // 1 - u lies in (0, 1], so the step is finite; a step too small to
        // advance the clock is redrawn to keep times strictly increasing.
        let u: f64 = rng.random();
        let next = t + -(1.0 - u).ln() / total;
        let pick: f64 = rng.random();
        if next <= t {
            continue;
        }
        t = next;
        let jump = if pick * total < emit {
            n -= 1;
            JumpType::Emission
        } else {
            n += 1;
            JumpType::Absorption
        };
        events.push(JumpEvent { time: t, jump });
    }
    Ok(JumpRecord {
        events,
        seed,
        stream,
        initial_occupation,
        total_time: t,
    })
}

/// Single trajectory on stream 0.
pub fn sample_trajectory(rates: &RatePair, n_jumps: usize, seed: u64) -> Result<JumpRecord> {
    sample_trajectory_stream(rates, n_jumps, seed, 0)
}

/// Independent chains, chain `i` on stream `i` of the same seed. The result
/// does not depend on `execution`.
pub fn sample_trajectories(
    rates: &RatePair,
    n_chains: usize,
    jumps_per_chain: usize,
    seed: u64,
    execution: Execution,
) -> Result<Vec<JumpRecord>> {
    check_rates(rates)?;
    execution
        .map_indices(n_chains, |i| {
            sample_trajectory_stream(rates, jumps_per_chain, seed, i as u64)
        })
        .into_iter()
        .collect()
}
