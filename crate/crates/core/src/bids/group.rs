//! Exclusive bid groups and their `bid_id,price_eur,q_h01..` CSV form.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{invalid, BidError, PROFILE_TOL};
use crate::agents::PowerProfile;

/// A block bid: a power profile and the price (EUR) offered for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackageBid {
    pub profile: PowerProfile,
    pub price: f64,
}

impl PackageBid {
    /// Surplus the bid reports at `prices`: `price - <prices, profile>`.
    pub fn surplus(&self, prices: &[f64]) -> f64 {
        self.price - self.profile.cost(prices)
    }
}

/// At most `limit` mutually exclusive bids with distinct profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusiveGroup {
    bids: Vec<PackageBid>,
    limit: usize,
}

impl ExclusiveGroup {
    pub fn new(bids: Vec<PackageBid>, limit: usize) -> Result<Self, BidError> {
        if bids.len() > limit {
            return Err(BidError::TooManyCandidates { count: bids.len(), limit });
        }
        if let Some(first) = bids.first() {
            let periods = first.profile.len();
            for (b, bid) in bids.iter().enumerate() {
                if bid.profile.len() != periods {
                    return Err(invalid(format!("bid {b} has {} periods, expected {periods}", bid.profile.len())));
                }
                if !bid.price.is_finite() {
                    return Err(invalid(format!("bid {b} has a non-finite price")));
                }
                if bids[..b].iter().any(|o| o.profile.approx_eq(&bid.profile, PROFILE_TOL)) {
                    return Err(invalid(format!("bid {b} repeats an earlier profile")));
                }
            }
        }
        Ok(Self { bids, limit })
    }

    pub fn bids(&self) -> &[PackageBid] {
        &self.bids
    }

    pub fn len(&self) -> usize {
        self.bids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty()
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// Periods per bid, if the group is not empty.
    pub fn periods(&self) -> Option<usize> {
        self.bids.first().map(|b| b.profile.len())
    }

    /// Writes one row per bid. Bid ids are 1-based.
    pub fn write_csv<W: Write>(&self, writer: W, periods: usize) -> Result<(), BidError> {
        if let Some(p) = self.periods() {
            if p != periods {
                return Err(invalid(format!("group has {p} periods, asked to write {periods}")));
            }
        }
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["bid_id".to_string(), "price_eur".to_string()];
        header.extend((1..=periods).map(|h| format!("q_h{h:02}")));
        wtr.write_record(&header)?;
        for (b, bid) in self.bids.iter().enumerate() {
            let mut rec = vec![(b + 1).to_string(), format!("{}", bid.price)];
            rec.extend(bid.profile.iter().map(|q| format!("{q}")));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads a group file; the limit is taken as `limit` or, if `None`, the bid count.
    pub fn read_csv<R: Read>(reader: R, limit: Option<usize>) -> Result<(Self, usize), BidError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 3 || &headers[0] != "bid_id" || &headers[1] != "price_eur" {
            return Err(invalid("group file needs columns bid_id, price_eur, q_h01, ..."));
        }
        let periods = headers.len() - 2;
        for (h, name) in headers.iter().skip(2).enumerate() {
            if name != format!("q_h{:02}", h + 1) {
                return Err(invalid(format!("unexpected column '{name}'")));
            }
        }
        let mut bids = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |v: &str| v.parse::<f64>().map_err(|e| invalid(format!("row {}: bad number '{v}': {e}", line + 2)));
            let id: usize = rec[0].parse().map_err(|e| invalid(format!("row {}: bad bid id: {e}", line + 2)))?;
            if id != bids.len() + 1 {
                return Err(invalid(format!("row {}: bid ids must run 1, 2, ...", line + 2)));
            }
            let price = parse(&rec[1])?;
            let profile = rec.iter().skip(2).map(parse).collect::<Result<Vec<f64>, _>>()?;
            let profile = PowerProfile::new(profile).map_err(|e| invalid(e.to_string()))?;
            bids.push(PackageBid { profile, price });
        }
        let limit = limit.unwrap_or(bids.len());
        Ok((Self::new(bids, limit)?, periods))
    }

    pub fn save(&self, path: impl AsRef<Path>, periods: usize) -> Result<(), BidError> {
        self.write_csv(std::fs::File::create(path)?, periods)
    }

    pub fn load(path: impl AsRef<Path>, limit: Option<usize>) -> Result<(Self, usize), BidError> {
        Self::read_csv(std::fs::File::open(path)?, limit)
    }
}
