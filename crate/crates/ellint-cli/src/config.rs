//! Run configuration: identity names, dimension resolution, and the seed
//! list syntax.

use anyhow::{anyhow, bail, Result};

/// Every verifiable identity, in report sort order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Identity {
    Bh1,
    Bh2,
    Bh3,
    ClassicalContiguous,
    ClassicalEuler,
    DixonEval,
    DixonTransform,
    GammaLimit,
    LemmaSym,
    Main,
    SelbergEval,
    SelbergTransform,
}

pub const ALL_IDENTITIES: [Identity; 12] = [
    Identity::Bh1,
    Identity::Bh2,
    Identity::Bh3,
    Identity::ClassicalContiguous,
    Identity::ClassicalEuler,
    Identity::DixonEval,
    Identity::DixonTransform,
    Identity::GammaLimit,
    Identity::LemmaSym,
    Identity::Main,
    Identity::SelbergEval,
    Identity::SelbergTransform,
];

impl Identity {
    pub fn name(self) -> &'static str {
        match self {
            Identity::Bh1 => "bh1",
            Identity::Bh2 => "bh2",
            Identity::Bh3 => "bh3",
            Identity::ClassicalContiguous => "classical-contiguous",
            Identity::ClassicalEuler => "classical-euler",
            Identity::DixonEval => "dixon-eval",
            Identity::DixonTransform => "dixon-transform",
            Identity::GammaLimit => "gamma-limit",
            Identity::LemmaSym => "lemma-sym",
            Identity::Main => "main",
            Identity::SelbergEval => "selberg-eval",
            Identity::SelbergTransform => "selberg-transform",
        }
    }

    pub fn parse(s: &str) -> Result<Identity> {
        ALL_IDENTITIES
            .iter()
            .copied()
            .find(|i| i.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ALL_IDENTITIES.iter().map(|i| i.name()).collect();
                anyhow!("unknown identity '{s}'; expected one of: all, {}", names.join(", "))
            })
    }

    /// Smallest nontrivial dimensions, used by `--identity all` and as the
    /// fallback when no dimension flags are given.
    pub fn default_dims(self) -> (usize, usize, usize) {
        match self {
            Identity::Bh1 => (1, 1, 1),
            Identity::Bh2 => (1, 1, 2),
            Identity::Bh3 => (1, 1, 2),
            Identity::ClassicalContiguous => (1, 0, 0),
            Identity::ClassicalEuler => (1, 0, 0),
            Identity::DixonEval => (1, 0, 0),
            Identity::DixonTransform => (1, 1, 0),
            Identity::GammaLimit => (0, 0, 0),
            Identity::LemmaSym => (2, 0, 0),
            Identity::Main => (1, 1, 0),
            Identity::SelbergEval => (1, 0, 0),
            Identity::SelbergTransform => (1, 0, 0),
        }
    }

    /// Default verification tolerance. The limit probe measures an `O(p)`
    /// gap rather than a quadrature residual, so its scale is coarser.
    pub fn default_tol(self) -> f64 {
        match self {
            Identity::GammaLimit => 0.05,
            _ => 1e-8,
        }
    }

    /// Fills unspecified dimensions from the defaults and rejects
    /// combinations the identity cannot take.
    pub fn resolve_dims(
        self,
        n: Option<usize>,
        m: Option<usize>,
        k: Option<usize>,
    ) -> Result<(usize, usize, usize)> {
        let d = self.default_dims();
        let n = n.unwrap_or(d.0);
        let m = m.unwrap_or(d.1);
        let k = match self {
            // The split parameter groups pair off, which pins k.
            Identity::Bh2 => {
                let want = n + m;
                if let Some(k) = k {
                    if k != want {
                        bail!("bh2 requires k = n + m = {want}, got k = {k}");
                    }
                }
                want
            }
            Identity::Bh1 | Identity::Bh3 => {
                let k = k.unwrap_or_else(|| d.2.min(n + m));
                if k > n + m {
                    bail!("{} requires k <= n + m = {}, got k = {k}", self.name(), n + m);
                }
                k
            }
            _ => 0,
        };
        if self == Identity::DixonEval && m != 0 {
            bail!("dixon-eval is the m = 0 evaluation; got m = {m} (use dixon-transform)");
        }
        if self == Identity::ClassicalContiguous && n == 0 {
            bail!("classical-contiguous requires n >= 1");
        }
        Ok((n, m, k))
    }
}

/// Expands a seed list: comma-separated entries, each either a single
/// integer or an inclusive range `a..b`. The result is sorted and deduped.
pub fn parse_seeds(list: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for token in list.split(',') {
        let token = token.trim();
        if token.is_empty() {
            bail!("empty entry in seed list '{list}'");
        }
        if let Some((a, b)) = token.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| anyhow!("bad range start '{a}'"))?;
            let b: u64 = b.trim().parse().map_err(|_| anyhow!("bad range end '{b}'"))?;
            if a > b {
                bail!("range '{token}' is empty (start beyond end)");
            }
            seeds.extend(a..=b);
        } else {
            seeds.push(token.parse().map_err(|_| anyhow!("bad seed '{token}'"))?);
        }
    }
    seeds.sort_unstable();
    seeds.dedup();
    if seeds.is_empty() {
        bail!("seed list '{list}' expands to nothing");
    }
    Ok(seeds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Explicit `--format` wins; otherwise the output extension decides, with
/// JSON as the fallback.
pub fn resolve_format(flag: Option<&str>, output: &std::path::Path) -> Result<Format> {
    match flag {
        Some("json") => Ok(Format::Json),
        Some("csv") => Ok(Format::Csv),
        Some(other) => bail!("unknown format '{other}'; expected json or csv"),
        None => match output.extension().and_then(|e| e.to_str()) {
            Some("csv") => Ok(Format::Csv),
            _ => Ok(Format::Json),
        },
    }
}

/// Numeric validation shared by both subcommands.
pub fn validate_numerics(
    tol: Option<f64>,
    target_rel: Option<f64>,
    grid_start: Option<usize>,
) -> Result<()> {
    if let Some(tol) = tol {
        if !(tol > 0.0) {
            bail!("tol must be positive, got {tol}");
        }
    }
    if let Some(tr) = target_rel {
        if !(tr > 0.0) {
            bail!("target-rel must be positive, got {tr}");
        }
    }
    if let Some(gs) = grid_start {
        if gs < 4 {
            bail!("grid-start must be at least 4, got {gs}");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_syntax_expands_ranges_and_lists() {
        assert_eq!(parse_seeds("3").unwrap(), vec![3]);
        assert_eq!(parse_seeds("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_seeds("5,1..3,2").unwrap(), vec![1, 2, 3, 5]);
        assert!(parse_seeds("4..1").is_err());
        assert!(parse_seeds("a..b").is_err());
        assert!(parse_seeds("").is_err());
    }

    #[test]
    fn dimension_resolution_enforces_identity_shapes() {
        assert_eq!(Identity::Bh2.resolve_dims(Some(2), Some(1), None).unwrap(), (2, 1, 3));
        assert!(Identity::Bh2.resolve_dims(Some(1), Some(1), Some(1)).is_err());
        assert!(Identity::Bh3.resolve_dims(Some(1), Some(1), Some(3)).is_err());
        assert!(Identity::DixonEval.resolve_dims(Some(1), Some(1), None).is_err());
        assert_eq!(Identity::Main.resolve_dims(None, None, None).unwrap(), (1, 1, 0));
    }
}
