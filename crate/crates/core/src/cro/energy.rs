//! Energy bookkeeping of the four elementary reactions.
//!
//! Each function decides acceptance and returns the resulting kinetic
//! energies and buffer movements. Acceptance is non-strict: a reaction whose
//! available energy exactly covers the new potential energy goes ahead.

/// Result of an accepted on-wall collision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnWall {
    pub ke: f64,
    /// Energy handed to the central buffer.
    pub to_buffer: f64,
}

/// On-wall ineffective collision: a molecule with `pe`, `ke` moves to a
/// structure with potential `new_pe`. `retain` is the fraction of the surplus
/// kept as kinetic energy (drawn on `[ke_loss_rate, 1]`).
pub fn on_wall(pe: f64, ke: f64, new_pe: f64, retain: f64) -> Option<OnWall> {
    let surplus = pe + ke - new_pe;
    if surplus < 0.0 {
        return None;
    }
    let ke = surplus * retain;
    Some(OnWall {
        ke,
        to_buffer: surplus - ke,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub ke1: f64,
    pub ke2: f64,
    /// Buffer content after any borrowing.
    pub buffer: f64,
}

/// Decomposition of one molecule into children with potentials `pe1`, `pe2`.
///
/// `uniform` supplies draws on `[0, 1)`. When the molecule's own energy
/// falls short, two draws `δ1`, `δ2` set the share `δ1·δ2` of the buffer on
/// offer. On acceptance one more draw `k` splits the pooled surplus
/// `k : 1 - k` between the children.
pub fn decomposition(
    pe: f64,
    ke: f64,
    pe1: f64,
    pe2: f64,
    buffer: f64,
    mut uniform: impl FnMut() -> f64,
) -> Option<Decomposition> {
    let mut surplus = pe + ke - pe1 - pe2;
    let mut buffer_after = buffer;
    if surplus < 0.0 {
        let borrowed = buffer * uniform() * uniform();
        if surplus + borrowed < 0.0 {
            return None;
        }
        surplus += borrowed;
        buffer_after = buffer - borrowed;
    }
    let ke1 = surplus * uniform();
    Some(Decomposition {
        ke1,
        ke2: surplus - ke1,
        buffer: buffer_after,
    })
}

/// Inter-molecular ineffective collision; returns the two new kinetic
/// energies on acceptance.
#[allow(clippy::too_many_arguments)]
pub fn intermolecular(
    pe1: f64,
    ke1: f64,
    pe2: f64,
    ke2: f64,
    new_pe1: f64,
    new_pe2: f64,
    split: impl FnOnce() -> f64,
) -> Option<(f64, f64)> {
    let surplus = (pe1 + ke1 + pe2 + ke2) - (new_pe1 + new_pe2);
    if surplus < 0.0 {
        return None;
    }
    let k1 = surplus * split();
    Some((k1, surplus - k1))
}

/// Synthesis of two molecules into one with potential `new_pe`; returns its
/// kinetic energy on acceptance.
pub fn synthesis(pe1: f64, ke1: f64, pe2: f64, ke2: f64, new_pe: f64) -> Option<f64> {
    let surplus = (pe1 + ke1 + pe2 + ke2) - new_pe;
    (surplus >= 0.0).then_some(surplus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn on_wall_accepts_uphill_within_ke() {
        let r = on_wall(10.0, 5.0, 12.0, 0.8).unwrap();
        assert_relative_eq!(r.ke, 2.4, max_relative = 1e-12);
        assert_relative_eq!(r.to_buffer, 0.6, max_relative = 1e-12);
    }

    #[test]
    fn on_wall_rejects_beyond_ke() {
        assert_eq!(on_wall(10.0, 1.0, 12.0, 0.5), None);
    }

    #[test]
    fn on_wall_boundary_equality() {
        let r = on_wall(10.0, 0.0, 10.0, 1.0).unwrap();
        assert_eq!(
            r,
            OnWall {
                ke: 0.0,
                to_buffer: 0.0
            }
        );
    }

    fn draws(values: &[f64]) -> impl FnMut() -> f64 + '_ {
        let mut it = values.iter();
        move || *it.next().expect("unexpected draw")
    }

    #[test]
    fn decomposition_even_split() {
        // only the split ratio is drawn
        let r = decomposition(20.0, 10.0, 12.0, 8.0, 0.0, draws(&[0.5])).unwrap();
        assert_eq!(
            r,
            Decomposition {
                ke1: 5.0,
                ke2: 5.0,
                buffer: 0.0
            }
        );
    }

    #[test]
    fn decomposition_rejected_without_buffer() {
        assert_eq!(
            decomposition(20.0, 0.0, 15.0, 10.0, 0.0, draws(&[1.0, 1.0])),
            None
        );
    }

    #[test]
    fn decomposition_borrows_from_buffer() {
        let r = decomposition(20.0, 0.0, 15.0, 10.0, 100.0, draws(&[1.0, 1.0, 0.5])).unwrap();
        assert_eq!(r.buffer, 0.0);
        assert_eq!(r.ke1 + r.ke2, 95.0);
        // energy in == energy out
        assert_eq!(20.0 + 0.0 + 100.0, 15.0 + 10.0 + r.ke1 + r.ke2 + r.buffer);
    }

    #[test]
    fn decomposition_partial_borrow_still_short() {
        // e = -5 and only 100 * 0.04 = 4 on offer
        assert_eq!(
            decomposition(20.0, 0.0, 15.0, 10.0, 100.0, draws(&[0.2, 0.2])),
            None
        );
    }

    #[test]
    fn intermolecular_examples() {
        let (a, b) = intermolecular(10.0, 5.0, 10.0, 5.0, 10.0, 10.0, || 0.3).unwrap();
        assert_relative_eq!(a + b, 10.0, max_relative = 1e-15);
        assert_relative_eq!(a, 3.0, max_relative = 1e-15);
        assert_eq!(
            intermolecular(10.0, 0.0, 10.0, 0.0, 11.0, 10.0, || 0.5),
            None
        );
    }

    #[test]
    fn synthesis_examples() {
        assert_eq!(synthesis(10.0, 100.0, 12.0, 100.0, 50.0), Some(172.0));
        assert_eq!(synthesis(1.0, 0.0, 1.0, 0.0, 3.0), None);
    }
}
