//! The toy cryptography the election model runs on.
//!
//! `cargo run --example crypto_tour`

use pavcheck::crypto::{candidate_list, lagrange_exponent, shamir_shares, GroupParams};

fn main() -> Result<(), pavcheck::Error> {
    let g = GroupParams::default();
    let k = g.secret_key();
    println!(
        "group Z*_{} with alpha = {}, beta = {} (secret key {k})",
        g.p, g.alpha, g.beta
    );

    let c = g.encr(4, 5)?;
    println!("encr(4, 5) = ({}, {}), decrypts to {}", c.y1, c.y2, g.decr(c, k)?);
    let c2 = g.reencrypt(c, 2)?;
    println!("re-encrypted with 2: ({}, {}), still {}", c2.y1, c2.y2, g.decr(c2, k)?);

    // A ballot's onion encrypts alpha^seed; marking cell i adds i to the seed.
    let seed = 1;
    let onion = g.encr(g.zpow(g.alpha, seed)?, 3)?;
    let marked = g.absorb_index(onion, 2)?;
    println!(
        "seed {seed}, order {:?}; absorbing index 2 gives seed {}",
        candidate_list(seed as usize, 3),
        g.dlog(g.decr(marked, k)?)?
    );

    let shares = shamir_shares(k, 1, 3)?;
    println!("shares {:?}", shares.shares);
    for subset in [[1, 2], [1, 3], [2, 3]] {
        let mut c = g.encr(6, 4)?;
        for x in subset {
            c = g.partial_decrypt_step(c, lagrange_exponent(&shares, subset, x)?)?;
        }
        println!("tellers {subset:?} jointly decrypt to {}", c.y2);
    }
    Ok(())
}
