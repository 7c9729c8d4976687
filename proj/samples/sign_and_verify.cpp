// Minimal end-to-end use of the library: key setup, signing with a ledger,
// verification, and what the ledger buys against factor reuse.

#include "conjsig/conjsig.hpp"

#include <iostream>

int main() {
  using namespace conjsig;

  Profile profile = make_profile("toy");
  Drbg rng = Drbg::from_u64(2024);
  auto [pk, sk] = setup(profile, rng);
  auto ledger = FactorLedger::in_memory();

  Bytes message = to_bytes("hello, polycyclic world");
  Signature sig = sign(sk, pk, message, ledger, rng);
  std::cout << "key " << to_hex(pk.key_id) << "\n";
  std::cout << "y     = " << sig.y << "\nalpha = " << sig.alpha << "\nn_j   = " << sig.n_j << "\n";
  std::cout << "verify: " << to_string(verify(pk, message, sig, ledger).verdict) << "\n";

  // Anyone holding the signature can recover an n_j-th root of x and reuse it.
  GroupElement root = extract_root(pk, message, sig);
  ForgeryResult forged = forge_with_reused_factor(pk, root, sig.n_j, to_bytes("not from the key holder"), ledger, rng);
  std::cout << "forgery without ledger: " << to_string(forged.raw_verify.verdict) << "\n";
  std::cout << "forgery with ledger:    " << to_string(forged.ledgered_verify.verdict) << "\n";
}
