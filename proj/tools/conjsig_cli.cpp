// conjsig: key generation, signing, verification, ledger audit and attack
// demonstrations from the command line.
//
// Exit codes: 0 success / accept, 1 reject (reason on stderr), 2 usage or I/O error.

#include "conjsig/conjsig.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

namespace {

using namespace conjsig;

constexpr int kExitOk = 0;
constexpr int kExitReject = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CliConfig {
  std::string profile = "toy";
  std::string ledger;
  std::string key;
  std::string pub;
  std::optional<std::uint64_t> seed;
  std::string format = "binary";
};

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, ByteView data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw UsageError("write failed: " + path);
}

// Artifacts are binary unless written with --format hex; reading accepts both.
Bytes read_artifact(const std::string& path) {
  Bytes raw = read_file(path);
  if (raw.size() >= 2 && raw[0] == kFileMagic[0] && raw[1] == kFileMagic[1]) return raw;
  try {
    return from_hex(std::string(raw.begin(), raw.end()));
  } catch (const std::invalid_argument&) {
    return raw;
  }
}

void write_artifact(const CliConfig& cfg, const std::string& path, ByteView data) {
  if (cfg.format == "hex") {
    std::string text = to_hex(data) + "\n";
    write_file(path, to_bytes(text));
  } else {
    write_file(path, data);
  }
}

Drbg make_rng(const CliConfig& cfg, std::string_view purpose) {
  Drbg root = cfg.seed ? Drbg::from_u64(*cfg.seed) : Drbg::from_os_entropy();
  return root.fork(purpose);
}

std::string ledger_path(const CliConfig& cfg) {
  if (!cfg.ledger.empty()) return cfg.ledger;
  if (const char* env = std::getenv("CONJSIG_LEDGER"); env && *env) return env;
  return {};
}

std::string require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required flag ") + flag);
  return value;
}

PublicKey load_public(const CliConfig& cfg) { return decode_public_key(read_artifact(require(cfg.pub, "--pub"))); }

int cmd_keygen(const CliConfig& cfg) {
  Profile profile = make_profile(cfg.profile);
  Drbg rng = make_rng(cfg, "keygen");
  auto [pk, sk] = setup(profile, rng);
  write_artifact(cfg, require(cfg.key, "--key"), encode_private_key(sk));
  write_artifact(cfg, require(cfg.pub, "--pub"), encode_public_key(pk));
  std::cout << "key_id " << to_hex(pk.key_id) << " profile " << profile.name << "\n";
  return kExitOk;
}

int cmd_sign(const CliConfig& cfg, const std::string& message_path, const std::string& out_path) {
  PrivateKey sk = decode_private_key(read_artifact(require(cfg.key, "--key")));
  PublicKey pk = load_public(cfg);
  const std::string lpath = ledger_path(cfg);
  if (lpath.empty()) throw UsageError("signing needs a ledger: pass --ledger or set CONJSIG_LEDGER");
  FactorLedger ledger = FactorLedger::load(lpath);
  Bytes message = read_file(message_path);
  Drbg rng = make_rng(cfg, "sign");
  Signature sig = sign(sk, pk, message, ledger, rng);
  const std::string target = out_path.empty() ? message_path + ".sig" : out_path;
  write_artifact(cfg, target, encode_signature(sig));
  std::cout << "signed with n_j " << sig.n_j.get_str() << " -> " << target << "\n";
  return kExitOk;
}

int cmd_verify(const CliConfig& cfg, const std::string& message_path, const std::string& sig_path) {
  PublicKey pk = load_public(cfg);
  Bytes message = read_file(message_path);
  Bytes sig_bytes = read_artifact(sig_path);
  std::optional<FactorLedger> ledger;
  if (auto lpath = ledger_path(cfg); !lpath.empty()) ledger.emplace(FactorLedger::load(lpath));
  VerifyResult result = verify_encoded(pk, message, sig_bytes, ledger ? &*ledger : nullptr);
  if (result.accepted()) {
    std::cout << "Accept\n";
    return kExitOk;
  }
  std::cerr << to_string(result.verdict);
  if (!result.detail.empty()) std::cerr << ": " << result.detail;
  std::cerr << "\n";
  return kExitReject;
}

int cmd_ledger(const CliConfig& cfg, const std::string& action) {
  const std::string lpath = ledger_path(cfg);
  if (lpath.empty()) throw UsageError("pass --ledger or set CONJSIG_LEDGER");
  if (action == "repair") {
    auto removed = FactorLedger::discard_torn_tail(lpath);
    std::cout << "discarded " << removed << " trailing bytes\n";
    return kExitOk;
  }
  FactorLedger ledger = FactorLedger::load(lpath);
  if (action == "export") {
    std::cout << export_text(ledger);
    return kExitOk;
  }
  // list
  std::cout << "# seq key_id n_j time fingerprint\n";
  for (const auto& e : ledger.all_entries())
    std::cout << e.sequence << ' ' << to_hex(e.key_id) << ' ' << e.n_j.get_str() << ' ' << iso8601_utc(e.timestamp) << ' '
              << (e.fingerprint.empty() ? "-" : to_hex(e.fingerprint)) << '\n';
  std::cout << "# " << ledger.size() << " entries\n";
  return kExitOk;
}

int cmd_attack(const CliConfig& cfg, const std::string& demo) {
  Profile profile = make_profile(cfg.profile);
  Drbg rng = make_rng(cfg, "attack");
  std::vector<ReportLine> lines;
  if (demo == "root") lines = demo_root(profile, rng);
  else if (demo == "forge") lines = demo_forge(profile, rng);
  else if (demo == "tamper") lines = demo_tamper(profile, rng);
  else lines = demo_csp(profile, rng);
  std::cout << format_report(lines);
  for (const auto& l : lines)
    if (!l.pass) return kExitReject;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conjsig: conjugacy-based signatures over Z^n x|_A Z"};
  app.require_subcommand(1);
  app.fallthrough();

  CliConfig cfg;
  app.add_option("--profile", cfg.profile, "Parameter profile")->check(CLI::IsMember({"toy", "desk", "demo"}));
  app.add_option("--ledger", cfg.ledger, "Factor ledger file (default: $CONJSIG_LEDGER)");
  app.add_option("--key", cfg.key, "Private key file");
  app.add_option("--pub", cfg.pub, "Public key file");
  app.add_option("--seed", cfg.seed, "Seed for fully deterministic output");
  app.add_option("--format", cfg.format, "Output encoding for written artifacts")->check(CLI::IsMember({"binary", "hex"}));

  auto* keygen = app.add_subcommand("keygen", "Generate a key pair (writes --key and --pub)");

  std::string message_path, sig_path, out_path;
  auto* sign_cmd = app.add_subcommand("sign", "Sign a message file; records n_j in the ledger");
  sign_cmd->add_option("message", message_path, "Message file")->required();
  sign_cmd->add_option("-o,--out", out_path, "Signature output (default: <message>.sig)");

  auto* verify_cmd = app.add_subcommand("verify", "Verify a signature; uses the ledger when one is configured");
  verify_cmd->add_option("message", message_path, "Message file")->required();
  verify_cmd->add_option("signature", sig_path, "Signature file")->required();

  std::string ledger_action = "list";
  auto* ledger_cmd = app.add_subcommand("ledger", "Audit the factor ledger");
  ledger_cmd->add_option("action", ledger_action, "list | export | repair")->check(CLI::IsMember({"list", "export", "repair"}));

  std::string demo;
  auto* attack_cmd = app.add_subcommand("attack", "Run an attack demonstration and print a report");
  attack_cmd->add_option("demo", demo, "root | forge | tamper | csp")->required()->check(CLI::IsMember({"root", "forge", "tamper", "csp"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*keygen) return cmd_keygen(cfg);
    if (*sign_cmd) return cmd_sign(cfg, message_path, out_path);
    if (*verify_cmd) return cmd_verify(cfg, message_path, sig_path);
    if (*ledger_cmd) return cmd_ledger(cfg, ledger_action);
    if (*attack_cmd) return cmd_attack(cfg, demo);
  } catch (const FactorizationsExhausted& e) {
    std::cerr << "FactorizationsExhausted: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DecodeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
