// braidauth command-line front end.
//
// Exit codes: 0 accepted / ok, 1 rejected or failed check, 2 usage,
// 3 file I/O, 4 network or protocol failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "braidauth/braid.hpp"
#include "braidauth/keyfile.hpp"
#include "braidauth/oracle.hpp"
#include "braidauth/protocol.hpp"
#include "braidauth/selftest.hpp"
#include "braidauth/wire.hpp"

namespace {

using namespace braidauth;

enum Exit { kOk = 0, kRejected = 1, kUsage = 2, kIo = 3, kNetwork = 4 };

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Params {
  int scheme = 1;
  int n = 16;
  int left = -1;
  int right = -1;
  int len = 128;
  std::optional<int> minlen;
  int rounds = 1;
  std::uint64_t seed = 0;
};

// BRAIDAUTH_SEED wins over --seed.
std::uint64_t effective_seed(std::uint64_t flag) {
  const char* env = std::getenv("BRAIDAUTH_SEED");
  if (env == nullptr || *env == '\0') return flag;
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(env, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || env[used] != '\0') throw InvalidParameter("BRAIDAUTH_SEED is not an integer");
  return v;
}

SessionConfig session_config(const Params& p) {
  SessionConfig cfg;
  cfg.scheme = p.scheme;
  cfg.rounds = p.rounds;
  cfg.sampler.n = p.n;
  cfg.sampler.word_length = p.len;
  cfg.sampler.min_canonical_length = p.minlen.value_or(std::min(8, p.len));
  cfg.sampler.seed = effective_seed(p.seed);
  cfg.left_exponent = p.left >= 0 ? p.left : 2;
  cfg.right_exponent = p.right >= 0 ? p.right : 3;
  cfg.validate();
  return cfg;
}

void add_sampler_flags(CLI::App* cmd, Params& p, bool with_rounds) {
  cmd->add_option("--scheme", p.scheme, "identification scheme (1 or 2)")->capture_default_str();
  cmd->add_option("--n", p.n, "strand count (even, >= 4)")->capture_default_str();
  cmd->add_option("--r,--e", p.left, "left exponent: r for scheme 1, e for scheme 2 (default 2)");
  cmd->add_option("--s,--f", p.right, "right exponent: s for scheme 1, f for scheme 2 (default 3)");
  cmd->add_option("--len", p.len, "sampled word length L")->capture_default_str();
  cmd->add_option("--minlen", p.minlen, "minimum canonical length of key braids (default min(8, L))");
  if (with_rounds) cmd->add_option("--rounds,-k", p.rounds, "challenge-response rounds")->capture_default_str();
  cmd->add_option("--seed", p.seed, "seed (BRAIDAUTH_SEED overrides)")->capture_default_str();
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path);
  return in;
}

PublicKey load_public(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_public_key(in);
  } catch (const std::exception& e) {
    throw IoFailure(path + ": " + e.what());
  }
}

KeyPair load_pair(const std::string& pub_path, const std::string& secret_path) {
  const PublicKey pub = load_public(pub_path);
  auto in = open_in(secret_path);
  try {
    return read_key_pair(pub, in);
  } catch (const std::exception& e) {
    throw IoFailure(secret_path + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) throw IoFailure("cannot write " + path);
}

int cmd_keygen(const Params& p, const std::string& pub_path, const std::string& secret_path) {
  const SessionConfig cfg = session_config(p);
  std::cout << to_string(cfg.sampler) << "\n";
  CoinStream rng(cfg.sampler.seed, "keygen");
  const KeyPair keys = cfg.scheme == 1 ? KeyPair{keygen1(cfg, rng)} : KeyPair{keygen2(cfg, rng)};
  std::ostringstream pub, secret;
  write_public_key(pub, std::visit([](const auto& k) -> PublicKey { return k.pub; }, keys));
  write_secret_key(secret, keys);
  write_file(pub_path, pub.str());
  write_file(secret_path, secret.str());
  std::cout << "wrote " << pub_path << " and " << secret_path << "\n";
  return kOk;
}

int cmd_run_local(const Params& p) {
  const SessionConfig cfg = session_config(p);
  std::cout << to_string(cfg.sampler) << "\n";
  CoinStream keys_rng(cfg.sampler.seed, "keygen");
  CoinStream verifier(cfg.sampler.seed, "verifier");
  const Transcript t = cfg.scheme == 1
                           ? run_honest_session<SchemeI>(keygen1(cfg, keys_rng), cfg.sampler, cfg.rounds, verifier)
                           : run_honest_session<SchemeII>(keygen2(cfg, keys_rng), cfg.sampler, cfg.rounds, verifier);
  std::cout << format_transcript(t) << (t.accepted ? "ACCEPTED" : "REJECTED") << "\n";
  return t.accepted ? kOk : kRejected;
}

int cmd_prove(const std::string& pub_path, const std::string& secret_path, const std::string& host, int port,
              int timeout) {
  const KeyPair keys = load_pair(pub_path, secret_path);
  const wire::ProveOutcome out = wire::prove(host, port, keys, timeout);
  switch (out.status) {
    case wire::ProveStatus::accepted:
      std::cout << "ACCEPTED after " << out.rounds << " round(s)\n";
      return kOk;
    case wire::ProveStatus::rejected:
      std::cout << "REJECTED: " << out.message << "\n";
      return kRejected;
    case wire::ProveStatus::protocol_error:
      break;
  }
  std::cerr << "error: " << out.message << "\n";
  return kNetwork;
}

struct ServeFlags {
  std::string host = "127.0.0.1";
  int port = 0;
  std::string pub_path;
  std::uint64_t max_sessions = 0;
  int timeout = 30;
};

int cmd_verify_serve(const Params& p, const ServeFlags& f) {
  wire::VerifierConfig cfg;
  cfg.scheme = p.scheme;
  cfg.rounds = p.rounds;
  if (cfg.rounds < 1) throw InvalidParameter("rounds must be >= 1");
  if (p.len < 0) throw InvalidParameter("word length must be non-negative");
  cfg.seed = effective_seed(p.seed);
  cfg.sampler = SamplerConfig{16, p.len, std::max(1, std::min(8, p.len)), cfg.seed};
  cfg.io_timeout_seconds = f.timeout;
  if (!f.pub_path.empty()) {
    cfg.pinned_key = load_public(f.pub_path);
    cfg.scheme = scheme_of(*cfg.pinned_key);
  }
  if (cfg.scheme != 1 && cfg.scheme != 2) throw InvalidParameter("scheme must be 1 or 2");

  std::mutex out_mu;
  cfg.on_session = [&](std::uint64_t id, const wire::SessionOutcome& o) {
    std::lock_guard lock(out_mu);
    std::cout << "session " << id << ": ";
    if (o.error) {
      std::cout << "error (" << wire::to_string(*o.error) << ")";
    } else if (o.transcript.aborted_at) {
      std::cout << "aborted in round " << *o.transcript.aborted_at;
    } else {
      std::cout << (o.transcript.accepted ? "ACCEPTED" : "REJECTED") << " after " << o.transcript.rounds.size()
                << " round(s)";
    }
    std::cout << std::endl;
  };

  wire::VerifierServer server(cfg, f.host, f.port);
  std::cout << "scheme=" << cfg.scheme << " rounds=" << cfg.rounds << " L=" << p.len << " seed=" << cfg.seed << "\n"
            << "listening on " << f.host << ":" << server.port() << std::endl;
  server.run(f.max_sessions);
  if (server.sessions_errored() > 0) return kNetwork;
  return server.sessions_rejected() > 0 ? kRejected : kOk;
}

struct AttackFlags {
  std::string strategy = "random";
  std::uint64_t trials = 100;
  int bound = 8;
  std::uint64_t budget = 20'000'000;
  std::string format = "table";
};

int cmd_attack(Params p, const AttackFlags& f) {
  const auto strategy = parse_strategy(f.strategy);
  if (!strategy) throw InvalidParameter("unknown strategy " + f.strategy + " (random, replay or root)");
  if (f.bound < 0) throw InvalidParameter("--bound must be non-negative");
  const SessionConfig cfg = session_config(p);
  std::cout << to_string(cfg.sampler) << "\n";
  CoinStream rng(cfg.sampler.seed, "attack");
  const AttackReport report = impersonation_experiment(cfg, *strategy, f.trials, rng, f.bound, f.budget);
  std::cout << (f.format == "kv" ? format_report_kv(report) : format_report_table(report));
  return kOk;
}

int cmd_selftest(std::vector<int> sizes, std::uint64_t seed, int samples) {
  selftest::Options opt;
  opt.sizes = std::move(sizes);
  opt.seed = effective_seed(seed);
  opt.samples = samples;
#ifdef BRAIDAUTH_SELFTEST_MUTANT
  // Deliberately broken normalizer: reads every letter as positive.
  opt.normalizer = [](const BraidWord& w) {
    BraidWord positive(w.strands());
    for (const auto& l : w.letters()) positive.push_back({l.index, 1});
    return normalize(positive);
  };
#endif
  const auto results = selftest::run(opt, &std::cout);
  for (const auto& r : results) {
    if (!r.passed) {
      std::cerr << "selftest failed: " << r.name << "\n";
      return kRejected;
    }
  }
  std::cout << results.size() << " checks passed\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Braid-group root-problem identification schemes"};
  app.require_subcommand(1);

  Params params;
  std::string pub_path = "key.pub", secret_path = "key.sec";

  auto* keygen = app.add_subcommand("keygen", "generate a key pair");
  add_sampler_flags(keygen, params, false);
  keygen->add_option("--pub", pub_path, "public key output")->capture_default_str();
  keygen->add_option("--secret", secret_path, "secret key output")->capture_default_str();

  auto* run_local = app.add_subcommand("run-local", "run an honest session in process and print the transcript");
  add_sampler_flags(run_local, params, true);

  std::string host = "127.0.0.1";
  int port = 0;
  int timeout = 30;
  auto* prove = app.add_subcommand("prove", "authenticate to a verifier over TCP");
  prove->add_option("--pub", pub_path, "public key file")->required();
  prove->add_option("--secret", secret_path, "secret key file")->required();
  prove->add_option("--host", host)->capture_default_str();
  prove->add_option("--port", port)->required();
  prove->add_option("--timeout", timeout, "socket timeout in seconds")->capture_default_str();

  ServeFlags serve;
  auto* verify = app.add_subcommand("verify-serve", "run a verifier that listens for provers");
  verify->add_option("--scheme", params.scheme)->capture_default_str();
  verify->add_option("--rounds,-k", params.rounds)->capture_default_str();
  verify->add_option("--len", params.len, "challenge word length")->capture_default_str();
  verify->add_option("--seed", params.seed)->capture_default_str();
  verify->add_option("--host", serve.host)->capture_default_str();
  verify->add_option("--port", serve.port, "0 picks a free port")->capture_default_str();
  verify->add_option("--pub", serve.pub_path, "only accept this public key");
  verify->add_option("--max-sessions", serve.max_sessions, "exit after this many sessions (0 = never)")
      ->capture_default_str();
  verify->add_option("--timeout", serve.timeout, "socket timeout in seconds")->capture_default_str();

  AttackFlags attack_flags;
  auto* attack = app.add_subcommand("attack", "run impersonation experiments");
  add_sampler_flags(attack, params, true);
  attack->add_option("--strategy", attack_flags.strategy, "random, replay or root")->capture_default_str();
  attack->add_option("--trials", attack_flags.trials)->capture_default_str();
  attack->add_option("--bound", attack_flags.bound, "root search word-length bound")->capture_default_str();
  attack->add_option("--budget", attack_flags.budget, "root search word budget")->capture_default_str();
  attack->add_option("--format", attack_flags.format, "table or kv")
      ->check(CLI::IsMember({"table", "kv"}))
      ->capture_default_str();

  std::vector<int> sizes{4, 8};
  int samples = 40;
  std::uint64_t selftest_seed = 1;
  auto* self = app.add_subcommand("selftest", "check the algebraic and protocol invariants");
  self->add_option("--n", sizes, "strand counts, comma separated")->delimiter(',');
  self->add_option("--seed", selftest_seed)->capture_default_str();
  self->add_option("--samples", samples, "samples per check")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  // keygen/run-local/attack default to the attack-scale parameters when
  // the user did not choose them.
  if (attack->parsed()) {
    if (attack->count("--n") == 0) params.n = 8;
    if (attack->count("--len") == 0) params.len = 32;
  }

  try {
    if (keygen->parsed()) return cmd_keygen(params, pub_path, secret_path);
    if (run_local->parsed()) return cmd_run_local(params);
    if (prove->parsed()) return cmd_prove(pub_path, secret_path, host, port, timeout);
    if (verify->parsed()) return cmd_verify_serve(params, serve);
    if (attack->parsed()) return cmd_attack(params, attack_flags);
    if (self->parsed()) return cmd_selftest(sizes, selftest_seed, samples);
  } catch (const IoFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const TransportError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNetwork;
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const SamplingFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRejected;
  }
  return kUsage;
}
