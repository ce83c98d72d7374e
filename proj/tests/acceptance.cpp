// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Built with the canonical-form audit enabled.

#include <sys/socket.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "braidauth/oracle.hpp"
#include "braidauth/testing/rewrite_oracle.hpp"
#include "braidauth/wire.hpp"

using namespace braidauth;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& measured) {
  std::printf("criterion %2d: %s  %s [%s]\n", id, ok ? "PASS" : "FAIL", what.c_str(), measured.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

// Runs fn(i) for i in [0, count) on all cores and sums the results.
std::uint64_t parallel_sum(std::uint64_t count, const std::function<std::uint64_t(std::uint64_t)>& fn) {
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::uint64_t> next{0};
  std::atomic<std::uint64_t> total{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      std::uint64_t local = 0;
      for (std::uint64_t i; (i = next.fetch_add(1)) < count;) local += fn(i);
      total += local;
    });
  }
  for (auto& th : pool) th.join();
  return total;
}

std::string tag(const std::string& prefix, std::uint64_t i) { return prefix + "/" + std::to_string(i); }

CanonicalForm random_braid(int n, int max_len, CoinStream& rng) {
  const int len = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_len) + 1));
  return normalize(sample_reduced_word(n, all_generators(n), len, rng));
}

template <class Scheme>
std::uint64_t honest_accepts(int n, std::uint64_t sessions) {
  return parallel_sum(sessions, [n](std::uint64_t i) -> std::uint64_t {
    CoinStream rng(1, tag("completeness/" + std::to_string(Scheme::id) + "/" + std::to_string(n), i));
    // Word length grows with n so keys clear the canonical-length filter.
    const SessionConfig cfg{Scheme::id, 3, SamplerConfig{n, std::max(32, 8 * n), 8, 0}, 2 + static_cast<int>(i % 2),
                            2 + static_cast<int>(i / 2 % 2)};
    const auto keys = Scheme::keygen(cfg, rng);
    return run_honest_session<Scheme>(keys, cfg.sampler, cfg.rounds, rng).accepted ? 1 : 0;
  });
}

void completeness() {
  const auto t0 = Clock::now();
  std::string measured;
  bool ok = true;
  for (int n : {4, 8, 16}) {
    const std::uint64_t a1 = honest_accepts<SchemeI>(n, 1000);
    const std::uint64_t a2 = honest_accepts<SchemeII>(n, 1000);
    ok = ok && a1 == 1000 && a2 == 1000;
    measured += "n=" + std::to_string(n) + " I " + std::to_string(a1) + "/1000 II " + std::to_string(a2) + "/1000; ";
  }
  char t[32];
  std::snprintf(t, sizeof t, "%.1fs", seconds_since(t0));
  report(1, ok, "honest sessions accepted at 100%", measured + t);
}

void verification_identity() {
  std::uint64_t mismatches = 0;
  for (int scheme : {1, 2}) {
    mismatches += parallel_sum(500, [scheme](std::uint64_t i) -> std::uint64_t {
      CoinStream rng(2, tag("identity/" + std::to_string(scheme), i));
      const int n = 4 + 2 * static_cast<int>(i % 3);
      const SessionConfig cfg{scheme, 1, SamplerConfig{n, 24, 6, 0}, 2 + static_cast<int>(i % 2),
                              2 + static_cast<int>(i / 2 % 2)};
      if (scheme == 1) {
        const auto keys = keygen1(cfg, rng);
        const auto ch = challenge1(keys.pub, cfg.sampler, rng);
        return prover_braid1(keys, ch.braid) == verifier_braid1(keys.pub, ch.verifier_secret) ? 0 : 1;
      }
      const auto keys = keygen2(cfg, rng);
      const auto ch = challenge2(keys.pub, cfg.sampler, rng);
      return prover_braid2(keys, ch.braid) == verifier_braid2(keys.pub, ch.verifier_secret) ? 0 : 1;
    });
  }
  report(2, mismatches == 0, "prover and verifier braids coincide before hashing",
         std::to_string(mismatches) + " mismatches in 2x500");
}

std::vector<BraidWord> all_words(int n, int max_len) {
  std::vector<BraidWord> out{BraidWord(n)};
  std::size_t begin = 0;
  for (int len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t k = begin; k < end; ++k) {
      for (int i = 1; i < n; ++i) {
        for (int sign : {1, -1}) {
          BraidWord next = out[k];
          next.push_back({i, sign});
          out.push_back(std::move(next));
        }
      }
    }
    begin = end;
  }
  return out;
}

void normal_form_vs_rewriting() {
  const auto t0 = Clock::now();
  testing::RewriteOracle oracle(3, 8);
  const auto words = all_words(3, 4);
  std::vector<CanonicalForm> forms;
  for (const auto& w : words) forms.push_back(normalize(w));
  std::uint64_t pairs = 0, disagreements = 0;
  for (std::size_t a = 0; a < words.size(); ++a) {
    for (std::size_t b = 0; b < words.size(); ++b) {
      ++pairs;
      if (equals(forms[a], forms[b]) != oracle.connected(words[a], words[b])) ++disagreements;
    }
  }
  const double secs = seconds_since(t0);
  char m[96];
  std::snprintf(m, sizeof m, "%llu disagreements in %llu pairs, %.1fs", static_cast<unsigned long long>(disagreements),
                static_cast<unsigned long long>(pairs), secs);
  report(3, disagreements == 0 && pairs == 341u * 341u && secs <= 60.0,
         "equals agrees with the rewriting oracle on all n=3 word pairs of length <= 4 within 60s", m);
}

void garside_identities() {
  std::uint64_t failed = 0, checks = 0;
  CoinStream rng(4, "garside");
  for (int n = 3; n <= 8; ++n) {
    const CanonicalForm d = delta(n);
    const CanonicalForm d2 = delta_power(n, 2);
    for (int k = 0; k < 200; ++k) {
      const CanonicalForm b = random_braid(n, 24, rng);
      failed += multiply(d, b) != multiply(tau(b), d);
      failed += tau(tau(b)) != b;
      failed += multiply(d2, b) != multiply(b, d2);
      checks += 3;
    }
  }
  report(4, failed == 0, "Delta b = tau(b) Delta, tau^2 = id, Delta^2 central for n=3..8",
         std::to_string(failed) + " failures in " + std::to_string(checks) + " checks");
}

void left_weightedness() {
  const auto checked = audit::checked.load();
  const auto bad = audit::violations.load();
  report(5, bad == 0 && checked > 0, "every canonical form produced so far is left-weighted",
         std::to_string(bad) + " violations in " + std::to_string(checked) + " forms");
}

void root_oracle() {
  CoinStream rng(6, "planted");
  int recovered = 0;
  for (int k = 0; k < 50; ++k) {
    const BraidWord x = sample_reduced_word(3, all_generators(3), 1 + static_cast<int>(rng.below(2)), rng);
    const int e = 2 + static_cast<int>(rng.below(2));
    const CanonicalForm y = power(normalize(x), e);
    const auto r = brute_force_root({y, e, 2});
    if (r.found() && power(*r.root, e) == y) ++recovered;
  }

  RootSearchOptions plain;
  plain.exponent_sum_filter = false;
  plain.permutation_filter = false;
  std::uint64_t instances = 0, hidden = 0, solvable = 0;
  enumerate_reduced_words(all_generators(3), 3, [](long long, int) { return false; },
                          [&](const std::vector<GeneratorLetter>& letters, long long) {
                            const CanonicalForm y = normalize(BraidWord(3, letters));
                            for (int e : {2, 3}) {
                              const bool filtered = brute_force_root({y, e, 3}).found();
                              const bool full = brute_force_root({y, e, 3}, plain).found();
                              ++instances;
                              solvable += full;
                              hidden += full && !filtered;
                            }
                            return false;
                          });
  report(6, recovered == 50 && hidden == 0 && solvable > 0,
         "planted roots recovered; filters never hide a root",
         std::to_string(recovered) + "/50 planted, " + std::to_string(hidden) + " hidden of " +
             std::to_string(solvable) + " solvable in " + std::to_string(instances));
}

template <class Scheme>
AttackReport attack(const SessionConfig& cfg, AttackStrategy strategy, std::uint64_t trials, int bound) {
  // Trials are independent, so split them over cores with separate coin streams.
  std::atomic<std::uint64_t> successes{0}, recovered{0};
  parallel_sum(trials, [&](std::uint64_t i) -> std::uint64_t {
    CoinStream rng(7, tag(std::string("attack/") + to_string(strategy) + "/" + std::to_string(Scheme::id) + "/" +
                              std::to_string(cfg.sampler.n),
                          i));
    const AttackReport r = impersonation_experiment<Scheme>(cfg, strategy, 1, rng, bound);
    successes += r.successes;
    recovered += r.keys_recovered;
    return 0;
  });
  AttackReport out;
  out.scheme = Scheme::id;
  out.strategy = strategy;
  out.trials = trials;
  out.successes = successes;
  out.keys_recovered = recovered;
  return out;
}

void soundness() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string measured;
  auto note = [&](const AttackReport& r, std::uint64_t expected, const char* where) {
    ok = ok && r.successes == expected;
    measured += std::string(r.scheme == 1 ? "I " : "II ") + to_string(r.strategy) + where + " " +
                std::to_string(r.successes) + "/" + std::to_string(r.trials) + "; ";
  };
  for (int scheme : {1, 2}) {
    const SessionConfig real{scheme, 1, SamplerConfig{8, 32, 8, 0}, 2, 3};
    // n=3 is not a legal strand count for either scheme; n=4 is the smallest toy size.
    const SessionConfig toy{scheme, 1, SamplerConfig{4, 2, 2, 0}, 2, 3};
    if (scheme == 1) {
      note(attack<SchemeI>(real, AttackStrategy::random_digest, 10000, 8), 0, "@n8");
      note(attack<SchemeI>(real, AttackStrategy::replay, 10000, 8), 0, "@n8");
      note(attack<SchemeI>(toy, AttackStrategy::root_attack, 20, 8), 20, "@n4L2");
      note(attack<SchemeI>(real, AttackStrategy::root_attack, 100, 8), 0, "@n8L32");
    } else {
      note(attack<SchemeII>(real, AttackStrategy::random_digest, 10000, 8), 0, "@n8");
      note(attack<SchemeII>(real, AttackStrategy::replay, 10000, 8), 0, "@n8");
      note(attack<SchemeII>(toy, AttackStrategy::root_attack, 20, 8), 20, "@n4L2");
      note(attack<SchemeII>(real, AttackStrategy::root_attack, 100, 8), 0, "@n8L32");
    }
  }
  char t[32];
  std::snprintf(t, sizeof t, "%.1fs", seconds_since(t0));
  report(7, ok, "impersonation fails at n=8 L=32 and succeeds at toy size", measured + t);
}

template <class Scheme>
std::uint64_t simulator_mismatches(int scheme) {
  return parallel_sum(100, [scheme](std::uint64_t i) -> std::uint64_t {
    CoinStream key_rng(8, tag("hvzk-keys/" + std::to_string(scheme), i));
    const SessionConfig cfg{scheme, 4, SamplerConfig{8, 32, 8, 0}, 2 + static_cast<int>(i % 2), 3};
    const auto keys = Scheme::keygen(cfg, key_rng);
    CoinStream real_coins(8, tag("hvzk-coins/" + std::to_string(scheme), i));
    CoinStream sim_coins = real_coins;
    const Transcript real = run_honest_session<Scheme>(keys, cfg.sampler, cfg.rounds, real_coins);
    const Transcript sim = simulate_transcript<Scheme>(keys.pub, cfg.sampler, cfg.rounds, sim_coins);
    return real.accepted && format_transcript(real) == format_transcript(sim) ? 0 : 1;
  });
}

void simulator() {
  const std::uint64_t m1 = simulator_mismatches<SchemeI>(1);
  const std::uint64_t m2 = simulator_mismatches<SchemeII>(2);
  report(8, m1 + m2 == 0, "simulated transcripts are byte-identical to real ones",
         "I " + std::to_string(m1) + " II " + std::to_string(m2) + " mismatches in 100 sessions each");
}

std::vector<wire::Frame> exchange(int port, const Bytes& bytes) {
  wire::Socket s = wire::connect_to("127.0.0.1", port);
  s.set_timeout(5);
  std::vector<wire::Frame> frames;
  try {
    s.send_all(bytes);
    ::shutdown(s.fd(), SHUT_WR);
    for (;;) frames.push_back(wire::read_frame(s));
  } catch (const TransportError&) {
  } catch (const wire::ProtocolViolation&) {
  }
  return frames;
}

Bytes malformed_frame(const Bytes& hello, CoinStream& rng) {
  Bytes bytes;
  switch (rng.below(5)) {
    case 0:  // noise
      bytes.resize(rng.below(64));
      for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.below(256));
      break;
    case 1:  // truncated
      bytes.assign(hello.begin(), hello.begin() + static_cast<std::ptrdiff_t>(rng.below(hello.size())));
      break;
    case 2:  // corrupted payload
      bytes = hello;
      bytes[5 + rng.below(hello.size() - 5)] ^= static_cast<std::uint8_t>(1 + rng.below(255));
      break;
    case 3:  // bad length prefix
      bytes = hello;
      bytes[rng.below(4)] ^= static_cast<std::uint8_t>(1 + rng.below(255));
      break;
    default:  // wrong or unknown type
      bytes = hello;
      bytes[4] = static_cast<std::uint8_t>(2 + rng.below(254));
      break;
  }
  return bytes;
}

void serialization_and_wire() {
  std::uint64_t roundtrip_failures = parallel_sum(100000, [](std::uint64_t i) -> std::uint64_t {
    CoinStream rng(9, tag("serialize", i));
    const int n = 2 + static_cast<int>(rng.below(15));
    CanonicalForm x = random_braid(n, 40, rng);
    if (rng.below(4) == 0) x = multiply(delta_power(n, static_cast<std::int64_t>(rng.below(9)) - 4), x);
    const Bytes bytes = serialize(x);
    const CanonicalForm back = deserialize(bytes);
    return back == x && serialize(back) == bytes ? 0 : 1;
  });

  const std::pair<CanonicalForm, const char*> goldens[] = {
      {identity(3), "aab89d64c8a47494b59948b78b8268ee02345b8905eee69c3122ce0023a22948"},
      {delta(3), "a56484b1aba447aa2bee2e441fb2888d419e5a18f4ef95d0159f4caa5895cc88"},
      {normalize(parse_word("s1", 3)), "b8f8c41053bca2c2092ee64825462b6a49d3bd8cd0f8fceb3beb74f3a95e7b3e"},
      {normalize(parse_word("S1", 3)), "16a2e8a1de540e2cf69fceed7059b92f899f84544d3c09dc7a66351c156da7bd"},
      {normalize(parse_word("s1 s1", 3)), "e96ab50d0afa4bdae8731442fffe6198035f05bdfd85a4afa8d779f6459b9fc8"},
  };
  int golden_ok = 0;
  for (const auto& [x, hex] : goldens) golden_ok += to_hex(hash_braid(x)) == hex;

  CoinStream key_rng(9, "fuzz-keys");
  const SessionConfig cfg{1, 1, SamplerConfig{8, 16, 3, 0}, 2, 3};
  const auto keys = keygen1(cfg, key_rng);
  const Bytes hello = wire::encode_frame(wire::MsgType::hello, wire::encode_hello(PublicKey{keys.pub}));
  wire::VerifierConfig vcfg;
  vcfg.scheme = 1;
  vcfg.rounds = 1;
  vcfg.sampler = cfg.sampler;
  vcfg.seed = 9;
  vcfg.io_timeout_seconds = 5;
  wire::VerifierServer server(vcfg, "127.0.0.1", 0);
  std::thread serving([&] { server.run(); });

  CoinStream rng(9, "fuzz");
  std::uint64_t answered = 0;
  for (int k = 0; k < 10000; ++k) {
    const auto frames = exchange(server.port(), malformed_frame(hello, rng));
    // Every malformed input ends in an ERROR frame, a challenge for a valid
    // prefix, or a closed connection; reaching the next iteration is the point.
    answered += frames.empty() || frames.back().type == 0x05 || frames.back().type == 0x02;
  }
  const bool alive = wire::prove("127.0.0.1", server.port(), KeyPair{keys}, 5).status == wire::ProveStatus::accepted;
  server.stop();
  serving.join();

  report(9, roundtrip_failures == 0 && golden_ok == 5 && alive && answered == 10000,
         "serialization round-trips, golden digests stable, server survives fuzzing",
         std::to_string(roundtrip_failures) + " round-trip failures in 100000, " + std::to_string(golden_ok) +
             "/5 goldens, " + std::to_string(answered) + "/10000 fuzz frames handled, server " +
             (alive ? "alive" : "dead"));
}

void torsion_free() {
  CoinStream rng(10, "torsion");
  int failed = 0;
  for (int k = 0; k < 100; ++k) {
    const int n = 3 + static_cast<int>(rng.below(6));
    CanonicalForm x = identity(n);
    while (x == identity(n)) x = random_braid(n, 16, rng);
    for (int e : {2, 3}) failed += power(x, e) == identity(n);
  }
  report(10, failed == 0, "nontrivial braids have nontrivial squares and cubes",
         std::to_string(failed) + " failures in 100 braids");
}

}  // namespace

// With arguments, runs only the listed criteria (for example `acceptance 7 9`).
int main(int argc, char** argv) {
  const std::vector<void (*)()> criteria = {completeness, verification_identity, normal_form_vs_rewriting,
                                            garside_identities, left_weightedness, root_oracle,
                                            soundness, simulator, serialization_and_wire, torsion_free};
  std::vector<bool> selected(criteria.size(), argc == 1);
  for (int a = 1; a < argc; ++a) {
    const int id = std::atoi(argv[a]);
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion %s\n", argv[a]);
      return 2;
    }
    selected[static_cast<std::size_t>(id - 1)] = true;
  }
  const auto t0 = Clock::now();
  int ran = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!selected[k]) continue;
    criteria[k]();
    ++ran;
  }
  std::printf("%d of %d criteria failed, %.1fs total\n", failures, ran, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
