#pragma once

// Invariant suite behind `braidauth selftest`. Every check has a stable name
// so a failure report points at the broken law. The normalizer is
// injectable so that a deliberately broken one can be shown to be caught.

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "braidauth/braid.hpp"
#include "braidauth/hash.hpp"
#include "braidauth/keyfile.hpp"
#include "braidauth/oracle.hpp"
#include "braidauth/protocol.hpp"
#include "braidauth/sampling.hpp"
#include "braidauth/wire.hpp"

namespace braidauth {

// Applies `moves` random defining-relation rewrites to w: inserting or
// deleting a cancelling pair, swapping distant letters, replacing
// s_i s_j s_i by s_j s_i s_j (either sign), or inserting a whole relator.
// The result represents the same braid.
inline BraidWord random_rewrite(const BraidWord& w, int moves, CoinStream& rng) {
  const int n = w.strands();
  std::vector<GeneratorLetter> x = w.letters();
  auto random_letter = [&] {
    return GeneratorLetter{1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1))),
                           rng.below(2) == 0 ? 1 : -1};
  };
  auto at = [&](std::size_t k) { return x.begin() + static_cast<std::ptrdiff_t>(k); };

  for (int m = 0; m < moves; ++m) {
    const std::uint64_t kind = rng.below(5);
    const std::size_t pos = static_cast<std::size_t>(rng.below(x.size() + 1));
    if (kind == 0) {
      const GeneratorLetter l = random_letter();
      x.insert(at(pos), {l, l.inverse()});
    } else if (kind == 1) {
      for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const std::size_t i = (pos + k) % (x.size() - 1);
        if (x[i + 1] == x[i].inverse()) {
          x.erase(at(i), at(i + 2));
          break;
        }
      }
    } else if (kind == 2) {
      for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const std::size_t i = (pos + k) % (x.size() - 1);
        if (std::abs(x[i].index - x[i + 1].index) > 1) {
          std::swap(x[i], x[i + 1]);
          break;
        }
      }
    } else if (kind == 3) {
      for (std::size_t k = 0; k + 2 < x.size(); ++k) {
        const std::size_t i = (pos + k) % (x.size() - 2);
        if (x[i] == x[i + 2] && x[i].sign == x[i + 1].sign && std::abs(x[i].index - x[i + 1].index) == 1) {
          std::swap(x[i], x[i + 1]);
          x[i + 2] = x[i];
          break;
        }
      }
    } else if (n >= 3) {
      // s_i s_j s_i S_j S_i S_j or s_j s_i s_j S_i S_j S_i, possibly inverted.
      const int i = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 2)));
      const GeneratorLetter a{i, 1}, b{i + 1, 1};
      std::vector<GeneratorLetter> rel{a, b, a, b.inverse(), a.inverse(), b.inverse()};
      if (rng.below(2) == 0) rel = {b, a, b, a.inverse(), b.inverse(), a.inverse()};
      if (rng.below(2) == 0) {
        std::vector<GeneratorLetter> inv;
        for (auto it = rel.rbegin(); it != rel.rend(); ++it) inv.push_back(it->inverse());
        rel = inv;
      }
      x.insert(at(pos), rel.begin(), rel.end());
    }
  }
  return BraidWord(n, std::move(x));
}

namespace selftest {

using Normalizer = std::function<CanonicalForm(const BraidWord&)>;

struct Options {
  std::vector<int> sizes{4, 8};
  std::uint64_t seed = 1;
  int samples = 40;
  Normalizer normalizer = [](const BraidWord& w) { return normalize(w); };
};

struct PropertyResult {
  std::string name;
  int n = 0;
  bool passed = true;
  std::string detail;
};

namespace detail {

class Runner {
 public:
  explicit Runner(std::ostream* log) : log_(log) {}

  template <class Check>
  void check(const std::string& name, int n, Check&& body) {
    PropertyResult r{name, n, true, {}};
    try {
      std::string why = body();
      if (!why.empty()) r.passed = false, r.detail = why;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    if (log_) {
      *log_ << (r.passed ? "ok    " : "FAIL  ") << name;
      if (n > 0) *log_ << " (n=" << n << ")";
      if (!r.passed) *log_ << ": " << r.detail;
      *log_ << "\n";
    }
    results_.push_back(std::move(r));
  }

  std::vector<PropertyResult> take() { return std::move(results_); }

 private:
  std::ostream* log_;
  std::vector<PropertyResult> results_;
};

inline std::string describe(const CanonicalForm& x) { return to_string(x); }

}  // namespace detail

inline std::vector<PropertyResult> run(const Options& opt, std::ostream* log = nullptr) {
  detail::Runner runner(log);
  const auto& norm = opt.normalizer;
  const int samples = opt.samples;

  for (const int n : opt.sizes) {
    if (n < 4 || n % 2 != 0) throw InvalidParameter("selftest sizes must be even and >= 4");
    CoinStream rng(opt.seed, "selftest/" + std::to_string(n));
    auto word = [&](int len) { return sample_reduced_word(n, all_generators(n), len, rng); };
    auto braid = [&](int len) { return normalize(word(len)); };

    runner.check("relation-invariance", n, [&]() -> std::string {
      for (int k = 0; k < samples; ++k) {
        const BraidWord w = word(12);
        const BraidWord v = random_rewrite(w, 8, rng);
        if (norm(w) != norm(v)) return to_string(w) + " vs " + to_string(v);
      }
      return {};
    });

    runner.check("left-weightedness", n, [&]() -> std::string {
      for (int k = 0; k < samples; ++k) {
        const CanonicalForm a = braid(16), b = braid(16);
        for (const auto& x : {a, multiply(a, b), inverse(a), power(a, 3), tau(b)}) {
          if (auto v = canonical_violation(n, x.factors())) return *v + " in " + detail::describe(x);
        }
      }
      return {};
    });

    runner.check("idempotence", n, [&]() -> std::string {
      for (int k = 0; k < samples; ++k) {
        const CanonicalForm x = braid(16);
        if (normalize(to_word(x)) != x) return detail::describe(x);
      }
      return {};
    });

    runner.check("delta-commutation", n, [&]() -> std::string {
      const CanonicalForm d = delta(n), d2 = delta_power(n, 2);
      for (int k = 0; k < samples; ++k) {
        const CanonicalForm x = braid(12);
        if (multiply(d, x) != multiply(tau(x), d)) return "delta x != tau(x) delta for " + detail::describe(x);
        if (multiply(d2, x) != multiply(x, d2)) return "delta^2 not central at " + detail::describe(x);
      }
      return {};
    });

    runner.check("tau-involution", n, [&]() -> std::string {
      for (int k = 0; k < samples; ++k) {
        const CanonicalForm x = braid(12);
        if (tau(tau(x)) != x) return detail::describe(x);
      }
      return {};
    });

    runner.check("group-laws", n, [&]() -> std::string {
      const CanonicalForm id = identity(n);
      for (int k = 0; k < samples; ++k) {
        const CanonicalForm a = braid(8), b = braid(8), c = braid(8);
        if (multiply(multiply(a, b), c) != multiply(a, multiply(b, c))) return "associativity";
        if (multiply(a, inverse(a)) != id || multiply(inverse(a), a) != id) return "inverse law";
        if (multiply(id, a) != a || multiply(a, id) != a) return "identity law";
        CanonicalForm acc = id;
        for (int e = 0; e <= 4; ++e) {
          if (power(a, e) != acc) return "power(x, " + std::to_string(e) + ")";
          acc = multiply(acc, a);
        }
      }
      return {};
    });

    runner.check("torsion-freeness", n, [&]() -> std::string {
      for (int k = 0; k < samples; ++k) {
        const CanonicalForm x = braid(10);
        if (x == identity(n)) continue;
        for (int e : {2, 3})
          if (power(x, e) == identity(n)) return detail::describe(x);
      }
      return {};
    });

    runner.check("permutation-bijection", n, [&]() -> std::string {
      if (n <= 5) {
        std::vector<Permutation::value_type> t(static_cast<std::size_t>(n));
        for (std::size_t j = 0; j < t.size(); ++j) t[j] = static_cast<Permutation::value_type>(j);
        do {
          const Permutation p(t);
          if (braidword_to_permutation(permutation_to_braidword(p)) != p) return to_string(p);
        } while (std::next_permutation(t.begin(), t.end()));
      } else {
        for (int k = 0; k < samples; ++k) {
          std::vector<Permutation::value_type> t(static_cast<std::size_t>(n));
          for (std::size_t j = 0; j < t.size(); ++j) t[j] = static_cast<Permutation::value_type>(j);
          std::shuffle(t.begin(), t.end(), rng);
          const Permutation p(t);
          const BraidWord w = permutation_to_braidword(p);
          if (braidword_to_permutation(w) != p) return to_string(p);
          if (w.size() != p.inversions()) return "not a permutation braid: " + to_string(p);
        }
      }
      return {};
    });

    const SamplerConfig small{n, 8, 3, opt.seed};

    runner.check("subgroup-closure", n, [&]() -> std::string {
      const int half = n / 2;
      auto fixes_upper = [&](const CanonicalForm& x) {
        for (const auto& f : x.factors())
          for (int j = half; j < n; ++j)
            if (f[j] != j) return false;
        return true;
      };
      const auto lower = subgroup_generators(SubgroupSide::lower, n);
      for (int k = 0; k < samples; ++k) {
        BraidWord u(n), v(n);
        for (int j = 0; j < 8; ++j) {
          u.push_back({lower[rng.below(lower.size())], 1});
          v.push_back({lower[rng.below(lower.size())], 1});
        }
        const CanonicalForm x = multiply(normalize(u), normalize(v));
        if (x.inf() != 0 || !fixes_upper(x)) return "positive product " + detail::describe(x);
        // Mixed-sign words absorb Delta^-1; multiplying by a large enough
        // power of the lower-block half twist squared makes them positive.
        const BraidWord w = sample_subgroup_word(SubgroupSide::lower, small, rng);
        BraidWord shifted = w;
        const BraidWord block = permutation_to_braidword([&] {
          std::vector<Permutation::value_type> t(static_cast<std::size_t>(n));
          for (int j = 0; j < n; ++j) t[static_cast<std::size_t>(j)] = static_cast<Permutation::value_type>(j < half ? half - 1 - j : j);
          return Permutation(t);
        }());
        for (std::size_t m = 0; m < 2 * w.size(); ++m) shifted.append(block);
        const CanonicalForm y = normalize(shifted);
        if (y.inf() != 0 || !fixes_upper(y)) return "shifted word " + to_string(w);
      }
      return {};
    });

    runner.check("commutation", n, [&]() -> std::string {
      for (int k = 0; k < samples; ++k) {
        const CanonicalForm a = normalize(sample_subgroup_word(SubgroupSide::lower, small, rng));
        const CanonicalForm b = normalize(sample_subgroup_word(SubgroupSide::upper, small, rng));
        if (multiply(a, b) != multiply(b, a)) return detail::describe(a) + " / " + detail::describe(b);
      }
      return {};
    });

    runner.check("determinism", n, [&]() -> std::string {
      CoinStream s1(opt.seed + 1000, "determinism"), s2(opt.seed + 1000, "determinism");
      for (int k = 0; k < samples; ++k) {
        if (sample_word(small, s1).letters() != sample_word(small, s2).letters()) return "word samples diverged";
      }
      return {};
    });

    runner.check("hash-well-defined", n, [&]() -> std::string {
      for (int k = 0; k < samples; ++k) {
        const BraidWord w = word(10);
        if (hash_braid(normalize(w)) != hash_braid(normalize(random_rewrite(w, 6, rng)))) return to_string(w);
      }
      return {};
    });

    runner.check("serialize-roundtrip", n, [&]() -> std::string {
      std::set<Bytes> seen;
      std::set<std::string> distinct;
      for (int k = 0; k < samples * 5; ++k) {
        const CanonicalForm x = braid(static_cast<int>(rng.below(20)));
        const Bytes b = serialize(x);
        if (deserialize(b) != x) return detail::describe(x);
        if (distinct.insert(to_string(x)).second && !seen.insert(b).second) return "collision at " + detail::describe(x);
      }
      return {};
    });

    const SessionConfig s1cfg{1, 2, small, 2, 3};
    const SessionConfig s2cfg{2, 2, small, 3, 2};

    runner.check("completeness", n, [&]() -> std::string {
      for (int k = 0; k < samples / 4 + 1; ++k) {
        const auto k1 = keygen1(s1cfg, rng);
        if (!run_honest_session<SchemeI>(k1, small, 2, rng).accepted) return "scheme 1 rejected an honest prover";
        const auto k2 = keygen2(s2cfg, rng);
        if (!run_honest_session<SchemeII>(k2, small, 2, rng).accepted) return "scheme 2 rejected an honest prover";
      }
      return {};
    });

    runner.check("verification-identity", n, [&]() -> std::string {
      for (int k = 0; k < samples / 4 + 1; ++k) {
        const auto k1 = keygen1(s1cfg, rng);
        const auto c1 = challenge1(k1.pub, small, rng);
        if (prover_braid1(k1, c1.braid) != verifier_braid1(k1.pub, c1.verifier_secret)) return "scheme 1";
        const auto k2 = keygen2(s2cfg, rng);
        const auto c2 = challenge2(k2.pub, small, rng);
        if (prover_braid2(k2, c2.braid) != verifier_braid2(k2.pub, c2.verifier_secret)) return "scheme 2";
      }
      return {};
    });

    runner.check("simulator-exactness", n, [&]() -> std::string {
      for (int k = 0; k < samples / 4 + 1; ++k) {
        const auto k1 = keygen1(s1cfg, rng);
        CoinStream real1(opt.seed + static_cast<std::uint64_t>(k), "hvzk"), sim1 = real1;
        if (run_honest_session<SchemeI>(k1, small, 3, real1) != simulate_transcript<SchemeI>(k1.pub, small, 3, sim1))
          return "scheme 1 transcripts differ";
        const auto k2 = keygen2(s2cfg, rng);
        CoinStream real2(opt.seed + static_cast<std::uint64_t>(k), "hvzk"), sim2 = real2;
        if (run_honest_session<SchemeII>(k2, small, 3, real2) != simulate_transcript<SchemeII>(k2.pub, small, 3, sim2))
          return "scheme 2 transcripts differ";
      }
      return {};
    });

    if (n >= 8) {
      runner.check("challenge-freshness", n, [&]() -> std::string {
        const SamplerConfig wide{n, 32, 3, opt.seed};
        const auto k1 = keygen1(SessionConfig{1, 1, wide, 2, 2}, rng);
        std::set<Bytes> seen;
        for (int k = 0; k < samples * 5; ++k)
          if (!seen.insert(serialize(challenge1(k1.pub, wide, rng).braid)).second) return "repeated challenge";
        return {};
      });
    }

    runner.check("wire-roundtrip", n, [&]() -> std::string {
      const auto k1 = keygen1(s1cfg, rng);
      const auto k2 = keygen2(s2cfg, rng);
      for (const PublicKey& key : {PublicKey{k1.pub}, PublicKey{k2.pub}}) {
        if (!(wire::decode_hello(wire::encode_hello(key)) == key)) return "HELLO payload";
      }
      const CanonicalForm y = challenge1(k1.pub, small, rng).braid;
      const Bytes frame = wire::encode_frame(wire::MsgType::challenge, serialize(y));
      if (deserialize(std::span<const std::uint8_t>(frame).subspan(5)) != y) return "CHALLENGE payload";
      return {};
    });
  }

  // Root oracle laws at three strands, independent of the size sweep.
  {
    CoinStream rng(opt.seed, "selftest/roots");
    const int n = 3;
    runner.check("root-soundness", n, [&]() -> std::string {
      for (int k = 0; k < 10; ++k) {
        const CanonicalForm x = normalize(sample_reduced_word(n, all_generators(n), 1 + static_cast<int>(rng.below(2)), rng));
        const int e = 2 + static_cast<int>(rng.below(2));
        const auto r = brute_force_root({power(x, e), e, 2});
        if (!r.found()) return "no root for " + detail::describe(x);
        if (power(*r.root, e) != power(x, e)) return "returned a non-root";
      }
      return {};
    });

    runner.check("filter-soundness", n, [&]() -> std::string {
      RootSearchOptions unfiltered;
      unfiltered.exponent_sum_filter = false;
      unfiltered.permutation_filter = false;
      for (int len = 0; len <= 2; ++len) {
        for (int k = 0; k < 10; ++k) {
          const CanonicalForm y = normalize(sample_reduced_word(n, all_generators(n), len, rng));
          for (int e : {2, 3}) {
            const bool filtered = brute_force_root({y, e, 3}).found();
            if (filtered != brute_force_root({y, e, 3}, unfiltered).found()) return "filters changed the answer";
          }
        }
      }
      return {};
    });

    runner.check("monotonicity", n, [&]() -> std::string {
      for (int k = 0; k < 10; ++k) {
        const CanonicalForm x = normalize(sample_reduced_word(n, all_generators(n), 2, rng));
        const CanonicalForm y = power(x, 2);
        bool found = false;
        for (int bound = 0; bound <= 3; ++bound) {
          const bool now = brute_force_root({y, 2, bound}).found();
          if (found && !now) return "bound " + std::to_string(bound) + " lost a root";
          found = found || now;
        }
      }
      return {};
    });
  }
  return runner.take();
}

inline bool all_passed(const std::vector<PropertyResult>& results) {
  for (const auto& r : results)
    if (!r.passed) return false;
  return true;
}

}  // namespace selftest
}  // namespace braidauth
