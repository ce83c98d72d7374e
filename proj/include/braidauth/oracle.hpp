#pragma once

// Toy-scale root-problem machinery: exhaustive root search and the
// impersonation experiments run against both identification schemes.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "braidauth/braid.hpp"
#include "braidauth/error.hpp"
#include "braidauth/hash.hpp"
#include "braidauth/protocol.hpp"
#include "braidauth/sampling.hpp"

namespace braidauth {

inline long long exponent_sum(const BraidWord& w) {
  long long sum = 0;
  for (const auto& l : w.letters()) sum += l.sign;
  return sum;
}

// Every positive word for a permutation braid has one letter per inversion.
inline long long exponent_sum(const CanonicalForm& x) {
  const long long n = x.strands();
  long long sum = x.inf() * (n * (n - 1) / 2);
  for (const auto& f : x.factors()) sum += static_cast<long long>(f.inversions());
  return sum;
}

// Underlying permutation of a canonical form, without re-expanding it.
inline Permutation underlying_permutation(const CanonicalForm& x) {
  Permutation p = x.inf() % 2 != 0 ? Permutation::reversal(x.strands()) : Permutation::identity(x.strands());
  for (const auto& f : x.factors()) p = p.then(f);
  return p;
}

inline Permutation permutation_power(const Permutation& p, int e) {
  Permutation out = Permutation::identity(p.size());
  for (int k = 0; k < e; ++k) out = out.then(p);
  return out;
}

struct SearchStats {
  std::uint64_t words_enumerated = 0;
  std::uint64_t candidates_checked = 0;
};

class SearchExhausted : public std::runtime_error {
 public:
  explicit SearchExhausted(SearchStats stats)
      : std::runtime_error("root search exceeded its budget after " + std::to_string(stats.words_enumerated) +
                           " words"),
        stats_(stats) {}
  const SearchStats& stats() const { return stats_; }

 private:
  SearchStats stats_;
};

// Letters in enumeration order: by index, then sign (-1 before +1).
inline std::vector<GeneratorLetter> enumeration_alphabet(const std::vector<int>& generators) {
  std::vector<GeneratorLetter> out;
  for (int i : generators) {
    out.push_back({i, -1});
    out.push_back({i, 1});
  }
  std::sort(out.begin(), out.end(), [](const GeneratorLetter& a, const GeneratorLetter& b) {
    return a.index != b.index ? a.index < b.index : a.sign < b.sign;
  });
  return out;
}

inline std::vector<int> all_generators(int n) {
  std::vector<int> out;
  for (int i = 1; i < n; ++i) out.push_back(i);
  return out;
}

// Depth-first enumeration of freely reduced words over `generators`, by
// length and then lexicographically. `prune(exponent_sum, letters_left)`
// may cut a subtree; `visit(letters, exponent_sum)` returns true to stop.
// Returns whether a visit stopped the search.
template <class Prune, class Visit>
bool enumerate_reduced_words(const std::vector<int>& generators, int max_length, Prune&& prune, Visit&& visit) {
  const auto alphabet = enumeration_alphabet(generators);
  std::vector<GeneratorLetter> word;
  long long sum = 0;

  auto dfs = [&](auto&& self, int length) -> bool {
    if (static_cast<int>(word.size()) == length) return visit(word, sum);
    for (const auto& l : alphabet) {
      if (!word.empty() && word.back() == l.inverse()) continue;
      word.push_back(l);
      sum += l.sign;
      const int left = length - static_cast<int>(word.size());
      const bool stop = !prune(sum, left) && self(self, length);
      word.pop_back();
      sum -= l.sign;
      if (stop) return true;
    }
    return false;
  };

  for (int length = 0; length <= max_length; ++length) {
    if (prune(0LL, length)) continue;
    if (dfs(dfs, length)) return true;
  }
  return false;
}

inline Permutation letters_permutation(int n, const std::vector<GeneratorLetter>& letters) {
  std::vector<Permutation::value_type> at(static_cast<std::size_t>(n));
  for (std::size_t p = 0; p < at.size(); ++p) at[p] = static_cast<Permutation::value_type>(p);
  for (const auto& l : letters) std::swap(at[static_cast<std::size_t>(l.index) - 1], at[static_cast<std::size_t>(l.index)]);
  std::vector<Permutation::value_type> image(at.size());
  for (std::size_t p = 0; p < at.size(); ++p) image[at[p]] = static_cast<Permutation::value_type>(p);
  return PermutationAccess::adopt(std::move(image));
}

namespace detail {

// Whether perm(letters)^e equals `target`, without building Permutations.
inline bool permutation_power_matches(const std::vector<GeneratorLetter>& letters, int e, const Permutation& target) {
  const auto n = static_cast<std::size_t>(target.size());
  thread_local std::vector<Permutation::value_type> at, image, acc;
  at.resize(n);
  image.resize(n);
  acc.resize(n);
  for (std::size_t p = 0; p < n; ++p) at[p] = static_cast<Permutation::value_type>(p);
  for (const auto& l : letters) std::swap(at[static_cast<std::size_t>(l.index) - 1], at[static_cast<std::size_t>(l.index)]);
  for (std::size_t p = 0; p < n; ++p) image[at[p]] = static_cast<Permutation::value_type>(p);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t v = j;
    for (int k = 0; k < e; ++k) v = image[v];
    if (static_cast<int>(v) != target[static_cast<int>(j)]) return false;
  }
  return true;
}

}  // namespace detail

struct RootQuery {
  CanonicalForm y = identity(2);
  int e = 2;
  int max_word_length = 4;
};

struct RootSearchOptions {
  // Restrict candidate roots to these generator indices; empty means all.
  std::vector<int> generators;
  // Skip when e does not divide the exponent sum of y, and cut branches
  // whose exponent sum can no longer reach exponent_sum(y) / e.
  bool exponent_sum_filter = true;
  // Skip candidates whose permutation to the e-th power differs from y's.
  bool permutation_filter = true;
  std::uint64_t budget = 20'000'000;
};

struct RootSearchResult {
  std::optional<CanonicalForm> root;
  std::optional<BraidWord> word;
  bool pruned = false;
  SearchStats stats;

  bool found() const { return root.has_value(); }
};

// Returns the first freely reduced word x (length, then lexicographic) with
// normalize(x)^e = y. No root within the bound is not a proof that none exists.
inline RootSearchResult brute_force_root(const RootQuery& q, const RootSearchOptions& opt = {}) {
  if (q.e < 2) throw InvalidParameter("root exponent must be >= 2");
  if (q.max_word_length < 0) throw InvalidParameter("search bound must be non-negative");
  const int n = q.y.strands();
  RootSearchResult result;

  const long long ysum = exponent_sum(q.y);
  if (opt.exponent_sum_filter && ysum % q.e != 0) {
    result.pruned = true;
    return result;
  }
  const long long target = ysum / q.e;
  const Permutation yperm = underlying_permutation(q.y);
  const auto generators = opt.generators.empty() ? all_generators(n) : opt.generators;

  auto prune = [&](long long sum, int left) {
    if (!opt.exponent_sum_filter) return false;
    const long long gap = target > sum ? target - sum : sum - target;
    return gap > left;
  };
  auto visit = [&](const std::vector<GeneratorLetter>& letters, long long) {
    if (++result.stats.words_enumerated > opt.budget) throw SearchExhausted(result.stats);
    if (opt.permutation_filter && !detail::permutation_power_matches(letters, q.e, yperm)) return false;
    ++result.stats.candidates_checked;
    BraidWord w(n, letters);
    CanonicalForm x = normalize(w);
    if (power(x, q.e) != q.y) return false;
    result.root = std::move(x);
    result.word = std::move(w);
    return true;
  };
  enumerate_reduced_words(generators, q.max_word_length, prune, visit);
  return result;
}

// ------------------------------------------------------------ attacks

enum class AttackStrategy { random_digest, replay, root_attack };

inline const char* to_string(AttackStrategy s) {
  switch (s) {
    case AttackStrategy::random_digest: return "random";
    case AttackStrategy::replay: return "replay";
    case AttackStrategy::root_attack: return "root";
  }
  return "unknown";
}

inline std::optional<AttackStrategy> parse_strategy(std::string_view name) {
  if (name == "random" || name == "random-digest") return AttackStrategy::random_digest;
  if (name == "replay") return AttackStrategy::replay;
  if (name == "root" || name == "root-attack") return AttackStrategy::root_attack;
  return std::nullopt;
}

struct AttackReport {
  int scheme = 1;
  AttackStrategy strategy = AttackStrategy::random_digest;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  // Root attack only: trials where a working secret was recovered, and
  // trials where the search ran out of budget.
  std::uint64_t keys_recovered = 0;
  std::uint64_t searches_exhausted = 0;
  int root_bound = 0;
  SamplerConfig parameters;

  double rate() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials); }
};

inline std::string format_report_table(const AttackReport& r) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof line, "%-8s %-8s %10s %10s %10s\n", "scheme", "strategy", "trials", "successes", "rate");
  out += line;
  std::snprintf(line, sizeof line, "%-8d %-8s %10llu %10llu %10.4f\n", r.scheme, to_string(r.strategy),
                static_cast<unsigned long long>(r.trials), static_cast<unsigned long long>(r.successes), r.rate());
  out += line;
  return out;
}

inline std::string format_report_kv(const AttackReport& r) {
  std::ostringstream os;
  os << "scheme = " << r.scheme << "\n"
     << "strategy = " << to_string(r.strategy) << "\n"
     << "trials = " << r.trials << "\n"
     << "successes = " << r.successes << "\n"
     << "keys_recovered = " << r.keys_recovered << "\n"
     << "searches_exhausted = " << r.searches_exhausted << "\n"
     << "root_bound = " << r.root_bound << "\n"
     << "n = " << r.parameters.n << "\n"
     << "L = " << r.parameters.word_length << "\n"
     << "minlen = " << r.parameters.min_canonical_length << "\n"
     << "seed = " << r.parameters.seed << "\n";
  return os.str();
}

namespace detail {

// Restriction of p to the block [from, to); identity elsewhere. Nullopt if
// p moves a point of the block outside it.
inline std::optional<Permutation> block_part(const Permutation& p, int from, int to) {
  std::vector<Permutation::value_type> t(static_cast<std::size_t>(p.size()));
  for (int j = 0; j < p.size(); ++j) {
    if (j >= from && j < to) {
      if (p[j] < from || p[j] >= to) return std::nullopt;
      t[static_cast<std::size_t>(j)] = static_cast<Permutation::value_type>(p[j]);
    } else {
      t[static_cast<std::size_t>(j)] = static_cast<Permutation::value_type>(j);
    }
  }
  return PermutationAccess::adopt(std::move(t));
}

struct SearchBudget {
  std::uint64_t limit;
  std::uint64_t used = 0;
  void tick() {
    if (++used > limit) throw SearchExhausted(SearchStats{used, 0});
  }
};

}  // namespace detail

// Looks for lower a', upper b' (words of length <= bound) with a'^r b'^s = X.
// Upper and lower candidates are searched separately and joined through a
// table keyed by the serialized b'^s.
inline std::optional<SchemeISecret> recover_scheme1_secret(const SchemeIPublic& pub, int bound,
                                                           std::uint64_t budget = 20'000'000) {
  const int n = pub.n;
  const int half = n / 2;
  const Permutation xperm = underlying_permutation(pub.public_braid);
  const auto lower_target = detail::block_part(xperm, 0, half);
  const auto upper_target = detail::block_part(xperm, half, n);
  if (!lower_target || !upper_target) return std::nullopt;

  detail::SearchBudget spent{budget};
  auto no_prune = [](long long, int) { return false; };

  std::map<Bytes, CanonicalForm> upper_powers;
  // Distinct words often spell the same braid; each braid is tried once.
  std::set<Bytes> seen_upper;
  std::set<Bytes> seen_lower;
  enumerate_reduced_words(subgroup_generators(SubgroupSide::upper, n), bound, no_prune,
                          [&](const std::vector<GeneratorLetter>& letters, long long) {
                            spent.tick();
                            if (!detail::permutation_power_matches(letters, pub.s, *upper_target)) return false;
                            CanonicalForm b = normalize(BraidWord(n, letters));
                            if (!seen_upper.insert(serialize(b)).second) return false;
                            upper_powers.try_emplace(serialize(power(b, pub.s)), std::move(b));
                            return false;
                          });

  std::optional<SchemeISecret> found;
  enumerate_reduced_words(subgroup_generators(SubgroupSide::lower, n), bound, no_prune,
                          [&](const std::vector<GeneratorLetter>& letters, long long) {
                            spent.tick();
                            if (!detail::permutation_power_matches(letters, pub.r, *lower_target)) return false;
                            CanonicalForm a = normalize(BraidWord(n, letters));
                            if (!seen_lower.insert(serialize(a)).second) return false;
                            const CanonicalForm rest = multiply(power(inverse(a), pub.r), pub.public_braid);
                            auto it = upper_powers.find(serialize(rest));
                            if (it == upper_powers.end()) return false;
                            found = SchemeISecret{std::move(a), it->second};
                            return true;
                          });
  return found;
}

// Looks for lower a' (length <= bound) with a'^e base a'^f = X.
inline std::optional<SchemeIISecret> recover_scheme2_secret(const SchemeIIPublic& pub, int bound,
                                                            std::uint64_t budget = 20'000'000) {
  const int n = pub.n;
  const long long gap = exponent_sum(pub.public_braid) - exponent_sum(pub.base);
  const long long total = pub.e + pub.f;
  if (gap % total != 0) return std::nullopt;
  const long long target = gap / total;
  const Permutation xperm = underlying_permutation(pub.public_braid);
  const Permutation bperm = underlying_permutation(pub.base);

  detail::SearchBudget spent{budget};
  auto prune = [&](long long sum, int left) {
    const long long d = target > sum ? target - sum : sum - target;
    return d > left;
  };
  std::optional<SchemeIISecret> found;
  enumerate_reduced_words(subgroup_generators(SubgroupSide::lower, n), bound, prune,
                          [&](const std::vector<GeneratorLetter>& letters, long long) {
                            spent.tick();
                            const Permutation p = letters_permutation(n, letters);
                            if (permutation_power(p, pub.e).then(bperm).then(permutation_power(p, pub.f)) != xperm)
                              return false;
                            CanonicalForm a = normalize(BraidWord(n, letters));
                            if (detail::product({power(a, pub.e), pub.base, power(a, pub.f)}) != pub.public_braid)
                              return false;
                            found = SchemeIISecret{std::move(a)};
                            return true;
                          });
  return found;
}

namespace detail {

inline Response random_response(CoinStream& rng) {
  Response z;
  for (std::size_t k = 0; k < Digest::kSize; k += 8) {
    const std::uint64_t v = rng();
    for (std::size_t b = 0; b < 8; ++b) z.digest.bytes[k + b] = static_cast<std::uint8_t>(v >> (56 - 8 * b));
  }
  return z;
}

template <class Scheme>
std::optional<typename Scheme::Keys> recover_keys(const typename Scheme::Public& pub, int bound,
                                                  std::uint64_t budget) {
  if constexpr (Scheme::id == 1) {
    if (auto s = recover_scheme1_secret(pub, bound, budget)) return SchemeIKeys{pub, *s};
  } else {
    if (auto s = recover_scheme2_secret(pub, bound, budget)) return SchemeIIKeys{pub, *s};
  }
  return std::nullopt;
}

}  // namespace detail

// Each trial draws a fresh victim key pair and runs one full session of
// cfg.rounds rounds in which the prover is played by `strategy`, holding
// only the victim's public key (and, for replay, one eavesdropped honest
// session). Counts the sessions the verifier accepts.
template <class Scheme>
AttackReport impersonation_experiment(const SessionConfig& cfg, AttackStrategy strategy, std::uint64_t trials,
                                      CoinStream& rng, int root_bound = 8,
                                      std::uint64_t root_budget = 20'000'000) {
  cfg.validate();
  AttackReport report;
  report.scheme = Scheme::id;
  report.strategy = strategy;
  report.parameters = cfg.sampler;
  report.root_bound = strategy == AttackStrategy::root_attack ? root_bound : 0;

  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto victim = Scheme::keygen(cfg, rng);
    const auto& pub = victim.pub;
    Transcript session;
    switch (strategy) {
      case AttackStrategy::random_digest:
        session = run_session<Scheme>(
            pub, [&](const CanonicalForm&) { return detail::random_response(rng); }, cfg.sampler, cfg.rounds, rng);
        break;
      case AttackStrategy::replay: {
        const Transcript observed = run_honest_session<Scheme>(victim, cfg.sampler, cfg.rounds, rng);
        std::size_t next = 0;
        session = run_session<Scheme>(
            pub,
            [&](const CanonicalForm&) {
              const Digest z = observed.rounds[next % observed.rounds.size()].response;
              ++next;
              return Response{z};
            },
            cfg.sampler, cfg.rounds, rng);
        break;
      }
      case AttackStrategy::root_attack: {
        std::optional<typename Scheme::Keys> stolen;
        try {
          stolen = detail::recover_keys<Scheme>(pub, root_bound, root_budget);
        } catch (const SearchExhausted&) {
          ++report.searches_exhausted;
        }
        if (stolen) ++report.keys_recovered;
        session = run_session<Scheme>(
            pub,
            [&](const CanonicalForm& y) {
              return stolen ? Scheme::respond(*stolen, y) : detail::random_response(rng);
            },
            cfg.sampler, cfg.rounds, rng);
        break;
      }
    }
    ++report.trials;
    if (session.accepted) ++report.successes;
  }
  return report;
}

inline AttackReport impersonation_experiment(const SessionConfig& cfg, AttackStrategy strategy,
                                             std::uint64_t trials, CoinStream& rng, int root_bound = 8,
                                             std::uint64_t root_budget = 20'000'000) {
  return cfg.scheme == 1 ? impersonation_experiment<SchemeI>(cfg, strategy, trials, rng, root_bound, root_budget)
                         : impersonation_experiment<SchemeII>(cfg, strategy, trials, rng, root_bound, root_budget);
}

}  // namespace braidauth
