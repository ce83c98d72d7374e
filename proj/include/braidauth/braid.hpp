#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "braidauth/error.hpp"
#include "braidauth/permutation.hpp"

#ifdef BRAIDAUTH_AUDIT_CANONICAL_FORMS
#include <atomic>
#endif

namespace braidauth {

// sigma_index^sign, 1 <= index <= n-1.
struct GeneratorLetter {
  int index = 1;
  int sign = 1;

  GeneratorLetter inverse() const { return {index, -sign}; }
  friend bool operator==(const GeneratorLetter&, const GeneratorLetter&) = default;
};

class BraidWord {
 public:
  explicit BraidWord(int n) : n_(n) { check_strand_count(n); }

  BraidWord(int n, std::vector<GeneratorLetter> letters) : n_(n), letters_(std::move(letters)) {
    check_strand_count(n);
    for (const auto& l : letters_) check_letter(l);
  }

  int strands() const { return n_; }
  const std::vector<GeneratorLetter>& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }

  void push_back(GeneratorLetter l) {
    check_letter(l);
    letters_.push_back(l);
  }

  void append(const BraidWord& other) {
    if (other.n_ != n_) throw InvalidParameter("word strand counts differ");
    letters_.insert(letters_.end(), other.letters_.begin(), other.letters_.end());
  }

  BraidWord inverse() const {
    BraidWord out(n_);
    out.letters_.reserve(letters_.size());
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) out.letters_.push_back(it->inverse());
    return out;
  }

  friend bool operator==(const BraidWord&, const BraidWord&) = default;

 private:
  void check_letter(const GeneratorLetter& l) const {
    if (l.index < 1 || l.index >= n_)
      throw InvalidParameter("generator index " + std::to_string(l.index) + " out of range for n=" +
                             std::to_string(n_));
    if (l.sign != 1 && l.sign != -1) throw InvalidParameter("generator sign must be +1 or -1");
  }

  int n_;
  std::vector<GeneratorLetter> letters_;
};

// Word notation: `s<i>` is sigma_i, `S<i>` its inverse; tokens separated by
// whitespace or '.'. The empty string is the identity.
inline BraidWord parse_word(std::string_view text, int n) {
  BraidWord w(n);
  std::size_t pos = 0;
  auto is_sep = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '.'; };
  while (pos < text.size()) {
    if (is_sep(text[pos])) {
      ++pos;
      continue;
    }
    const char head = text[pos];
    if (head != 's' && head != 'S')
      throw ParseError(ParseErrorCode::bad_syntax, "expected s<i> or S<i> at offset " + std::to_string(pos));
    std::size_t end = pos + 1;
    long long index = 0;
    while (end < text.size() && text[end] >= '0' && text[end] <= '9') {
      index = index * 10 + (text[end] - '0');
      if (index > kMaxStrands) break;
      ++end;
    }
    if (end == pos + 1)
      throw ParseError(ParseErrorCode::bad_syntax, "missing generator index at offset " + std::to_string(pos));
    if (end < text.size() && !is_sep(text[end]))
      throw ParseError(ParseErrorCode::bad_syntax, "unexpected character at offset " + std::to_string(end));
    if (index < 1 || index >= n)
      throw ParseError(ParseErrorCode::bad_syntax,
                       "generator index " + std::to_string(index) + " out of range for n=" + std::to_string(n));
    w.push_back({static_cast<int>(index), head == 's' ? 1 : -1});
    pos = end;
  }
  return w;
}

inline std::string to_string(const BraidWord& w) {
  std::string out;
  for (const auto& l : w.letters()) {
    if (!out.empty()) out += ' ';
    out += (l.sign > 0 ? 's' : 'S');
    out += std::to_string(l.index);
  }
  return out;
}

// Positive word for the permutation braid of p: at each step peel off the
// smallest left-dividing generator.
inline BraidWord permutation_to_braidword(const Permutation& p) {
  const int n = p.size();
  BraidWord w(n);
  std::vector<Permutation::value_type> rest(p.table().begin(), p.table().end());
  int i = 0;
  while (i + 1 < n) {
    if (rest[static_cast<std::size_t>(i)] > rest[static_cast<std::size_t>(i) + 1]) {
      w.push_back({i + 1, 1});
      std::swap(rest[static_cast<std::size_t>(i)], rest[static_cast<std::size_t>(i) + 1]);
      i = i > 0 ? i - 1 : 0;
    } else {
      ++i;
    }
  }
  return w;
}

// Underlying permutation of any word. Inverse letters permute like their
// positive counterparts.
inline Permutation braidword_to_permutation(const BraidWord& w) {
  const auto n = static_cast<std::size_t>(w.strands());
  // at[p] = start position of the strand now at position p
  std::vector<Permutation::value_type> at(n);
  for (std::size_t p = 0; p < n; ++p) at[p] = static_cast<Permutation::value_type>(p);
  for (const auto& l : w.letters()) {
    const auto i = static_cast<std::size_t>(l.index);
    std::swap(at[i - 1], at[i]);
  }
  std::vector<Permutation::value_type> image(n);
  for (std::size_t p = 0; p < n; ++p) image[at[p]] = static_cast<Permutation::value_type>(p);
  return Permutation(std::move(image));
}

// Left canonical form Delta^inf * p_1 * ... * p_l. The only representation
// of a braid that equality and hashing look at.
class CanonicalForm {
 public:
  int strands() const { return n_; }
  std::int64_t inf() const { return inf_; }
  const std::vector<Permutation>& factors() const { return factors_; }

  friend bool operator==(const CanonicalForm&, const CanonicalForm&) = default;

  // Checked construction from parts. Throws InvalidParameter naming the
  // violated invariant.
  static CanonicalForm from_parts(int n, std::int64_t inf, std::vector<Permutation> factors);

 private:
  CanonicalForm(int n, std::int64_t inf, std::vector<Permutation> factors)
      : n_(n), inf_(inf), factors_(std::move(factors)) {}

  friend struct CanonicalFormBuilder;

  int n_ = 2;
  std::int64_t inf_ = 0;
  std::vector<Permutation> factors_;
};

// Returns a description of the first violated canonical-form invariant, or
// nullopt if (inf, factors) is a left canonical form on n strands.
inline std::optional<std::string> canonical_violation(int n, const std::vector<Permutation>& factors) {
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const auto& f = factors[k];
    if (f.size() != n) return "factor " + std::to_string(k) + " has the wrong size";
    if (f.is_identity()) return "factor " + std::to_string(k) + " is the identity";
    if (f.is_reversal()) return "factor " + std::to_string(k) + " is Delta";
    if (k > 0 && !descent_set(f).subset_of(descent_set(factors[k - 1].inverse())))
      return "factors " + std::to_string(k - 1) + "," + std::to_string(k) + " are not left-weighted";
  }
  return std::nullopt;
}

inline bool is_left_weighted(const CanonicalForm& x) {
  return !canonical_violation(x.strands(), x.factors()).has_value();
}

#ifdef BRAIDAUTH_AUDIT_CANONICAL_FORMS
// Every canonical form produced by the kernel is validated and counted here.
namespace audit {
inline std::atomic<std::uint64_t> checked{0};
inline std::atomic<std::uint64_t> violations{0};
}  // namespace audit
#endif

namespace detail {

// Moves generators from the front of b onto the back of a until
// D(b) is contained in D(a^-1). Smallest eligible generator first.
// Returns whether anything moved.
inline bool left_weight(Permutation& a, Permutation& b) {
  auto& at = PermutationAccess::table(a);
  auto& bt = PermutationAccess::table(b);
  const std::size_t n = at.size();
  thread_local std::vector<Permutation::value_type> ainv;
  ainv.resize(n);
  for (std::size_t j = 0; j < n; ++j) ainv[at[j]] = static_cast<Permutation::value_type>(j);

  bool moved = false;
  std::size_t i = 0;
  while (i + 1 < n) {
    if (bt[i] > bt[i + 1] && ainv[i] < ainv[i + 1]) {
      std::swap(at[ainv[i]], at[ainv[i + 1]]);
      std::swap(ainv[i], ainv[i + 1]);
      std::swap(bt[i], bt[i + 1]);
      moved = true;
      i = i > 0 ? i - 1 : 0;
    } else {
      ++i;
    }
  }
  return moved;
}

}  // namespace detail

// Accumulates Delta^inf * (left-weighted factors) while braids are
// multiplied onto the right.
struct CanonicalFormBuilder {
  int n;
  std::int64_t inf = 0;
  std::vector<Permutation> factors;

  explicit CanonicalFormBuilder(int strands) : n(strands) { check_strand_count(strands); }

  explicit CanonicalFormBuilder(const CanonicalForm& x) : n(x.n_), inf(x.inf_), factors(x.factors_) {}

  // Appends a permutation braid and re-establishes left-weightedness by
  // sweeping right to left until a pair is already balanced.
  void append(Permutation p) {
    factors.push_back(std::move(p));
    for (std::size_t k = factors.size() - 1; k > 0; --k)
      if (!detail::left_weight(factors[k - 1], factors[k])) break;
  }

  // Right-multiplies by Delta^k: factors move left past Delta via x Delta = Delta tau(x).
  void append_delta_power(std::int64_t k) {
    if (k % 2 != 0)
      for (auto& f : factors) f = f.flipped();
    inf += k;
  }

  void append(const CanonicalForm& x) {
    if (x.n_ != n) throw InvalidParameter("braids on different strand counts");
    append_delta_power(x.inf_);
    for (const auto& f : x.factors_) append(f);
  }

  void append(GeneratorLetter l) {
    const Permutation s = Permutation::transposition(n, l.index - 1);
    if (l.sign > 0) {
      append(s);
    } else {
      // sigma_i^-1 = Delta^-1 * (Delta sigma_i^-1)
      append_delta_power(-1);
      append(Permutation::reversal(n).then(s));
    }
  }

  CanonicalForm finish() && {
    std::size_t lead = 0;
    while (lead < factors.size() && factors[lead].is_reversal()) ++lead;
    inf += static_cast<std::int64_t>(lead);
    factors.erase(factors.begin(), factors.begin() + static_cast<std::ptrdiff_t>(lead));
    while (!factors.empty() && factors.back().is_identity()) factors.pop_back();
    CanonicalForm out(n, inf, std::move(factors));
#ifdef BRAIDAUTH_AUDIT_CANONICAL_FORMS
    audit::checked.fetch_add(1, std::memory_order_relaxed);
    if (!is_left_weighted(out)) audit::violations.fetch_add(1, std::memory_order_relaxed);
#endif
    return out;
  }
};

inline CanonicalForm CanonicalForm::from_parts(int n, std::int64_t inf, std::vector<Permutation> factors) {
  check_strand_count(n);
  if (auto why = canonical_violation(n, factors)) throw InvalidParameter("not a canonical form: " + *why);
  return CanonicalForm(n, inf, std::move(factors));
}

inline CanonicalForm identity(int n) { return CanonicalFormBuilder(n).finish(); }

inline CanonicalForm delta(int n) {
  CanonicalFormBuilder b(n);
  b.inf = 1;
  return std::move(b).finish();
}

inline CanonicalForm delta_power(int n, std::int64_t k) {
  CanonicalFormBuilder b(n);
  b.inf = k;
  return std::move(b).finish();
}

// Positive word of Delta: (s1 ... s_{n-1})(s1 ... s_{n-2}) ... (s1).
inline BraidWord delta_word(int n) {
  BraidWord w(n);
  for (int top = n - 1; top >= 1; --top)
    for (int i = 1; i <= top; ++i) w.push_back({i, 1});
  return w;
}

inline CanonicalForm normalize(const BraidWord& w) {
  CanonicalFormBuilder b(w.strands());
  for (const auto& l : w.letters()) b.append(l);
  return std::move(b).finish();
}

inline CanonicalForm multiply(const CanonicalForm& a, const CanonicalForm& b) {
  if (a.strands() != b.strands()) throw InvalidParameter("braids on different strand counts");
  CanonicalFormBuilder out(a);
  out.append(b);
  return std::move(out).finish();
}

// tau(sigma_i) = sigma_{n-i}, applied factorwise.
inline CanonicalForm tau(const CanonicalForm& x) {
  CanonicalFormBuilder b(x.strands());
  b.inf = x.inf();
  b.factors.reserve(x.factors().size());
  for (const auto& f : x.factors()) b.factors.push_back(f.flipped());
  return std::move(b).finish();
}

inline CanonicalForm inverse(const CanonicalForm& x) {
  const int n = x.strands();
  const Permutation rev = Permutation::reversal(n);
  CanonicalFormBuilder b(n);
  // p^-1 = Delta^-1 * (Delta p^-1), with the permutation of Delta p^-1 being p^-1 after rev.
  for (auto it = x.factors().rbegin(); it != x.factors().rend(); ++it) {
    b.append_delta_power(-1);
    b.append(rev.then(it->inverse()));
  }
  b.append_delta_power(-x.inf());
  return std::move(b).finish();
}

inline CanonicalForm power(const CanonicalForm& x, long long e) {
  if (e < 0) throw InvalidParameter("power exponent must be non-negative; invert first");
  CanonicalForm result = identity(x.strands());
  CanonicalForm base = x;
  while (e > 0) {
    if (e & 1) result = multiply(result, base);
    e >>= 1;
    if (e > 0) base = multiply(base, base);
  }
  return result;
}

inline bool equals(const CanonicalForm& a, const CanonicalForm& b) {
  if (a.strands() != b.strands()) throw InvalidParameter("braids on different strand counts");
  return a == b;
}

inline std::size_t canonical_length(const CanonicalForm& x) { return x.factors().size(); }

inline bool is_delta_power(const CanonicalForm& x) { return x.factors().empty(); }

// Re-expands a canonical form into a word: Delta^inf then each factor's positive word.
inline BraidWord to_word(const CanonicalForm& x) {
  const int n = x.strands();
  BraidWord w(n);
  const BraidWord d = x.inf() >= 0 ? delta_word(n) : delta_word(n).inverse();
  const std::int64_t reps = x.inf() >= 0 ? x.inf() : -x.inf();
  for (std::int64_t k = 0; k < reps; ++k) w.append(d);
  for (const auto& f : x.factors()) w.append(permutation_to_braidword(f));
  return w;
}

inline std::string to_string(const Permutation& p) {
  std::string out = "[";
  for (int j = 0; j < p.size(); ++j) {
    if (j > 0) out += ',';
    out += std::to_string(p[j]);
  }
  return out + "]";
}

inline std::string to_string(const CanonicalForm& x) {
  std::ostringstream os;
  os << "D^" << x.inf();
  for (const auto& f : x.factors()) os << ' ' << to_string(f);
  return os.str();
}

}  // namespace braidauth
