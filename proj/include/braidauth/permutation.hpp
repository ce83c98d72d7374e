#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "braidauth/error.hpp"

namespace braidauth {

inline constexpr int kMaxStrands = 1024;

inline void check_strand_count(int n) {
  if (n < 2 || n > kMaxStrands)
    throw InvalidParameter("strand count must be in [2, " + std::to_string(kMaxStrands) +
                           "], got " + std::to_string(n));
}

// Subset of {0, ..., n-2}. Index i stands for the generator sigma_{i+1}.
class DescentSet {
 public:
  explicit DescentSet(int n) : bits_(n > 1 ? static_cast<std::size_t>(n - 1) : 0, false) {}

  void insert(int i) { bits_.at(static_cast<std::size_t>(i)) = true; }
  bool contains(int i) const { return bits_.at(static_cast<std::size_t>(i)); }
  bool empty() const { return std::none_of(bits_.begin(), bits_.end(), [](bool b) { return b; }); }
  std::size_t size() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true)); }

  bool subset_of(const DescentSet& other) const {
    if (other.bits_.size() != bits_.size()) return false;
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i] && !other.bits_[i]) return false;
    return true;
  }

  std::vector<int> members() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) out.push_back(static_cast<int>(i));
    return out;
  }

  friend bool operator==(const DescentSet&, const DescentSet&) = default;

 private:
  std::vector<bool> bits_;
};

// A permutation of {0, ..., n-1}; table[j] is the image of j.
//
// As the underlying permutation of a braid, table[j] is the end position of
// the strand that starts at position j. Composition runs left to right, so the
// permutation of the braid a*b is j -> b(a(j)).
class Permutation {
 public:
  using value_type = std::uint16_t;

  static Permutation identity(int n) {
    check_strand_count(n);
    std::vector<value_type> t(static_cast<std::size_t>(n));
    std::iota(t.begin(), t.end(), value_type{0});
    return Permutation(std::move(t));
  }

  // i -> n-1-i, the permutation of the fundamental braid.
  static Permutation reversal(int n) {
    check_strand_count(n);
    std::vector<value_type> t(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = static_cast<value_type>(n - 1 - i);
    return Permutation(std::move(t));
  }

  // The transposition of positions i and i+1 (0-based), i.e. sigma_{i+1}.
  static Permutation transposition(int n, int i) {
    Permutation p = identity(n);
    if (i < 0 || i + 1 >= n) throw InvalidParameter("transposition index out of range");
    std::swap(p.table_[static_cast<std::size_t>(i)], p.table_[static_cast<std::size_t>(i + 1)]);
    return p;
  }

  // Throws InvalidParameter unless the table is a bijection.
  explicit Permutation(std::vector<value_type> table) : table_(std::move(table)) {
    check_strand_count(static_cast<int>(table_.size()));
    if (!is_bijection(table_)) throw InvalidParameter("permutation table is not a bijection");
  }

  Permutation(std::initializer_list<int> table) : Permutation(to_table(table)) {}

  static bool is_bijection(std::span<const value_type> table) {
    std::vector<bool> seen(table.size(), false);
    for (value_type v : table) {
      if (v >= table.size() || seen[v]) return false;
      seen[v] = true;
    }
    return true;
  }

  int size() const { return static_cast<int>(table_.size()); }
  int operator[](int j) const { return table_[static_cast<std::size_t>(j)]; }
  std::span<const value_type> table() const { return table_; }

  bool is_identity() const {
    for (std::size_t j = 0; j < table_.size(); ++j)
      if (table_[j] != j) return false;
    return true;
  }

  bool is_reversal() const {
    const std::size_t n = table_.size();
    for (std::size_t j = 0; j < n; ++j)
      if (table_[j] != n - 1 - j) return false;
    return true;
  }

  Permutation inverse() const {
    std::vector<value_type> inv(table_.size());
    for (std::size_t j = 0; j < table_.size(); ++j) inv[table_[j]] = static_cast<value_type>(j);
    return Permutation(std::move(inv), trusted{});
  }

  // j -> other(this(j))
  Permutation then(const Permutation& other) const {
    if (other.size() != size()) throw InvalidParameter("permutation size mismatch");
    std::vector<value_type> out(table_.size());
    for (std::size_t j = 0; j < table_.size(); ++j) out[j] = other.table_[table_[j]];
    return Permutation(std::move(out), trusted{});
  }

  // Conjugation by the reversal: j -> n-1-p(n-1-j). Realizes tau on permutation braids.
  Permutation flipped() const {
    const std::size_t n = table_.size();
    std::vector<value_type> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = static_cast<value_type>(n - 1 - table_[n - 1 - j]);
    return Permutation(std::move(out), trusted{});
  }

  std::size_t inversions() const {
    std::size_t count = 0;
    for (std::size_t i = 0; i < table_.size(); ++i)
      for (std::size_t j = i + 1; j < table_.size(); ++j)
        if (table_[i] > table_[j]) ++count;
    return count;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

 private:
  struct trusted {};
  Permutation(std::vector<value_type> table, trusted) : table_(std::move(table)) {}

  static std::vector<value_type> to_table(std::initializer_list<int> values) {
    std::vector<value_type> t;
    t.reserve(values.size());
    for (int v : values) {
      if (v < 0 || v >= kMaxStrands) throw InvalidParameter("permutation entry out of range");
      t.push_back(static_cast<value_type>(v));
    }
    return t;
  }

  // Raw access for the normal-form kernel, which maintains bijectivity itself.
  friend struct PermutationAccess;

  std::vector<value_type> table_;
};

// D(p) = { i | p(i) > p(i+1) }: the generators that left-divide the permutation braid of p.
inline DescentSet descent_set(const Permutation& p) {
  DescentSet d(p.size());
  for (int i = 0; i + 1 < p.size(); ++i)
    if (p[i] > p[i + 1]) d.insert(i);
  return d;
}

struct PermutationAccess {
  static std::vector<Permutation::value_type>& table(Permutation& p) { return p.table_; }
  static Permutation adopt(std::vector<Permutation::value_type> t) {
    return Permutation(std::move(t), Permutation::trusted{});
  }
};

}  // namespace braidauth
