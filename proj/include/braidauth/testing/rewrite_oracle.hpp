#pragma once

// Word-problem oracle that knows nothing about normal forms: two words are
// equal if they are connected by free cancellation and braid-relator
// substitutions without ever exceeding a length cap. Exhaustive over all
// words up to the cap, so only usable at very small n.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "braidauth/braid.hpp"

namespace braidauth::testing {

class RewriteOracle {
 public:
  RewriteOracle(int n, int length_cap) : n_(n), cap_(length_cap), alphabet_(2 * (n - 1)) {
    check_strand_count(n);
    offsets_.push_back(0);
    std::size_t count = 1;
    for (int len = 0; len <= cap_; ++len) {
      offsets_.push_back(offsets_.back() + count);
      count *= static_cast<std::size_t>(alphabet_);
    }
    parent_.resize(offsets_.back());
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    build_relators();
    close();
  }

  int length_cap() const { return cap_; }

  // True iff a and b are connected within the cap. False does not prove inequality.
  bool connected(const BraidWord& a, const BraidWord& b) {
    return find(id_of(encode(a))) == find(id_of(encode(b)));
  }

 private:
  using Letters = std::vector<int>;

  int code(int index, int sign) const { return 2 * (index - 1) + (sign < 0 ? 1 : 0); }
  static int inverse_code(int c) { return c ^ 1; }

  Letters encode(const BraidWord& w) const {
    if (w.strands() != n_) throw std::invalid_argument("oracle strand count mismatch");
    if (static_cast<int>(w.size()) > cap_) throw std::invalid_argument("word longer than oracle cap");
    Letters out;
    for (const auto& l : w.letters()) out.push_back(code(l.index, l.sign));
    return out;
  }

  std::size_t id_of(const Letters& w) const {
    std::size_t v = 0;
    for (int c : w) v = v * static_cast<std::size_t>(alphabet_) + static_cast<std::size_t>(c);
    return offsets_[w.size()] + v;
  }

  Letters word_of(std::size_t len, std::size_t value) const {
    Letters w(len);
    for (std::size_t k = len; k-- > 0;) {
      w[k] = static_cast<int>(value % static_cast<std::size_t>(alphabet_));
      value /= static_cast<std::size_t>(alphabet_);
    }
    return w;
  }

  static Letters inverted(const Letters& w) {
    Letters out(w.rbegin(), w.rend());
    for (int& c : out) c = inverse_code(c);
    return out;
  }

  void build_relators() {
    std::vector<Letters> base;
    for (int i = 1; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        if (j - i == 1) {
          // s_i s_j s_i S_j S_i S_j
          base.push_back({code(i, 1), code(j, 1), code(i, 1), code(j, -1), code(i, -1), code(j, -1)});
        } else {
          base.push_back({code(i, 1), code(j, 1), code(i, -1), code(j, -1)});
        }
      }
    }
    for (const auto& r : base) {
      for (const auto& word : {r, inverted(r)}) {
        for (std::size_t shift = 0; shift < word.size(); ++shift) {
          Letters rot(word.begin() + static_cast<std::ptrdiff_t>(shift), word.end());
          rot.insert(rot.end(), word.begin(), word.begin() + static_cast<std::ptrdiff_t>(shift));
          relators_.push_back(std::move(rot));
        }
      }
    }
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

  void close() {
    for (std::size_t len = 0; len <= static_cast<std::size_t>(cap_); ++len) {
      const std::size_t count = offsets_[len + 1] - offsets_[len];
      for (std::size_t v = 0; v < count; ++v) {
        const Letters w = word_of(len, v);
        const std::size_t self = offsets_[len] + v;
        // Free cancellation.
        for (std::size_t k = 0; k + 1 < len; ++k) {
          if (w[k + 1] == inverse_code(w[k])) {
            Letters shorter(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k));
            shorter.insert(shorter.end(), w.begin() + static_cast<std::ptrdiff_t>(k) + 2, w.end());
            unite(self, id_of(shorter));
          }
        }
        // Relator substitution: if u v = 1 then u may be replaced by v^-1.
        for (const auto& rel : relators_) {
          for (std::size_t ulen = 1; ulen <= rel.size(); ++ulen) {
            const std::size_t replacement_len = rel.size() - ulen;
            if (len - std::min(len, ulen) + replacement_len > static_cast<std::size_t>(cap_)) continue;
            for (std::size_t at = 0; at + ulen <= len; ++at) {
              if (!std::equal(rel.begin(), rel.begin() + static_cast<std::ptrdiff_t>(ulen),
                              w.begin() + static_cast<std::ptrdiff_t>(at)))
                continue;
              Letters tail(rel.begin() + static_cast<std::ptrdiff_t>(ulen), rel.end());
              Letters out(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(at));
              const Letters repl = inverted(tail);
              out.insert(out.end(), repl.begin(), repl.end());
              out.insert(out.end(), w.begin() + static_cast<std::ptrdiff_t>(at + ulen), w.end());
              unite(self, id_of(out));
            }
          }
        }
      }
    }
  }

  int n_;
  int cap_;
  int alphabet_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> parent_;
  std::vector<Letters> relators_;
};

}  // namespace braidauth::testing
