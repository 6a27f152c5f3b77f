#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sinkless/graph.hpp"

namespace sinkless {

/// Fixed-size set of EdgeIds backed by 64-bit words. Used for input-edge sets
/// (the subgraph H of a support graph) and for visibility masks.
class EdgeSet {
 public:
  EdgeSet() = default;
  explicit EdgeSet(std::size_t m, bool full = false)
      : size_(m), words_((m + 63) / 64, full ? ~std::uint64_t{0} : 0) {
    trim();
  }

  static EdgeSet from_indices(std::size_t m, const std::vector<EdgeId>& ids) {
    EdgeSet s(m);
    for (EdgeId e : ids) s.set(e);
    return s;
  }

  std::size_t size() const { return size_; }

  bool test(EdgeId e) const { return (words_[e >> 6] >> (e & 63)) & 1u; }
  void set(EdgeId e, bool value = true) {
    if (value)
      words_[e >> 6] |= std::uint64_t{1} << (e & 63);
    else
      words_[e >> 6] &= ~(std::uint64_t{1} << (e & 63));
  }
  void reset(EdgeId e) { set(e, false); }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool empty() const {
    for (auto w : words_)
      if (w) return false;
    return true;
  }

  EdgeSet& operator|=(const EdgeSet& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  EdgeSet& operator&=(const EdgeSet& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }
  EdgeSet& subtract(const EdgeSet& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
    return *this;
  }
  friend EdgeSet operator|(EdgeSet a, const EdgeSet& b) { return a |= b; }
  friend EdgeSet operator&(EdgeSet a, const EdgeSet& b) { return a &= b; }
  friend EdgeSet operator-(EdgeSet a, const EdgeSet& b) { return a.subtract(b); }

  bool intersects(const EdgeSet& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & o.words_[i]) return true;
    return false;
  }

  std::vector<EdgeId> indices() const {
    std::vector<EdgeId> out;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      auto bits = words_[w];
      while (bits) {
        out.push_back(static_cast<EdgeId>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits))));
        bits &= bits - 1;
      }
    }
    return out;
  }

  /// Lowest-bit-first 0/1 string, one character per edge.
  std::string bit_string() const {
    std::string s(size_, '0');
    for (EdgeId e = 0; e < size_; ++e)
      if (test(e)) s[e] = '1';
    return s;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

  friend bool operator==(const EdgeSet&, const EdgeSet&) = default;
  friend auto operator<=>(const EdgeSet& a, const EdgeSet& b) {
    return a.words_ <=> b.words_;
  }

 private:
  void trim() {
    if (size_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

struct EdgeSetHash {
  std::size_t operator()(const EdgeSet& s) const {
    std::uint64_t h = 1469598103934665603ull;
    for (auto w : s.words()) {
      h ^= w;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace sinkless
