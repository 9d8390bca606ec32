#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "formula.hpp"

namespace cl13 {

using Model = std::map<std::string, bool>;

inline bool eval(const Formula& f, const Model& m) {
  switch (f.kind()) {
    case Formula::Kind::Top: return true;
    case Formula::Kind::Bot: return false;
    case Formula::Kind::Lit: {
      if (f.atom().is_general())
        throw std::invalid_argument("eval: general atom " + f.atom().name);
      auto it = m.find(f.atom().name);
      if (it == m.end()) throw std::invalid_argument("eval: uncovered atom " + f.atom().name);
      return it->second != f.negated();
    }
    case Formula::Kind::Nary: break;
  }
  if (!is_parallel(f.connective()))
    throw std::invalid_argument("eval needs an elementary formula: " + print(f));
  bool conj = f.connective() == Connective::ParAnd;
  for (const auto& k : f.children()) {
    if (eval(k, m) != conj) return !conj;
  }
  return conj;
}

struct TruthVerdict {
  bool tautology = true;
  Model countermodel;  // set when !tautology
};

inline constexpr std::size_t kDefaultAtomBound = 24;

namespace detail {

inline std::uint64_t eval_block(const Formula& f, const std::map<std::string, std::uint64_t>& lanes) {
  switch (f.kind()) {
    case Formula::Kind::Top: return ~0ULL;
    case Formula::Kind::Bot: return 0;
    case Formula::Kind::Lit: {
      std::uint64_t v = lanes.at(f.atom().name);
      return f.negated() ? ~v : v;
    }
    case Formula::Kind::Nary: break;
  }
  bool conj = f.connective() == Connective::ParAnd;
  std::uint64_t acc = conj ? ~0ULL : 0;
  for (const auto& k : f.children()) {
    std::uint64_t v = eval_block(k, lanes);
    acc = conj ? (acc & v) : (acc | v);
  }
  return acc;
}

}  // namespace detail

// Exhaustive truth table; the countermodel is the first falsifying assignment in
// lexicographic order (atoms sorted by name, false before true).
inline TruthVerdict tautology_or_countermodel(const Formula& f, std::size_t bound = kDefaultAtomBound) {
  if (!is_elementary(f)) throw std::invalid_argument("truth table needs an elementary formula: " + print(f));
  std::vector<std::string> names;
  for (const auto& a : atoms(f)) names.push_back(a.name);
  if (names.size() > bound)
    throw std::length_error("truth table bound exceeded: " + std::to_string(names.size()) + " atoms");
  const std::size_t n = names.size();
  const std::uint64_t total = 1ULL << n;
  const std::uint64_t block = total < 64 ? total : 64;
  const std::uint64_t valid = block == 64 ? ~0ULL : ((1ULL << block) - 1);

  // Assignment x gives atom i the bit (n-1-i) of x.
  std::map<std::string, std::uint64_t> lanes;
  for (std::uint64_t base = 0; base < total; base += block) {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t k = n - 1 - i;
      std::uint64_t lane = 0;
      if (k < 6) {
        for (std::uint64_t j = 0; j < 64; ++j)
          if ((j >> k) & 1) lane |= 1ULL << j;
      } else if ((base >> k) & 1) {
        lane = ~0ULL;
      }
      lanes[names[i]] = lane;
    }
    std::uint64_t falsified = ~detail::eval_block(f, lanes) & valid;
    if (falsified) {
      std::uint64_t j = 0;
      while (!((falsified >> j) & 1)) ++j;
      std::uint64_t x = base + j;
      TruthVerdict v{false, {}};
      for (std::size_t i = 0; i < n; ++i) v.countermodel[names[i]] = (x >> (n - 1 - i)) & 1;
      return v;
    }
  }
  return {};
}

inline bool is_tautology(const Formula& f) { return tautology_or_countermodel(f).tautology; }

inline bool is_stable(const Formula& f) {
  if (!is_quasielementary(f)) throw std::invalid_argument("stability needs a quasielementary formula: " + print(f));
  return is_tautology(elementarize(f));
}

}  // namespace cl13
