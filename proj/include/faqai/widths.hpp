#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "faqai/hypergraph.hpp"

namespace faqai {

enum class HSpace { Polymatroid, EPolymatroid, Modular };

enum class WidthKind { RhoStar, Faqw, FaqwL, Smfw, SmfwL, SharpSmfw, SharpSmfwL };

std::string kind_name(WidthKind k);
WidthKind parse_kind(const std::string& s);

// Exact fraction string: "3/2", "2".
std::string fraction_string(const mpq_class& q);

struct WidthReport {
  WidthKind kind = WidthKind::Faqw;
  mpq_class value = 0;
  std::optional<TreeDecomposition> witness_td;
  std::optional<std::vector<mpq_class>> witness_h;  // indexed by vertex-set bitmask
  std::string search_family_note;
  size_t family_size = 0;
};

constexpr int kMaxLpVertices = 6;
constexpr double kMaxBagSelections = 1e6;

// Fractional edge cover number of target by the finite edges.
mpq_class rho_star(const Hypergraph& h, VSet target);

mpq_class max_h_over_bag(const Hypergraph& h, VSet bag, HSpace space);

// Minimum over the enumerated (relaxed) F-connex family of max_t rho_star(bag t).
WidthReport faqw(const Hypergraph& h, VSet free_vars, bool relaxed);

// max over bag selections of max_h min_T h(beta(T)), h edge-dominated in Γ_n or Γ_{n|E}.
WidthReport smfw(const Hypergraph& h, VSet free_vars, bool relaxed, bool sharp);

WidthReport compute_width(const Hypergraph& h, VSet free_vars, WidthKind kind);

}  // namespace faqai
