#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "faqai/semiring.hpp"

namespace faqai {

// Tag order: integer, float, string. Comparisons are only meaningful within a tag.
using Value = std::variant<int64_t, double, std::string>;
using Tuple = std::vector<Value>;
using Schema = std::vector<std::string>;

std::string value_to_string(const Value& v);
double numeric_value(const Value& v);
Value parse_value_text(const std::string& text);

struct Counters {
  uint64_t trie_probes = 0;
  uint64_t dominance_queries = 0;
  uint64_t tuples_materialized = 0;

  uint64_t total() const { return trie_probes + dominance_queries + tuples_materialized; }
  Counters& operator+=(const Counters& o) {
    trie_probes += o.trie_probes;
    dominance_queries += o.dominance_queries;
    tuples_materialized += o.tuples_materialized;
    return *this;
  }
};

// Rows are kept sorted lexicographically in schema order, keys unique, no zero weights.
class Relation {
 public:
  Relation() = default;
  Relation(Semiring s, Schema schema);

  // Sorts, merges duplicate keys with the semiring sum and drops zero rows.
  static Relation from_rows(Semiring s, Schema schema, std::vector<std::pair<Tuple, SVal>> rows);
  // Rows must already be sorted with unique keys; zero rows are skipped.
  static Relation from_sorted(Semiring s, Schema schema, std::vector<Tuple> tuples, std::vector<SVal> weights);
  static Relation nullary(Semiring s, const SVal& w);

  const Semiring& semiring() const { return sr_; }
  const Schema& schema() const { return schema_; }
  size_t arity() const { return schema_.size(); }
  size_t size() const { return tuples_.size(); }
  bool empty() const { return tuples_.empty(); }
  const Tuple& tuple(size_t i) const { return tuples_[i]; }
  const SVal& weight(size_t i) const { return weights_[i]; }
  const std::vector<Tuple>& tuples() const { return tuples_; }
  const std::vector<SVal>& weights() const { return weights_; }

  int column(const std::string& var) const;
  bool has(const std::string& var) const { return column(var) >= 0; }
  std::optional<SVal> lookup(const Tuple& key) const;
  // Semiring sum of all weights.
  SVal total() const;

 private:
  void validate_tags() const;

  Semiring sr_;
  Schema schema_;
  std::vector<Tuple> tuples_;
  std::vector<SVal> weights_;
};

class Database {
 public:
  Database() = default;
  explicit Database(Semiring s) : sr_(s) {}

  const Semiring& semiring() const { return sr_; }
  void put(const std::string& name, Relation r);
  const Relation& get(const std::string& name) const;
  bool contains(const std::string& name) const { return rels_.count(name) > 0; }
  const std::map<std::string, Relation>& relations() const { return rels_; }
  // N: the largest relation size.
  size_t max_size() const;

 private:
  Semiring sr_;
  std::map<std::string, Relation> rels_;
};

Relation load_csv(const std::string& path, const Semiring& s);
// Every *.csv file in dir becomes a relation named after the file stem.
Database load_database(const std::string& dir, const Semiring& s);

Relation reorder(const Relation& r, const Schema& order);
Relation indicator_projection(const Relation& r, const std::vector<std::string>& target);
Relation group_aggregate(const Relation& r, const std::vector<std::string>& keep);
Relation semijoin_reduce(const Relation& r, const Relation& filter);
Relation select_rows(const Relation& r, const std::function<bool(const Tuple&)>& keep);
Relation multiway_join(const std::vector<Relation>& parts, Counters* counters = nullptr);

}  // namespace faqai
