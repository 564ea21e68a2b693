#include "faqai/relation.hpp"

#include <algorithm>
#include <boost/tokenizer.hpp>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "faqai/errors.hpp"

namespace faqai {

std::string value_to_string(const Value& v) {
  switch (v.index()) {
    case 0: return std::to_string(std::get<0>(v));
    case 1: {
      std::ostringstream os;
      os.precision(17);
      os << std::get<1>(v);
      return os.str();
    }
    default: return std::get<2>(v);
  }
}

double numeric_value(const Value& v) {
  switch (v.index()) {
    case 0: return static_cast<double>(std::get<0>(v));
    case 1: return std::get<1>(v);
    default: throw DataError("string value '" + std::get<2>(v) + "' used where a number is required");
  }
}

Value parse_value_text(const std::string& text) {
  int64_t i = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
  if (ec == std::errc() && p == text.data() + text.size() && !text.empty()) return i;
  if (!text.empty()) {
    char* end = nullptr;
    double d = std::strtod(text.c_str(), &end);
    if (end == text.c_str() + text.size() && std::isfinite(d)) return d;
  }
  return text;
}

Relation::Relation(Semiring s, Schema schema) : sr_(s), schema_(std::move(schema)) {
  std::set<std::string> seen(schema_.begin(), schema_.end());
  if (seen.size() != schema_.size()) throw StructuralError("schema has duplicate variable names");
}

Relation Relation::from_rows(Semiring s, Schema schema, std::vector<std::pair<Tuple, SVal>> rows) {
  Relation r(s, std::move(schema));
  for (const auto& [t, w] : rows) {
    if (t.size() != r.schema_.size()) throw StructuralError("tuple arity does not match schema");
    s.check(w);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (size_t i = 0; i < rows.size();) {
    size_t j = i + 1;
    SVal acc = rows[i].second;
    while (j < rows.size() && rows[j].first == rows[i].first) s.add_into(acc, rows[j++].second);
    if (!s.is_zero(acc)) {
      r.tuples_.push_back(std::move(rows[i].first));
      r.weights_.push_back(std::move(acc));
    }
    i = j;
  }
  r.validate_tags();
  return r;
}

Relation Relation::from_sorted(Semiring s, Schema schema, std::vector<Tuple> tuples, std::vector<SVal> weights) {
  Relation r(s, std::move(schema));
  r.tuples_.reserve(tuples.size());
  r.weights_.reserve(weights.size());
  for (size_t i = 0; i < tuples.size(); ++i) {
    if (s.is_zero(weights[i])) continue;
    r.tuples_.push_back(std::move(tuples[i]));
    r.weights_.push_back(std::move(weights[i]));
  }
  return r;
}

Relation Relation::nullary(Semiring s, const SVal& w) {
  return from_rows(s, {}, {{Tuple{}, w}});
}

void Relation::validate_tags() const {
  if (tuples_.empty()) return;
  for (size_t c = 0; c < schema_.size(); ++c) {
    size_t tag = tuples_[0][c].index();
    for (const auto& t : tuples_) {
      if (t[c].index() != tag) throw StructuralError("column '" + schema_[c] + "' mixes value types");
    }
  }
}

int Relation::column(const std::string& var) const {
  for (size_t i = 0; i < schema_.size(); ++i)
    if (schema_[i] == var) return static_cast<int>(i);
  return -1;
}

std::optional<SVal> Relation::lookup(const Tuple& key) const {
  auto it = std::lower_bound(tuples_.begin(), tuples_.end(), key);
  if (it == tuples_.end() || *it != key) return std::nullopt;
  return weights_[it - tuples_.begin()];
}

SVal Relation::total() const { return fold_add(sr_, weights_); }

void Database::put(const std::string& name, Relation r) {
  if (r.semiring() != sr_) throw StructuralError("relation '" + name + "' uses a different semiring");
  rels_[name] = std::move(r);
}

const Relation& Database::get(const std::string& name) const {
  auto it = rels_.find(name);
  if (it == rels_.end()) throw DataError("unknown relation '" + name + "'");
  return it->second;
}

size_t Database::max_size() const {
  size_t n = 0;
  for (const auto& [_, r] : rels_) n = std::max(n, r.size());
  return n;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  using Sep = boost::escaped_list_separator<char>;
  boost::tokenizer<Sep> tok(line, Sep('\\', ',', '"'));
  return {tok.begin(), tok.end()};
}

}  // namespace

Relation load_csv(const std::string& path, const Semiring& s) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  std::vector<std::string> header;
  std::vector<std::pair<Tuple, SVal>> rows;
  int wcol = -1;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    try {
      cells = split_csv_line(line);
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed CSV line");
    }
    if (header.empty()) {
      header = cells;
      for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == "__w") wcol = static_cast<int>(i);
      continue;
    }
    if (cells.size() != header.size())
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " fields");
    Tuple t;
    SVal w = s.one();
    for (size_t i = 0; i < cells.size(); ++i) {
      if (static_cast<int>(i) == wcol) {
        w = s.parse_value(cells[i]);
      } else {
        t.push_back(parse_value_text(cells[i]));
      }
    }
    rows.emplace_back(std::move(t), std::move(w));
  }
  Schema schema;
  for (size_t i = 0; i < header.size(); ++i)
    if (static_cast<int>(i) != wcol) schema.push_back(header[i]);
  try {
    return Relation::from_rows(s, schema, std::move(rows));
  } catch (const StructuralError& e) {
    throw DataError(path + ": " + e.what());
  }
}

Database load_database(const std::string& dir, const Semiring& s) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("data directory '" + dir + "' does not exist");
  Database db(s);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) db.put(p.stem().string(), load_csv(p.string(), s));
  return db;
}

namespace {

std::vector<int> positions_of(const Relation& r, const std::vector<std::string>& vars) {
  std::vector<int> pos;
  for (const auto& v : vars) {
    int c = r.column(v);
    if (c < 0) throw StructuralError("variable '" + v + "' not in relation schema");
    pos.push_back(c);
  }
  return pos;
}

Tuple project(const Tuple& t, const std::vector<int>& pos) {
  Tuple out;
  out.reserve(pos.size());
  for (int p : pos) out.push_back(t[p]);
  return out;
}

}  // namespace

Relation reorder(const Relation& r, const Schema& order) {
  if (order.size() != r.arity()) throw StructuralError("reorder needs a permutation of the schema");
  if (order == r.schema()) return r;
  auto pos = positions_of(r, order);
  std::vector<std::pair<Tuple, SVal>> rows;
  rows.reserve(r.size());
  for (size_t i = 0; i < r.size(); ++i) rows.emplace_back(project(r.tuple(i), pos), r.weight(i));
  return Relation::from_rows(r.semiring(), order, std::move(rows));
}

Relation indicator_projection(const Relation& r, const std::vector<std::string>& target) {
  std::set<std::string> want(target.begin(), target.end());
  Schema out;
  for (const auto& v : r.schema())
    if (want.count(v)) out.push_back(v);
  if (out.empty()) throw StructuralError("indicator projection onto a disjoint variable set");
  auto pos = positions_of(r, out);
  std::vector<std::pair<Tuple, SVal>> rows;
  rows.reserve(r.size());
  const Semiring& s = r.semiring();
  for (size_t i = 0; i < r.size(); ++i) rows.emplace_back(project(r.tuple(i), pos), s.one());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  rows.erase(std::unique(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first == b.first; }),
             rows.end());
  std::vector<Tuple> ts;
  std::vector<SVal> ws;
  for (auto& [t, w] : rows) {
    ts.push_back(std::move(t));
    ws.push_back(std::move(w));
  }
  return Relation::from_sorted(s, out, std::move(ts), std::move(ws));
}

Relation group_aggregate(const Relation& r, const std::vector<std::string>& keep) {
  auto pos = positions_of(r, keep);
  std::vector<std::pair<Tuple, SVal>> rows;
  rows.reserve(r.size());
  for (size_t i = 0; i < r.size(); ++i) rows.emplace_back(project(r.tuple(i), pos), r.weight(i));
  return Relation::from_rows(r.semiring(), keep, std::move(rows));
}

Relation semijoin_reduce(const Relation& r, const Relation& filter) {
  std::vector<int> pos;
  for (const auto& v : filter.schema()) {
    int c = r.column(v);
    if (c < 0) throw StructuralError("semijoin filter variable '" + v + "' not in relation schema");
    pos.push_back(c);
  }
  const auto& keys = filter.tuples();
  std::vector<Tuple> ts;
  std::vector<SVal> ws;
  for (size_t i = 0; i < r.size(); ++i) {
    Tuple k = project(r.tuple(i), pos);
    if (std::binary_search(keys.begin(), keys.end(), k)) {
      ts.push_back(r.tuple(i));
      ws.push_back(r.weight(i));
    }
  }
  return Relation::from_sorted(r.semiring(), r.schema(), std::move(ts), std::move(ws));
}

Relation select_rows(const Relation& r, const std::function<bool(const Tuple&)>& keep) {
  std::vector<Tuple> ts;
  std::vector<SVal> ws;
  for (size_t i = 0; i < r.size(); ++i) {
    if (keep(r.tuple(i))) {
      ts.push_back(r.tuple(i));
      ws.push_back(r.weight(i));
    }
  }
  return Relation::from_sorted(r.semiring(), r.schema(), std::move(ts), std::move(ws));
}

namespace {

// Variable-at-a-time intersection over the sorted parts (generic join).
class GenericJoin {
 public:
  GenericJoin(const std::vector<Relation>& parts, Schema order, Counters* counters)
      : order_(std::move(order)), counters_(counters) {
    const Semiring& s = parts.front().semiring();
    sr_ = s;
    for (const auto& p : parts) {
      Schema sub;
      for (const auto& v : order_)
        if (p.has(v)) sub.push_back(v);
      parts_.push_back(reorder(p, sub));
    }
    lo_.assign(parts_.size(), 0);
    hi_.resize(parts_.size());
    depth_.assign(parts_.size(), 0);
    for (size_t i = 0; i < parts_.size(); ++i) hi_[i] = parts_[i].size();
    current_.resize(order_.size());
  }

  Relation run() {
    for (const auto& p : parts_)
      if (p.empty()) return Relation::from_sorted(sr_, order_, {}, {});
    descend(0);
    if (counters_) counters_->tuples_materialized += out_tuples_.size();
    return Relation::from_sorted(sr_, order_, std::move(out_tuples_), std::move(out_weights_));
  }

 private:
  void probe() {
    if (counters_) ++counters_->trie_probes;
  }

  // Range of rows in part p (within its current range) whose column d equals val.
  std::pair<size_t, size_t> equal_range(size_t p, size_t d, const Value& val) {
    probe();
    const auto& ts = parts_[p].tuples();
    auto first = ts.begin() + lo_[p];
    auto last = ts.begin() + hi_[p];
    auto lo = std::lower_bound(first, last, val, [d](const Tuple& t, const Value& v) { return t[d] < v; });
    auto hi = std::upper_bound(lo, last, val, [d](const Value& v, const Tuple& t) { return v < t[d]; });
    return {static_cast<size_t>(lo - ts.begin()), static_cast<size_t>(hi - ts.begin())};
  }

  void descend(size_t level) {
    if (level == order_.size()) {
      SVal w = sr_.one();
      for (size_t p = 0; p < parts_.size(); ++p) sr_.mul_into(w, parts_[p].weight(lo_[p]));
      if (!sr_.is_zero(w)) {
        out_tuples_.push_back(current_);
        out_weights_.push_back(std::move(w));
      }
      return;
    }
    const std::string& v = order_[level];
    std::vector<size_t> active;
    for (size_t p = 0; p < parts_.size(); ++p) {
      const auto& sch = parts_[p].schema();
      if (depth_[p] < sch.size() && sch[depth_[p]] == v) active.push_back(p);
    }
    size_t leader = active.front();
    for (size_t p : active)
      if (hi_[p] - lo_[p] < hi_[leader] - lo_[leader]) leader = p;

    std::vector<size_t> saved_lo(lo_), saved_hi(hi_);
    size_t ld = depth_[leader];
    size_t pos = saved_lo[leader];
    while (pos < saved_hi[leader]) {
      Value val = parts_[leader].tuple(pos)[ld];
      lo_[leader] = saved_lo[leader];
      hi_[leader] = saved_hi[leader];
      lo_[leader] = pos;
      auto [llo, lhi] = equal_range(leader, ld, val);
      bool ok = true;
      for (size_t p : active) {
        if (p == leader) continue;
        lo_[p] = saved_lo[p];
        hi_[p] = saved_hi[p];
        auto [a, b] = equal_range(p, depth_[p], val);
        if (a == b) {
          ok = false;
          break;
        }
        lo_[p] = a;
        hi_[p] = b;
      }
      if (ok) {
        lo_[leader] = llo;
        hi_[leader] = lhi;
        for (size_t p : active) ++depth_[p];
        current_[level] = val;
        descend(level + 1);
        for (size_t p : active) --depth_[p];
      }
      pos = lhi;
    }
    lo_ = saved_lo;
    hi_ = saved_hi;
  }

  Schema order_;
  Counters* counters_;
  Semiring sr_;
  std::vector<Relation> parts_;
  std::vector<size_t> lo_, hi_, depth_;
  Tuple current_;
  std::vector<Tuple> out_tuples_;
  std::vector<SVal> out_weights_;
};

}  // namespace

Relation multiway_join(const std::vector<Relation>& parts, Counters* counters) {
  if (parts.empty()) throw StructuralError("multiway_join needs at least one relation");
  for (const auto& p : parts)
    if (p.semiring() != parts.front().semiring()) throw StructuralError("multiway_join over mixed semirings");
  Schema order;
  for (const auto& p : parts)
    for (const auto& v : p.schema())
      if (std::find(order.begin(), order.end(), v) == order.end()) order.push_back(v);
  return GenericJoin(parts, order, counters).run();
}

}  // namespace faqai
