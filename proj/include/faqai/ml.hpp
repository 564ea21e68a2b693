#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "faqai/engine.hpp"
#include "faqai/query.hpp"
#include "faqai/relation.hpp"

namespace faqai {

enum class Loss { Huber, Hinge, EpsInsensitive, Ordinal, Scalene };

Loss parse_loss(const std::string& name);
std::string loss_name(Loss l);

// The feature-extraction join plus which of its variables are features and label. With
// intercept set, the model gets a leading coefficient for a constant feature 1.
struct FeatureQuery {
  FaqAiQuery join;
  std::vector<std::string> features;
  std::string label;  // empty for clustering
  bool intercept = false;

  size_t dim() const { return features.size() + (intercept ? 1 : 0); }
  void validate(const Database& db) const;
};

FeatureQuery parse_feature_query(const std::string& json_text);
FeatureQuery load_feature_query(const std::string& path);

struct TrainConfig {
  double lambda = 0;
  double C = 1;
  double eps = 1e-3;            // cutting-plane tolerance
  int max_iters = 100;
  double step0 = 1;             // first step when lambda is 0; otherwise 1/(lambda t)
  bool armijo = true;
  int ordinal_levels = 2;       // d
  double scalene_alpha = 0.5;
  double eps_insensitive = 0.1;
  double grad_tol = 1e-6;
  uint64_t seed = 0;
  std::optional<std::vector<double>> init;
};

struct LossEval {
  double objective = 0;
  std::vector<double> gradient;
  size_t queries = 0;
};

// Evaluates FAQ-AI aggregates over the ligament extension of the feature join. One tree
// decomposition is chosen up front; plans are cached per query shape.
class FeatureEngine {
 public:
  FeatureEngine(const Database& db, FeatureQuery fq);

  const FeatureQuery& query() const { return fq_; }
  const Database& database() const { return db_; }
  const TreeDecomposition& td() const { return td_; }
  const mpq_class& width() const { return width_; }
  const Counters& counters() const { return counters_; }
  size_t queries() const { return queries_; }

  // Sum over the join of prod of the unary factors times prod of the ligaments.
  double aggregate(const std::vector<UnaryTerm>& factors, const std::vector<Ligament>& ligaments);
  // Ligament over every join variable: coef_y*y + sum_j coefs[j]*z_j + constant (< or <=) 0,
  // where z is the model's feature vector (intercept first when enabled).
  Ligament linear_ligament(const std::vector<double>& coefs, double coef_y, double constant, bool strict) const;
  // Feature value z_j as a unary factor; nullopt for the intercept.
  std::optional<UnaryTerm> feature_term(size_t j) const;

 private:
  const Database& db_;
  FeatureQuery fq_;
  TreeDecomposition td_;
  mpq_class width_;
  std::map<std::string, EvalPlan> plans_;
  Counters counters_;
  size_t queries_ = 0;
};

LossEval loss_eval(FeatureEngine& fe, const std::vector<double>& beta, Loss loss, const TrainConfig& cfg);
LossEval loss_eval(const Database& db, const FeatureQuery& fq, const std::vector<double>& beta, Loss loss,
                   const TrainConfig& cfg);

// The training set itself: one row per distinct join tuple, with its multiplicity.
struct MaterializedRow {
  std::vector<double> z;
  double y = 0;
  double weight = 1;
};
std::vector<MaterializedRow> materialize(const Database& db, const FeatureQuery& fq);
LossEval reference_loss(const std::vector<MaterializedRow>& rows, const std::vector<double>& beta, Loss loss,
                        const TrainConfig& cfg);

struct TrainResult {
  std::vector<double> beta;
  std::vector<double> objectives;  // J before the first step and after every accepted step
  int iterations = 0;
  bool converged = false;
  size_t queries = 0;
};

TrainResult bgd_train(const Database& db, const FeatureQuery& fq, Loss loss, const TrainConfig& cfg);

struct DualResult {
  std::vector<double> alpha;
  double objective = 0;
  int iterations = 0;
};

// max -1/2 |sum a_T x_T|^2 + sum |T| a_T  s.t. a >= 0, sum a <= budget.
DualResult wolfe_dual_solve(const std::vector<std::vector<double>>& x, const std::vector<double>& sizes, double budget);

struct CuttingPlaneResult {
  std::vector<double> beta;
  double xi = 0;
  double max_violation = 0;  // of the last most-violated constraint, beyond xi
  int iterations = 0;
  double train_size = 0;     // |G|
  size_t queries = 0;
};

CuttingPlaneResult cutting_plane_train(const Database& db, const FeatureQuery& fq, const TrainConfig& cfg);

struct KMeansIteration {
  std::vector<std::vector<double>> means;  // after the update
  std::vector<double> sizes;               // |G_i| used in the update
};

struct KMeansResult {
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> initial;
  std::vector<KMeansIteration> trace;
  bool converged = false;
  size_t queries = 0;
};

KMeansResult kmeans_fit(const Database& db, const FeatureQuery& fq, int k, const TrainConfig& cfg,
                        const std::optional<std::vector<std::vector<double>>>& init = std::nullopt);

// Lloyd's algorithm on the materialized join with the same tie rule (lowest index wins).
KMeansResult reference_lloyd(const std::vector<MaterializedRow>& rows, std::vector<std::vector<double>> init,
                             int max_iters);
double kmeans_objective(const std::vector<MaterializedRow>& rows, const std::vector<std::vector<double>>& means);

}  // namespace faqai
