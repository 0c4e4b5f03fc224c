#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "physiocue/oculomotor.hpp"
#include "physiocue/stats.hpp"

namespace physiocue {

enum class MarginKind { Linear, Rbf };

const char* margin_kind_name(MarginKind k) noexcept;
MarginKind parse_margin_kind(const std::string& name);

struct MarginOptions {
  double lambda = 1e-3;  // L2 regularization strength
  std::size_t epochs = 200;  // passes over the data, at least 20000 steps
  double rbf_gamma = 0.0;    // 0 picks 1 / (2 * median pairwise squared distance)
};

// Hinge loss + L2 margin classifier trained by seeded stochastic subgradient
// steps. The bias is an extra constant feature (linear) or a constant added to
// the kernel (rbf). Features are standardized with training-set statistics.
class MarginClassifier {
 public:
  static MarginClassifier train(const std::vector<std::vector<double>>& x, std::span<const Label> y, MarginKind kind,
                                std::uint64_t seed, const MarginOptions& options = {});

  double decision(std::span<const double> x) const;
  Label predict(std::span<const double> x) const;
  std::vector<Label> predict(const std::vector<std::vector<double>>& x) const;

  MarginKind kind() const noexcept { return kind_; }
  double rbf_gamma() const noexcept { return gamma_; }
  std::uint64_t training_seed() const noexcept { return seed_; }
  std::size_t dims() const noexcept { return mean_.size(); }
  std::size_t support_size() const noexcept { return support_.size(); }

  std::string to_json() const;
  static MarginClassifier from_json(const std::string& text);

 private:
  std::vector<double> standardize(std::span<const double> x) const;

  MarginKind kind_ = MarginKind::Linear;
  std::uint64_t seed_ = 0;
  std::vector<double> mean_, scale_;
  std::vector<double> weights_;  // linear: w, then the bias weight
  double gamma_ = 0.0;
  std::vector<std::vector<double>> support_;  // rbf: standardized support vectors
  std::vector<double> coef_;                   // rbf: signed dual coefficients
};

struct Classification {
  std::vector<Label> predictions;
  double accuracy = 0.0;
};

Classification classify(const MarginClassifier& model, const std::vector<std::vector<double>>& x,
                        std::span<const Label> truth);

// (pulse_feat, saccade_feat) rows and labels.
std::vector<std::vector<double>> feature_matrix(std::span<const ResponseFeature> features);
std::vector<Label> feature_labels(std::span<const ResponseFeature> features);

}  // namespace physiocue
