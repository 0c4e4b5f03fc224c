#include "physiocue/classifier.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <nlohmann/json.hpp>

#include "physiocue/errors.hpp"
#include "physiocue/rng.hpp"

namespace physiocue {

namespace {

constexpr int kModelVersion = 1;

double sign_of(Label l) { return l == Label::Deceptive ? 1.0 : -1.0; }

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

const char* margin_kind_name(MarginKind k) noexcept { return k == MarginKind::Linear ? "linear" : "rbf"; }

MarginKind parse_margin_kind(const std::string& name) {
  std::string s;
  for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "linear") return MarginKind::Linear;
  if (s == "rbf") return MarginKind::Rbf;
  throw InvalidInput("unknown classifier kind '" + name + "'");
}

MarginClassifier MarginClassifier::train(const std::vector<std::vector<double>>& x, std::span<const Label> y,
                                         MarginKind kind, std::uint64_t seed, const MarginOptions& options) {
  const std::size_t n = x.size();
  if (n == 0 || n != y.size()) throw InvalidInput("train: need matching, non-empty features and labels");
  if (!(options.lambda > 0.0)) throw InvalidInput("train: lambda must be positive");
  const std::size_t dims = x.front().size();
  if (dims == 0) throw InvalidInput("train: zero-dimensional features");
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i].size() != dims) throw InvalidInput("train: ragged feature rows");
    for (double v : x[i]) {
      if (!std::isfinite(v)) throw InvalidInput("train: non-finite feature");
    }
    pos += y[i] == Label::Deceptive ? 1 : 0;
  }
  if (pos == 0 || pos == n) throw InvalidInput("train: training set holds a single class");

  MarginClassifier m;
  m.kind_ = kind;
  m.seed_ = seed;
  m.mean_.assign(dims, 0.0);
  m.scale_.assign(dims, 1.0);
  for (std::size_t d = 0; d < dims; ++d) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = x[i][d];
    m.mean_[d] = mean(col);
    const double sd = population_sd(col);
    m.scale_[d] = sd > 0.0 ? sd : 1.0;
  }
  std::vector<std::vector<double>> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = m.standardize(x[i]);

  const double lambda = options.lambda;
  const std::size_t steps = std::max<std::size_t>(20000, options.epochs * n);
  Rng rng(seed);

  if (kind == MarginKind::Linear) {
    std::vector<double> w(dims + 1, 0.0);
    for (std::size_t t = 1; t <= steps; ++t) {
      const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
      const double yi = sign_of(y[i]);
      double f = w[dims];
      for (std::size_t d = 0; d < dims; ++d) f += w[d] * z[i][d];
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double shrink = 1.0 - eta * lambda;
      for (double& v : w) v *= shrink;
      if (yi * f < 1.0) {
        for (std::size_t d = 0; d < dims; ++d) w[d] += eta * yi * z[i][d];
        w[dims] += eta * yi;
      }
      // Projection onto the ball of radius 1/sqrt(lambda).
      double norm2 = 0.0;
      for (double v : w) norm2 += v * v;
      const double cap = 1.0 / std::sqrt(lambda);
      if (norm2 > cap * cap) {
        const double s = cap / std::sqrt(norm2);
        for (double& v : w) v *= s;
      }
    }
    m.weights_ = std::move(w);
    return m;
  }

  // Kernel form: f_t(x_i) = 1/(lambda t) * sum_j alpha_j y_j (K(i, j) + 1).
  double gamma = options.rbf_gamma;
  if (gamma <= 0.0) {
    std::vector<double> d2;
    d2.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) d2.push_back(sq_dist(z[i], z[j]));
    }
    const double med = median(std::move(d2));
    gamma = med > 0.0 ? 1.0 / (2.0 * med) : 1.0;
  }
  m.gamma_ = gamma;
  std::vector<double> kernel(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double k = std::exp(-gamma * sq_dist(z[i], z[j])) + 1.0;
      kernel[i * n + j] = kernel[j * n + i] = k;
    }
  }
  std::vector<double> alpha(n, 0.0), g(n, 0.0);  // g_i = sum_j alpha_j y_j K(i, j)
  for (std::size_t t = 1; t <= steps; ++t) {
    const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    const double yi = sign_of(y[i]);
    if (yi * g[i] / (lambda * static_cast<double>(t)) < 1.0) {
      alpha[i] += 1.0;
      for (std::size_t j = 0; j < n; ++j) g[j] += yi * kernel[j * n + i];
    }
  }
  const double norm = 1.0 / (lambda * static_cast<double>(steps));
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] == 0.0) continue;
    m.support_.push_back(z[i]);
    m.coef_.push_back(alpha[i] * sign_of(y[i]) * norm);
  }
  return m;
}

std::vector<double> MarginClassifier::standardize(std::span<const double> x) const {
  if (x.size() != mean_.size()) {
    throw InvalidInput("classifier expects " + std::to_string(mean_.size()) + " features, got " +
                       std::to_string(x.size()));
  }
  std::vector<double> z(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) z[d] = (x[d] - mean_[d]) / scale_[d];
  return z;
}

double MarginClassifier::decision(std::span<const double> x) const {
  const auto z = standardize(x);
  if (kind_ == MarginKind::Linear) {
    double f = weights_.back();
    for (std::size_t d = 0; d < z.size(); ++d) f += weights_[d] * z[d];
    return f;
  }
  double f = 0.0;
  for (std::size_t s = 0; s < support_.size(); ++s) {
    f += coef_[s] * (std::exp(-gamma_ * sq_dist(z, support_[s])) + 1.0);
  }
  return f;
}

Label MarginClassifier::predict(std::span<const double> x) const {
  return decision(x) > 0.0 ? Label::Deceptive : Label::Truthful;
}

std::vector<Label> MarginClassifier::predict(const std::vector<std::vector<double>>& x) const {
  std::vector<Label> out;
  out.reserve(x.size());
  for (const auto& row : x) out.push_back(predict(row));
  return out;
}

std::string MarginClassifier::to_json() const {
  nlohmann::json j;
  j["format"] = "physiocue-margin-classifier";
  j["version"] = kModelVersion;
  j["kind"] = margin_kind_name(kind_);
  j["training_seed"] = seed_;
  j["feature_mean"] = mean_;
  j["feature_scale"] = scale_;
  if (kind_ == MarginKind::Linear) {
    j["weights"] = std::vector<double>(weights_.begin(), weights_.end() - 1);
    j["bias"] = weights_.back();
  } else {
    j["rbf_gamma"] = gamma_;
    j["support"] = support_;
    j["coef"] = coef_;
  }
  return j.dump(2);
}

MarginClassifier MarginClassifier::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("model JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "physiocue-margin-classifier") throw InvalidInput("model JSON: unknown format");
    if (j.at("version").get<int>() != kModelVersion) {
      throw InvalidInput("model JSON: unsupported version " + j.at("version").dump());
    }
    MarginClassifier m;
    m.kind_ = parse_margin_kind(j.at("kind").get<std::string>());
    m.seed_ = j.at("training_seed").get<std::uint64_t>();
    m.mean_ = j.at("feature_mean").get<std::vector<double>>();
    m.scale_ = j.at("feature_scale").get<std::vector<double>>();
    if (m.mean_.size() != m.scale_.size()) throw InvalidInput("model JSON: feature statistics disagree");
    if (m.kind_ == MarginKind::Linear) {
      m.weights_ = j.at("weights").get<std::vector<double>>();
      if (m.weights_.size() != m.mean_.size()) throw InvalidInput("model JSON: weight count mismatch");
      m.weights_.push_back(j.at("bias").get<double>());
    } else {
      m.gamma_ = j.at("rbf_gamma").get<double>();
      m.support_ = j.at("support").get<std::vector<std::vector<double>>>();
      m.coef_ = j.at("coef").get<std::vector<double>>();
      if (m.support_.size() != m.coef_.size()) throw InvalidInput("model JSON: support/coef mismatch");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("model JSON: ") + e.what());
  }
}

Classification classify(const MarginClassifier& model, const std::vector<std::vector<double>>& x,
                        std::span<const Label> truth) {
  Classification c;
  c.predictions = model.predict(x);
  c.accuracy = accuracy(c.predictions, truth);
  return c;
}

std::vector<std::vector<double>> feature_matrix(std::span<const ResponseFeature> features) {
  std::vector<std::vector<double>> x;
  x.reserve(features.size());
  for (const auto& f : features) x.push_back({f.pulse_feat, f.saccade_feat});
  return x;
}

std::vector<Label> feature_labels(std::span<const ResponseFeature> features) {
  std::vector<Label> y;
  y.reserve(features.size());
  for (const auto& f : features) y.push_back(f.label);
  return y;
}

}  // namespace physiocue
